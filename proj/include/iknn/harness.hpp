#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iknn/ingest.hpp"
#include "iknn/metrics.hpp"
#include "iknn/recommend.hpp"

namespace iknn {

enum class ReportFormat { json, csv, md };

struct ExperimentConfig {
    std::filesystem::path data;
    FileFormat format = FileFormat::atomic;
    ColumnMap columns;
    ImplicitThreshold threshold{3.0, ThresholdMode::greater};
    double train_ratio = 0.8;
    std::vector<std::uint64_t> seeds{21, 42, 84};
    std::size_t k = 20;
    std::size_t n = 10;
    std::vector<Preset> presets{Preset::lenskit_original, Preset::lenskit_adjusted, Preset::recbole};
    std::vector<IdcgMode> idcg_modes{IdcgMode::truncated};
    std::filesystem::path out_dir = "results";
    std::vector<ReportFormat> formats{ReportFormat::json, ReportFormat::csv, ReportFormat::md};
    unsigned threads = 0;  // 0: hardware concurrency

    // Throws ConfigError on empty seeds/presets/modes, k == 0, n == 0 or a bad ratio.
    void validate() const;
};

// Settings echoed into every result so a report is self-describing.
struct ExperimentSettings {
    std::string dataset;
    ImplicitThreshold threshold;
    double train_ratio = 0.8;
    std::size_t k = 20;
    std::size_t n = 10;
    std::vector<std::uint64_t> seeds;
    std::vector<Preset> presets;
    std::vector<IdcgMode> idcg_modes;

    bool operator==(const ExperimentSettings& o) const {
        return dataset == o.dataset && threshold.cutoff == o.threshold.cutoff &&
               threshold.mode == o.threshold.mode && train_ratio == o.train_ratio && k == o.k && n == o.n &&
               seeds == o.seeds && presets == o.presets && idcg_modes == o.idcg_modes;
    }
};

struct ExperimentCell {
    Preset preset = Preset::recbole;
    std::uint64_t seed = 0;
    IdcgMode idcg = IdcgMode::truncated;
    MetricReport report;

    bool operator==(const ExperimentCell&) const = default;
};

struct PhaseTiming {
    std::string phase;
    std::uint64_t seed = 0;  // 0 for phases shared by all seeds
    double seconds = 0.0;

    bool operator==(const PhaseTiming&) const = default;
};

struct ExperimentResult {
    ExperimentSettings settings;
    DatasetStats raw_stats;
    DatasetStats implicit_stats;
    // Ordered by seed, then preset, then IDCG mode, each in config order.
    std::vector<ExperimentCell> cells;
    std::vector<PhaseTiming> timings;

    const ExperimentCell* find(Preset preset, std::uint64_t seed, IdcgMode idcg) const;

    bool operator==(const ExperimentResult&) const = default;
};

// Loads cfg.data and runs the whole pipeline. Errors surface as PhaseError
// tagged with the failing phase.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Same pipeline over an already loaded raw dataset; `dataset_name` labels the result.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const InteractionDataset& raw,
                                const std::string& dataset_name);

} // namespace iknn
