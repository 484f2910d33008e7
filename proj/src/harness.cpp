#include "iknn/harness.hpp"

#include <chrono>
#include <optional>
#include <type_traits>
#include <utility>

#include "iknn/error.hpp"
#include "iknn/knn.hpp"
#include "iknn/split.hpp"

namespace iknn {

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (presets.empty()) throw ConfigError("at least one preset is required");
    if (idcg_modes.empty()) throw ConfigError("at least one IDCG mode is required");
    if (k == 0) throw ConfigError("k must be >= 1");
    if (n == 0) throw ConfigError("topn must be >= 1");
    if (!(train_ratio > 0.0 && train_ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
}

const ExperimentCell* ExperimentResult::find(Preset preset, std::uint64_t seed, IdcgMode idcg) const {
    for (const auto& cell : cells) {
        if (cell.preset == preset && cell.seed == seed && cell.idcg == idcg) return &cell;
    }
    return nullptr;
}

namespace {

class PhaseClock {
public:
    explicit PhaseClock(std::vector<PhaseTiming>& sink) : sink_(sink) {}

    template <typename Fn>
    auto run(const std::string& phase, std::uint64_t seed, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        auto record = [&] {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            sink_.push_back({phase, seed, elapsed.count()});
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record();
            } else {
                auto value = fn();
                record();
                return value;
            }
        } catch (const PhaseError&) {
            throw;
        } catch (const std::exception& e) {
            throw PhaseError(phase, e.what());
        }
    }

private:
    std::vector<PhaseTiming>& sink_;
};

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw PhaseError("config", e.what());
    }
    std::vector<PhaseTiming> load_timing;
    PhaseClock clock(load_timing);
    const auto raw = clock.run("load", 0, [&] { return load_interactions(cfg.data, cfg.format, cfg.columns); });
    auto res = run_experiment(cfg, raw, cfg.data.stem().string());
    res.timings.insert(res.timings.begin(), load_timing.begin(), load_timing.end());
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const InteractionDataset& raw,
                                const std::string& dataset_name) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw PhaseError("config", e.what());
    }

    ExperimentResult res;
    res.settings = {dataset_name, cfg.threshold, cfg.train_ratio, cfg.k, cfg.n, cfg.seeds, cfg.presets, cfg.idcg_modes};
    PhaseClock clock(res.timings);

    const auto implicit = clock.run("preprocess", 0, [&] {
        res.raw_stats = stats(raw);
        return to_implicit(raw, cfg.threshold);
    });
    if (implicit.empty()) throw PhaseError("config", "no interactions survive the implicit threshold");
    res.implicit_stats = stats(implicit);

    const unsigned threads = cfg.threads;
    for (const auto seed : cfg.seeds) {
        const auto split = clock.run("split", seed, [&] {
            return split_holdout(implicit, SplitConfig{cfg.train_ratio, seed}, threads);
        });
        const auto full = clock.run("similarity", seed, [&] {
            return cosine_similarity(build_matrix(split.train), threads);
        });

        std::optional<SimilarityMatrix> truncated;
        for (const auto preset : cfg.presets) {
            const auto setup = preset_setup(preset, cfg.k);
            if (setup.strategy == SimilarityStrategy::topk && !truncated) {
                truncated = clock.run("truncate", seed, [&] { return truncate_topk(full, cfg.k, threads); });
            }
            const SimilarityMatrix& matrix = setup.strategy == SimilarityStrategy::full ? full : *truncated;
            const std::string name(preset_name(preset));

            const auto lists = clock.run("recommend:" + name, seed, [&] {
                return recommend_all(matrix, split, setup.mode, cfg.n, threads);
            });
            for (const auto mode : cfg.idcg_modes) {
                auto report = clock.run("evaluate:" + name, seed, [&] {
                    return evaluate(lists, split.test, cfg.n, mode);
                });
                report.config.preset = name;
                report.config.seed = seed;
                res.cells.push_back({preset, seed, mode, std::move(report)});
            }
        }
    }
    return res;
}

} // namespace iknn
