#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iknn/harness.hpp"

namespace iknn {

std::optional<ReportFormat> parse_report_format(std::string_view name);

// Full nested result. Timings are included only when requested, so that
// report files stay byte-identical across runs.
std::string to_json(const ExperimentResult& res, bool with_timings);
ExperimentResult result_from_json(std::string_view text);

// One row per cell: dataset,preset,seed,idcg_mode,ndcg,precision,recall.
std::string render_csv(const ExperimentResult& res);

// preset,seed,idcg_mode,ndcg rows for plotting nDCG per preset and seed.
std::string render_figure_csv(const ExperimentResult& res);

// Per IDCG mode and metric, a table with one row per preset, one column per
// seed and an Avg. column, values with 4 decimals.
std::string render_markdown(const ExperimentResult& res);

// Writes report.json (+ timings.json), results.csv (+ figure_<dataset>.csv)
// and report.md into out_dir, creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentResult& res, std::span<const ReportFormat> formats,
                                               const std::filesystem::path& out_dir);

} // namespace iknn
