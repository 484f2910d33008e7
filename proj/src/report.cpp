#include "iknn/report.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "iknn/error.hpp"
#include "iknn/format.hpp"

namespace iknn {

using nlohmann::json;

std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    if (name == "md") return ReportFormat::md;
    return std::nullopt;
}

namespace {

std::string_view threshold_mode_name(ThresholdMode mode) {
    return mode == ThresholdMode::greater ? "gt" : "ge";
}

template <typename T>
T require_name(std::optional<T> parsed, const std::string& text, const char* what) {
    if (!parsed) throw ParseError(std::string("unknown ") + what + " '" + text + "' in report", 1);
    return *parsed;
}

json stats_json(const DatasetStats& s) {
    return {{"n_users", s.n_users},
            {"n_items", s.n_items},
            {"n_interactions", s.n_interactions},
            {"avg_per_user", s.avg_per_user},
            {"avg_per_item", s.avg_per_item},
            {"sparsity", s.sparsity}};
}

DatasetStats stats_from(const json& j) {
    DatasetStats s;
    s.n_users = j.at("n_users").get<std::size_t>();
    s.n_items = j.at("n_items").get<std::size_t>();
    s.n_interactions = j.at("n_interactions").get<std::size_t>();
    s.avg_per_user = j.at("avg_per_user").get<double>();
    s.avg_per_item = j.at("avg_per_item").get<double>();
    s.sparsity = j.at("sparsity").get<double>();
    return s;
}

json report_json(const MetricReport& r) {
    json users = json::array();
    for (const auto& u : r.per_user) {
        users.push_back({{"user", u.user},
                         {"n_relevant", u.n_relevant},
                         {"hits", u.hits},
                         {"ndcg", u.ndcg},
                         {"precision", u.precision},
                         {"recall", u.recall}});
    }
    return {{"config",
             {{"n", r.config.n},
              {"idcg", idcg_name(r.config.idcg)},
              {"preset", r.config.preset},
              {"seed", r.config.seed}}},
            {"means", {{"ndcg", r.mean_ndcg}, {"precision", r.mean_precision}, {"recall", r.mean_recall}}},
            {"per_user", std::move(users)}};
}

MetricReport report_from(const json& j) {
    MetricReport r;
    const auto& cfg = j.at("config");
    r.config.n = cfg.at("n").get<std::size_t>();
    const auto idcg = cfg.at("idcg").get<std::string>();
    r.config.idcg = require_name(parse_idcg(idcg), idcg, "idcg mode");
    r.config.preset = cfg.at("preset").get<std::string>();
    r.config.seed = cfg.at("seed").get<std::uint64_t>();
    const auto& means = j.at("means");
    r.mean_ndcg = means.at("ndcg").get<double>();
    r.mean_precision = means.at("precision").get<double>();
    r.mean_recall = means.at("recall").get<double>();
    for (const auto& u : j.at("per_user")) {
        UserMetrics m;
        m.user = u.at("user").get<UserIndex>();
        m.n_relevant = u.at("n_relevant").get<std::size_t>();
        m.hits = u.at("hits").get<std::size_t>();
        m.ndcg = u.at("ndcg").get<double>();
        m.precision = u.at("precision").get<double>();
        m.recall = u.at("recall").get<double>();
        r.per_user.push_back(m);
    }
    return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

// Cell lookup keyed by (preset, seed, mode).
double cell_value(const ExperimentResult& res, Preset p, std::uint64_t seed, IdcgMode mode,
                  double MetricReport::*metric) {
    const auto* cell = res.find(p, seed, mode);
    return cell ? cell->report.*metric : 0.0;
}

} // namespace

std::string to_json(const ExperimentResult& res, bool with_timings) {
    const auto& s = res.settings;
    json presets = json::array();
    for (const auto p : s.presets) presets.push_back(preset_name(p));
    json modes = json::array();
    for (const auto m : s.idcg_modes) modes.push_back(idcg_name(m));

    json cells = json::array();
    for (const auto& c : res.cells) {
        cells.push_back({{"preset", preset_name(c.preset)},
                         {"seed", c.seed},
                         {"idcg_mode", idcg_name(c.idcg)},
                         {"report", report_json(c.report)}});
    }

    json root = {{"settings",
                  {{"dataset", s.dataset},
                   {"threshold", {{"cutoff", s.threshold.cutoff}, {"mode", threshold_mode_name(s.threshold.mode)}}},
                   {"train_ratio", s.train_ratio},
                   {"k", s.k},
                   {"n", s.n},
                   {"seeds", s.seeds},
                   {"presets", std::move(presets)},
                   {"idcg_modes", std::move(modes)}}},
                 {"stats", {{"raw", stats_json(res.raw_stats)}, {"implicit", stats_json(res.implicit_stats)}}},
                 {"cells", std::move(cells)}};
    if (with_timings) {
        json timings = json::array();
        for (const auto& t : res.timings) {
            timings.push_back({{"phase", t.phase}, {"seed", t.seed}, {"seconds", t.seconds}});
        }
        root["timings"] = std::move(timings);
    }
    return root.dump(2) + "\n";
}

ExperimentResult result_from_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), 1);
    }

    ExperimentResult res;
    try {
        const auto& s = root.at("settings");
        res.settings.dataset = s.at("dataset").get<std::string>();
        res.settings.threshold.cutoff = s.at("threshold").at("cutoff").get<double>();
        res.settings.threshold.mode =
            s.at("threshold").at("mode").get<std::string>() == "ge" ? ThresholdMode::greater_equal : ThresholdMode::greater;
        res.settings.train_ratio = s.at("train_ratio").get<double>();
        res.settings.k = s.at("k").get<std::size_t>();
        res.settings.n = s.at("n").get<std::size_t>();
        res.settings.seeds = s.at("seeds").get<std::vector<std::uint64_t>>();
        for (const auto& p : s.at("presets")) {
            const auto name = p.get<std::string>();
            res.settings.presets.push_back(require_name(parse_preset(name), name, "preset"));
        }
        for (const auto& m : s.at("idcg_modes")) {
            const auto name = m.get<std::string>();
            res.settings.idcg_modes.push_back(require_name(parse_idcg(name), name, "idcg mode"));
        }
        res.raw_stats = stats_from(root.at("stats").at("raw"));
        res.implicit_stats = stats_from(root.at("stats").at("implicit"));
        for (const auto& c : root.at("cells")) {
            ExperimentCell cell;
            const auto preset = c.at("preset").get<std::string>();
            cell.preset = require_name(parse_preset(preset), preset, "preset");
            cell.seed = c.at("seed").get<std::uint64_t>();
            const auto mode = c.at("idcg_mode").get<std::string>();
            cell.idcg = require_name(parse_idcg(mode), mode, "idcg mode");
            cell.report = report_from(c.at("report"));
            res.cells.push_back(std::move(cell));
        }
        if (root.contains("timings")) {
            for (const auto& t : root.at("timings")) {
                res.timings.push_back(
                    {t.at("phase").get<std::string>(), t.at("seed").get<std::uint64_t>(), t.at("seconds").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what(), 1);
    }
    return res;
}

std::string render_csv(const ExperimentResult& res) {
    std::ostringstream out;
    out << "dataset,preset,seed,idcg_mode,ndcg,precision,recall\n";
    for (const auto& c : res.cells) {
        out << res.settings.dataset << ',' << preset_name(c.preset) << ',' << c.seed << ',' << idcg_name(c.idcg) << ','
            << format_full(c.report.mean_ndcg) << ',' << format_full(c.report.mean_precision) << ','
            << format_full(c.report.mean_recall) << '\n';
    }
    return out.str();
}

std::string render_figure_csv(const ExperimentResult& res) {
    std::ostringstream out;
    out << "preset,seed,idcg_mode,ndcg\n";
    for (const auto& c : res.cells) {
        out << preset_name(c.preset) << ',' << c.seed << ',' << idcg_name(c.idcg) << ','
            << format_full(c.report.mean_ndcg) << '\n';
    }
    return out.str();
}

std::string render_markdown(const ExperimentResult& res) {
    const auto& s = res.settings;
    std::ostringstream out;
    out << "# " << s.dataset << "\n\n";
    out << "| Stage | Users | Items | Interactions | Sparsity |\n|---|---|---|---|---|\n";
    for (const auto& [label, st] : {std::pair{"raw", res.raw_stats}, std::pair{"implicit", res.implicit_stats}}) {
        out << "| " << label << " | " << st.n_users << " | " << st.n_items << " | " << st.n_interactions << " | "
            << format_fixed4(st.sparsity * 100.0) << "% |\n";
    }
    out << '\n';

    const std::pair<const char*, double MetricReport::*> metrics[] = {
        {"nDCG", &MetricReport::mean_ndcg},
        {"Precision", &MetricReport::mean_precision},
        {"Recall", &MetricReport::mean_recall},
    };
    for (const auto mode : s.idcg_modes) {
        for (const auto& [label, field] : metrics) {
            out << "## " << label << '@' << s.n << " (" << idcg_name(mode) << " IDCG, k=" << s.k << ")\n\n";
            out << "| Preset |";
            for (const auto seed : s.seeds) out << ' ' << seed << " |";
            out << " Avg. |\n|---|";
            for (std::size_t i = 0; i < s.seeds.size(); ++i) out << "---|";
            out << "---|\n";
            for (const auto preset : s.presets) {
                out << "| " << preset_name(preset) << " |";
                std::vector<double> row;
                for (const auto seed : s.seeds) {
                    row.push_back(cell_value(res, preset, seed, mode, field));
                    out << ' ' << format_fixed4(row.back()) << " |";
                }
                out << ' ' << format_fixed4(pairwise_mean(row)) << " |\n";
            }
            out << '\n';
        }
    }
    return out.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentResult& res, std::span<const ReportFormat> formats,
                                               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = out_dir / name;
        write_text(path, text);
        written.push_back(path);
    };
    for (const auto format : formats) {
        switch (format) {
        case ReportFormat::json:
            emit("report.json", to_json(res, false));
            if (!res.timings.empty()) {
                json timings = json::parse(to_json(res, true)).at("timings");
                emit("timings.json", timings.dump(2) + "\n");
            }
            break;
        case ReportFormat::csv:
            emit("results.csv", render_csv(res));
            emit("figure_" + res.settings.dataset + ".csv", render_figure_csv(res));
            break;
        case ReportFormat::md:
            emit("report.md", render_markdown(res));
            break;
        }
    }
    return written;
}

} // namespace iknn
