// iknn: item-kNN experiment harness.
//
//   iknn stats      --data ml-100k.inter --threshold 3
//   iknn preprocess --data ml-100k.inter --threshold 3 --out implicit.inter
//   iknn split      --data implicit.inter --seeds 42 --out splits/ml
//   iknn train      --train splits/ml.train.inter --preset recbole --out sim.txt
//   iknn recommend  --train splits/ml.train.inter --test splits/ml.test.inter --out recs.tsv
//   iknn evaluate   --recs recs.tsv --test splits/ml.test.inter --idcg both
//   iknn experiment --data ml-100k.inter --out results
//   iknn report     --in results/report.json --emit md --out results
//
// Every subcommand accepts --config <file> with `key = value` lines named
// after the long flags; flags given on the command line win.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iknn/error.hpp"
#include "iknn/format.hpp"
#include "iknn/harness.hpp"
#include "iknn/ingest.hpp"
#include "iknn/knn.hpp"
#include "iknn/metrics.hpp"
#include "iknn/recommend.hpp"
#include "iknn/report.hpp"
#include "iknn/split.hpp"

namespace fs = std::filesystem;
using namespace iknn;

namespace {

struct DataOptions {
    std::string data;
    std::string format = "atomic";
    std::vector<std::string> columns;
    double threshold = 3.0;
    std::string threshold_mode = "gt";
    CLI::Option* threshold_flag = nullptr;

    void add_to(CLI::App& app, bool data_required = true) {
        auto* opt = app.add_option("--data", data, "Interaction file")->check(CLI::ExistingFile);
        if (data_required) opt->required();
        app.add_option("--format", format, "atomic (typed TSV) or csv")
            ->check(CLI::IsMember({"atomic", "csv"}))
            ->capture_default_str();
        app.add_option("--columns", columns, "Column map, e.g. user=uid,item=iid,rating=r,timestamp=ts")
            ->delimiter(',');
        threshold_flag = app.add_option("--threshold", threshold, "Implicit-feedback rating cutoff")
                             ->capture_default_str();
        app.add_option("--threshold-mode", threshold_mode, "gt (strictly greater) or ge (greater or equal)")
            ->check(CLI::IsMember({"gt", "ge"}))
            ->capture_default_str();
    }

    FileFormat file_format() const { return format == "csv" ? FileFormat::csv : FileFormat::atomic; }

    ColumnMap column_map() const {
        ColumnMap map;
        for (const auto& entry : columns) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos) throw ConfigError("bad column mapping '" + entry + "'");
            const auto key = entry.substr(0, eq);
            const auto value = entry.substr(eq + 1);
            if (key == "user") map.user = value;
            else if (key == "item") map.item = value;
            else if (key == "rating") map.rating = value;
            else if (key == "timestamp") map.timestamp = value;
            else throw ConfigError("unknown column role '" + key + "'");
        }
        return map;
    }

    ImplicitThreshold implicit_threshold() const {
        return {threshold, threshold_mode == "ge" ? ThresholdMode::greater_equal : ThresholdMode::greater};
    }

    InteractionDataset load() const { return load_interactions(data, file_format(), column_map()); }
};

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& names, Parse parse, const char* what) {
    std::vector<T> out;
    for (const auto& name : names) {
        const auto parsed = parse(name);
        if (!parsed) throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
        out.push_back(*parsed);
    }
    return out;
}

std::vector<IdcgMode> parse_idcg_option(const std::string& value) {
    if (value == "both") return {IdcgMode::truncated, IdcgMode::fixed_k};
    if (const auto mode = parse_idcg(value)) return {*mode};
    throw ConfigError("unknown IDCG mode '" + value + "'");
}

void print_stats(const char* label, const DatasetStats& s) {
    std::printf("%s: users=%zu items=%zu interactions=%zu avg_per_user=%s avg_per_item=%s sparsity=%s\n", label,
                s.n_users, s.n_items, s.n_interactions, format_fixed4(s.avg_per_user).c_str(),
                format_fixed4(s.avg_per_item).c_str(), format_full(s.sparsity).c_str());
}

// Reruns `fn` with a phase tag on failure.
template <typename Fn>
auto phase(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const PhaseError&) {
        throw;
    } catch (const std::exception& e) {
        throw PhaseError(name, e.what());
    }
}

// INI reader that files unsectioned keys under the active subcommand, so a
// plain `k = 20` line configures `experiment --k`. Keys naming a top-level
// option (threads) stay at the top level.
class SubcommandConfig : public CLI::ConfigINI {
public:
    explicit SubcommandConfig(const CLI::App& app) : app_(app) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigINI::from_config(input);
        const auto active = app_.get_subcommands();
        if (active.empty()) return items;
        for (auto& item : items) {
            const bool top_level = item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == "default");
            if (!top_level || item.name == "++" || item.name == "--") continue;
            if (app_.get_option_no_throw("--" + item.name) != nullptr) continue;
            item.parents = {active.front()->get_name()};
        }
        return items;
    }

private:
    const CLI::App& app_;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Item-based kNN recommendation harness"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Key-value config file (command-line flags take precedence)");
    app.config_formatter(std::make_shared<SubcommandConfig>(app));
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

    // stats
    DataOptions stats_data;
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics before and after implicit conversion");
    stats_data.add_to(*stats_cmd);

    // preprocess
    DataOptions pre_data;
    std::string pre_out;
    auto* pre_cmd = app.add_subcommand("preprocess", "Convert ratings to implicit feedback");
    pre_data.add_to(*pre_cmd);
    pre_cmd->add_option("--out", pre_out, "Output atomic file")->required();

    // split
    DataOptions split_data;
    double split_ratio = 0.8;
    std::uint64_t split_seed = 42;
    std::string split_out;
    auto* split_cmd = app.add_subcommand("split", "Per-user holdout split into <out>.train.inter / <out>.test.inter");
    split_data.add_to(*split_cmd);
    split_cmd->add_option("--ratio", split_ratio, "Train ratio per user")->capture_default_str();
    split_cmd->add_option("--seeds,--seed", split_seed, "Split seed")->capture_default_str();
    split_cmd->add_option("--out", split_out, "Output prefix")->required();

    // train
    std::string train_path;
    std::string train_preset = "recbole";
    std::size_t train_k = 20;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "Build the item similarity matrix for a preset");
    train_cmd->add_option("--train", train_path, "Implicit train file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--preset", train_preset, "lenskit-original, lenskit-adjusted or recbole")
        ->capture_default_str();
    train_cmd->add_option("--k", train_k, "Neighbourhood size")->capture_default_str();
    train_cmd->add_option("--out", train_out, "Similarity text file")->required();

    // recommend
    std::string rec_train;
    std::string rec_test;
    std::string rec_sim;
    std::string rec_preset = "recbole";
    std::size_t rec_k = 20;
    std::size_t rec_n = 10;
    std::string rec_out;
    auto* rec_cmd = app.add_subcommand("recommend", "Top-N lists for every test user");
    rec_cmd->add_option("--train", rec_train, "Train split file")->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--test", rec_test, "Test split file")->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--sim", rec_sim, "Similarity file from `train` (built from --train when absent)")
        ->check(CLI::ExistingFile);
    rec_cmd->add_option("--preset", rec_preset, "Scoring preset")->capture_default_str();
    rec_cmd->add_option("--k", rec_k, "Neighbourhood size")->capture_default_str();
    rec_cmd->add_option("--topn", rec_n, "List length")->capture_default_str();
    rec_cmd->add_option("--out", rec_out, "Recommendation dump")->required();

    // evaluate
    std::string eval_recs;
    std::string eval_test;
    std::size_t eval_n = 10;
    std::string eval_idcg = "both";
    auto* eval_cmd = app.add_subcommand("evaluate", "nDCG / precision / recall of a recommendation dump");
    eval_cmd->add_option("--recs", eval_recs, "Recommendation dump")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--test", eval_test, "Test split file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--topn", eval_n, "Cutoff")->capture_default_str();
    eval_cmd->add_option("--idcg", eval_idcg, "truncated, fixed-k or both")->capture_default_str();

    // experiment
    DataOptions exp_data;
    ExperimentConfig exp;
    std::vector<std::string> exp_presets{"lenskit-original", "lenskit-adjusted", "recbole"};
    std::string exp_idcg = "truncated";
    std::vector<std::string> exp_emit{"json", "csv", "md"};
    std::string exp_out = "results";
    auto* exp_cmd = app.add_subcommand("experiment", "End-to-end runs over presets x seeds");
    exp_data.add_to(*exp_cmd);
    exp_cmd->add_option("--ratio", exp.train_ratio, "Train ratio per user")->capture_default_str();
    exp_cmd->add_option("--seeds", exp.seeds, "Comma-separated split seeds")->delimiter(',')->capture_default_str();
    exp_cmd->add_option("--k", exp.k, "Neighbourhood size")->capture_default_str();
    exp_cmd->add_option("--topn", exp.n, "Recommendation list length")->capture_default_str();
    exp_cmd->add_option("--preset", exp_presets, "Comma-separated presets")->delimiter(',')->capture_default_str();
    exp_cmd->add_option("--idcg", exp_idcg, "truncated, fixed-k or both")->capture_default_str();
    exp_cmd->add_option("--out", exp_out, "Output directory")->capture_default_str();
    exp_cmd->add_option("--emit", exp_emit, "Comma-separated subset of json,csv,md")->delimiter(',')
        ->capture_default_str();

    // report
    std::string report_in;
    std::vector<std::string> report_emit{"md", "csv"};
    std::string report_out = ".";
    auto* report_cmd = app.add_subcommand("report", "Re-emit tables from a saved report.json");
    report_cmd->add_option("--in", report_in, "report.json")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--emit", report_emit, "Comma-separated subset of json,csv,md")->delimiter(',')
        ->capture_default_str();
    report_cmd->add_option("--out", report_out, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*stats_cmd) {
            const auto raw = phase("load", [&] { return stats_data.load(); });
            print_stats("raw", stats(raw));
            if (*stats_data.threshold_flag) {
                const auto implicit = to_implicit(raw, stats_data.implicit_threshold());
                print_stats("implicit", stats(implicit));
            }
        } else if (*pre_cmd) {
            const auto raw = phase("load", [&] { return pre_data.load(); });
            const auto implicit = to_implicit(raw, pre_data.implicit_threshold());
            phase("write", [&] {
                write_atomic(pre_out, implicit);
                return 0;
            });
            print_stats("implicit", stats(implicit));
        } else if (*split_cmd) {
            auto ds = phase("load", [&] { return split_data.load(); });
            if (*split_data.threshold_flag) ds = to_implicit(ds, split_data.implicit_threshold());
            const auto split = phase("split", [&] { return split_holdout(ds, {split_ratio, split_seed}, threads); });
            phase("write", [&] {
                write_split(split_out, split);
                return 0;
            });
            std::printf("train=%zu test=%zu\n", split.train.size(), split.test.size());
        } else if (*train_cmd) {
            const auto preset = parse_preset(train_preset);
            if (!preset) throw PhaseError("config", "unknown preset '" + train_preset + "'");
            if (train_k == 0) throw PhaseError("config", "k must be >= 1");
            const auto train = phase("load", [&] { return load_interactions(train_path, FileFormat::atomic); });
            auto sim = phase("similarity", [&] { return cosine_similarity(build_matrix(train), threads); });
            if (preset_setup(*preset, train_k).strategy == SimilarityStrategy::topk) {
                sim = truncate_topk(sim, train_k, threads);
            }
            phase("write", [&] {
                write_similarity(train_out, sim);
                return 0;
            });
            std::printf("items=%zu nnz=%zu\n", sim.n_items(), sim.nnz());
        } else if (*rec_cmd) {
            const auto preset = parse_preset(rec_preset);
            if (!preset) throw PhaseError("config", "unknown preset '" + rec_preset + "'");
            if (rec_k == 0 || rec_n == 0) throw PhaseError("config", "k and topn must be >= 1");
            const auto setup = preset_setup(*preset, rec_k);
            const auto split = phase("load", [&] { return load_split(rec_train, rec_test); });
            SimilarityMatrix sim;
            if (!rec_sim.empty()) {
                sim = phase("load", [&] { return read_similarity(fs::path(rec_sim)); });
                if (sim.strategy() != setup.strategy) {
                    throw PhaseError("config", "similarity file strategy does not match preset " + rec_preset);
                }
                sim = sim.padded_to(split.train.n_items());
            } else {
                sim = phase("similarity", [&] { return cosine_similarity(build_matrix(split.train), threads); });
                if (setup.strategy == SimilarityStrategy::topk) sim = truncate_topk(sim, rec_k, threads);
            }
            const auto lists =
                phase("recommend", [&] { return recommend_all(sim, split, setup.mode, rec_n, threads); });
            phase("write", [&] {
                write_recommendations(fs::path(rec_out), lists, split.train.users(), split.train.items());
                return 0;
            });
            std::printf("users=%zu\n", lists.size());
        } else if (*eval_cmd) {
            const auto modes = parse_idcg_option(eval_idcg);
            const auto test = phase("load", [&] { return load_interactions(eval_test, FileFormat::atomic); });
            IdIndex users = test.users();
            IdIndex items = test.items();
            const auto lists = phase("load", [&] { return read_recommendations(eval_recs, users, items); });
            for (const auto mode : modes) {
                const auto report = phase("evaluate", [&] { return evaluate(lists, test, eval_n, mode); });
                std::printf("idcg=%s users=%zu ndcg@%zu=%s precision@%zu=%s recall@%zu=%s\n",
                            std::string(idcg_name(mode)).c_str(), report.per_user.size(), eval_n,
                            format_fixed4(report.mean_ndcg).c_str(), eval_n,
                            format_fixed4(report.mean_precision).c_str(), eval_n,
                            format_fixed4(report.mean_recall).c_str());
            }
        } else if (*exp_cmd) {
            exp.data = exp_data.data;
            exp.format = exp_data.file_format();
            exp.columns = exp_data.column_map();
            exp.threshold = exp_data.implicit_threshold();
            exp.presets = parse_list<Preset>(exp_presets, parse_preset, "preset");
            exp.idcg_modes = parse_idcg_option(exp_idcg);
            exp.formats = parse_list<ReportFormat>(exp_emit, parse_report_format, "format");
            exp.out_dir = exp_out;
            exp.threads = threads;
            const auto res = run_experiment(exp);
            const auto files = phase("report", [&] { return emit_report(res, exp.formats, exp.out_dir); });
            for (const auto& c : res.cells) {
                std::printf("%-17s seed=%-6llu %-9s ndcg@%zu=%s precision=%s recall=%s\n",
                            std::string(preset_name(c.preset)).c_str(), static_cast<unsigned long long>(c.seed),
                            std::string(idcg_name(c.idcg)).c_str(), exp.n, format_fixed4(c.report.mean_ndcg).c_str(),
                            format_fixed4(c.report.mean_precision).c_str(),
                            format_fixed4(c.report.mean_recall).c_str());
            }
            for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
        } else if (*report_cmd) {
            const auto formats = parse_list<ReportFormat>(report_emit, parse_report_format, "format");
            const auto res = phase("load", [&] {
                std::ifstream in(report_in, std::ios::binary);
                if (!in) throw IoError("cannot open " + report_in);
                std::ostringstream text;
                text << in.rdbuf();
                return result_from_json(text.str());
            });
            const auto files = phase("report", [&] { return emit_report(res, formats, report_out); });
            for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
        }
    } catch (const PhaseError& e) {
        std::fprintf(stderr, "error %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [%s] %s\n", app.get_subcommands().front()->get_name().c_str(), e.what());
        return 1;
    }
    return 0;
}
