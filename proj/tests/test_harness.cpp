#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "iknn/error.hpp"
#include "iknn/harness.hpp"
#include "iknn/knn.hpp"
#include "iknn/report.hpp"
#include "iknn/split.hpp"
#include "support/random_instance.hpp"

using namespace iknn;
namespace fs = std::filesystem;

namespace {

// Five users with explicit 1-5 ratings over six items.
InteractionDataset toy_ratings() {
    std::vector<Interaction> records;
    const int ratings[5][6] = {
        {5, 4, 0, 1, 4, 5}, {4, 5, 5, 0, 2, 4}, {0, 4, 5, 4, 5, 1}, {5, 0, 4, 5, 4, 4}, {4, 5, 1, 4, 0, 5},
    };
    for (int u = 0; u < 5; ++u) {
        for (int i = 0; i < 6; ++i) {
            if (ratings[u][i] > 0) {
                records.push_back({"u" + std::to_string(u), "i" + std::to_string(i), double(ratings[u][i]),
                                   double(10 * u + i)});
            }
        }
    }
    return InteractionDataset::from_records(records);
}

ExperimentConfig toy_config() {
    ExperimentConfig cfg;
    cfg.k = 2;
    cfg.n = 3;
    cfg.seeds = {21, 42, 84};
    cfg.idcg_modes = {IdcgMode::truncated, IdcgMode::fixed_k};
    cfg.threads = 1;
    return cfg;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("iknn_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(ExperimentConfig, Validation) {
    ExperimentConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.seeds.clear();
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.k = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.presets.clear();
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(RunExperiment, CellCardinalityAndAlignment) {
    const auto res = run_experiment(toy_config(), toy_ratings(), "toy");
    EXPECT_EQ(res.cells.size(), 3u * 3u * 2u);
    for (const auto seed : {21, 42, 84}) {
        for (const auto mode : {IdcgMode::truncated, IdcgMode::fixed_k}) {
            for (const auto preset : {Preset::lenskit_original, Preset::lenskit_adjusted, Preset::recbole}) {
                EXPECT_NE(res.find(preset, seed, mode), nullptr);
            }
            const auto* adjusted = res.find(Preset::lenskit_adjusted, seed, mode);
            const auto* recbole = res.find(Preset::recbole, seed, mode);
            EXPECT_EQ(adjusted->report.per_user, recbole->report.per_user);
            EXPECT_EQ(adjusted->report.mean_ndcg, recbole->report.mean_ndcg);
            EXPECT_EQ(recbole->report.config.preset, "recbole");
            EXPECT_EQ(recbole->report.config.seed, std::uint64_t(seed));
        }
    }
    EXPECT_EQ(res.implicit_stats.n_interactions, 21u);
}

TEST(RunExperiment, SharedMatrixMatchesRecomputation) {
    auto cfg = toy_config();
    const auto raw = toy_ratings();
    const auto res = run_experiment(cfg, raw, "toy");
    const auto implicit = to_implicit(raw, cfg.threshold);
    for (const auto seed : cfg.seeds) {
        for (const auto preset : cfg.presets) {
            const auto split = split_holdout(implicit, {cfg.train_ratio, seed});
            const auto setup = preset_setup(preset, cfg.k);
            auto sim = cosine_similarity(build_matrix(split.train));
            if (setup.strategy == SimilarityStrategy::topk) sim = truncate_topk(sim, cfg.k);
            const auto lists = recommend_all(sim, split, setup.mode, cfg.n);
            const auto report = evaluate(lists, split.test, cfg.n, IdcgMode::truncated);
            EXPECT_EQ(res.find(preset, seed, IdcgMode::truncated)->report.per_user, report.per_user);
        }
    }
}

TEST(RunExperiment, DeterministicSerialization) {
    auto cfg = toy_config();
    const auto a = to_json(run_experiment(cfg, toy_ratings(), "toy"), false);
    cfg.threads = 3;
    const auto b = to_json(run_experiment(cfg, toy_ratings(), "toy"), false);
    EXPECT_EQ(a, b);
}

TEST(RunExperiment, ErrorsCarryPhase) {
    auto cfg = toy_config();
    cfg.threshold = {10.0, ThresholdMode::greater};
    try {
        run_experiment(cfg, toy_ratings(), "toy");
        FAIL() << "expected PhaseError";
    } catch (const PhaseError& e) {
        EXPECT_EQ(e.phase(), "config");
    }
    cfg = toy_config();
    cfg.data = "/nonexistent/ratings.inter";
    try {
        run_experiment(cfg);
        FAIL() << "expected PhaseError";
    } catch (const PhaseError& e) {
        EXPECT_EQ(e.phase(), "load");
    }
}

TEST(Report, JsonRoundTrip) {
    auto res = run_experiment(toy_config(), toy_ratings(), "toy");
    EXPECT_EQ(result_from_json(to_json(res, true)), res);
    auto without = res;
    without.timings.clear();
    EXPECT_EQ(result_from_json(to_json(res, false)), without);
    EXPECT_THROW(result_from_json("{not json"), ParseError);
}

TEST(Report, CsvHasOneRowPerCell) {
    auto cfg = toy_config();
    cfg.presets = {Preset::lenskit_original, Preset::recbole};
    cfg.idcg_modes = {IdcgMode::truncated};
    const auto res = run_experiment(cfg, toy_ratings(), "toy");
    const auto csv = render_csv(res);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dataset,preset,seed,idcg_mode,ndcg,precision,recall");
}

TEST(Report, EmitsAllFormatsConsistently) {
    const auto res = run_experiment(toy_config(), toy_ratings(), "toy");
    const auto dir = scratch("emit");
    const std::vector<ReportFormat> formats{ReportFormat::json, ReportFormat::csv, ReportFormat::md};
    const auto files = emit_report(res, formats, dir);
    for (const auto* name : {"report.json", "timings.json", "results.csv", "figure_toy.csv", "report.md"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    EXPECT_EQ(files.size(), 5u);

    const auto from_json = result_from_json(slurp(dir / "report.json"));
    std::istringstream csv(slurp(dir / "results.csv"));
    std::string line;
    std::getline(csv, line);
    std::size_t row = 0;
    while (std::getline(csv, line)) {
        const auto& cell = from_json.cells.at(row++);
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        ASSERT_EQ(f.size(), 7u);
        EXPECT_EQ(f[1], preset_name(cell.preset));
        EXPECT_EQ(std::stod(f[4]), cell.report.mean_ndcg);
        EXPECT_EQ(std::stod(f[5]), cell.report.mean_precision);
        EXPECT_EQ(std::stod(f[6]), cell.report.mean_recall);
    }
    EXPECT_EQ(row, res.cells.size());

    const auto md = slurp(dir / "report.md");
    for (const auto& cell : res.cells) {
        char value[16];
        std::snprintf(value, sizeof value, "%.4f", cell.report.mean_ndcg);
        EXPECT_NE(md.find(value), std::string::npos);
    }
}

TEST(Report, MarkdownHasSeedColumnsAndAverage) {
    const auto res = run_experiment(toy_config(), toy_ratings(), "toy");
    const auto md = render_markdown(res);
    EXPECT_NE(md.find("| Preset | 21 | 42 | 84 | Avg. |"), std::string::npos);

    std::istringstream in(md);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("| recbole |", 0) != 0) continue;
        std::vector<double> values;
        std::stringstream ss(line.substr(11));
        for (std::string cell; std::getline(ss, cell, '|');) {
            if (cell.find_first_not_of(' ') != std::string::npos) values.push_back(std::stod(cell));
        }
        ASSERT_EQ(values.size(), 4u);
        EXPECT_NEAR(values[3], (values[0] + values[1] + values[2]) / 3.0, 1e-4);
        ++rows;
    }
    EXPECT_EQ(rows, 6);  // 3 metrics x 2 IDCG modes
}
