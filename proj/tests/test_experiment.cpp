#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "claimrank/experiment.hpp"
#include "synth_corpus.hpp"
#include "test_helpers.hpp"

using claimrank::ExperimentConfig;
using claimrank::LabeledDataset;
using claimrank::TsvFormat;

namespace {

// Small corpus the whole file shares; written once per temp dir.
std::string write_small_corpus(const std::filesystem::path& dir) {
    testutil::SynthParams params;
    params.n_topics = 2;
    params.per_topic = 120;
    params.positive_rate = 0.15;
    params.seed = 555;
    auto ds = testutil::make_synth_corpus(params);
    auto path = (dir / "corpus.tsv").string();
    claimrank::write_dataset(ds, path);
    return path;
}

ExperimentConfig small_config(const std::string& dataset,
                              const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.dataset_path = dataset;
    cfg.output_dir = out_dir;
    cfg.train_fraction = 0.7;
    cfg.p_values = {std::nullopt, 0.3};
    cfg.arms = {"contextual"};
    cfg.seeds = {7, 8};
    return cfg;
}

nlohmann::json manifest_sans_timings(const std::filesystem::path& dir) {
    auto j = nlohmann::json::parse(testutil::slurp(dir / "manifest.json"));
    j.erase("timings");
    return j;
}

// Byte-compare every file under a/cells against b/cells.
void check_cells_identical(const std::filesystem::path& a,
                           const std::filesystem::path& b) {
    std::vector<std::string> rel_paths;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(a / "cells")) {
        if (entry.is_regular_file()) {
            rel_paths.push_back(
                std::filesystem::relative(entry.path(), a).string());
        }
    }
    REQUIRE_FALSE(rel_paths.empty());
    for (const auto& rel : rel_paths) {
        INFO("file " << rel);
        REQUIRE(std::filesystem::exists(b / rel));
        CHECK(testutil::slurp(a / rel) == testutil::slurp(b / rel));
    }
}

struct EnvGuard {
    std::string name;
    std::string saved;
    bool had = false;
    explicit EnvGuard(const char* n) : name(n) {
        if (const char* v = std::getenv(n)) {
            saved = v;
            had = true;
        }
    }
    ~EnvGuard() {
        if (had) {
            setenv(name.c_str(), saved.c_str(), 1);
        } else {
            unsetenv(name.c_str());
        }
    }
};

}  // namespace

TEST_CASE("experiment config defaults and parsing", "[experiment][config]") {
    SECTION("minimal config gets the documented defaults") {
        nlohmann::json j = {{"dataset_path", "d.tsv"}, {"output_dir", "out"}};
        auto cfg = claimrank::parse_experiment_config(j);
        CHECK(cfg.dataset_path == "d.tsv");
        CHECK(cfg.train_fraction == 0.8);
        REQUIRE(cfg.p_values.size() == 6);
        CHECK_FALSE(cfg.p_values[0].has_value());
        CHECK(cfg.p_values[1] == 0.1);
        CHECK(cfg.p_values[5] == 0.5);
        CHECK(cfg.arms == std::vector<std::string>{"contextual"});
        CHECK(cfg.profile == claimrank::Profile::baseline_linear);
        // Parsing already fills the seed list so the config validates as-is.
        REQUIRE(cfg.seeds.size() == 5);
        for (std::size_t i = 1; i < cfg.seeds.size(); ++i) {
            CHECK(cfg.seeds[i] == cfg.seeds[0] + i);
        }
        CHECK(cfg.top_k == 10);
        CHECK(cfg.workers == 1);
        CHECK(cfg.run_id == "claimrank");
        CHECK(cfg.pivot == "en");
        CHECK_FALSE(cfg.strict_exceed);
    }
    SECTION("unknown keys are rejected") {
        nlohmann::json j = {{"dataset_path", "d.tsv"},
                            {"output_dir", "out"},
                            {"mystery_knob", 3}};
        CHECK_THROWS_AS(claimrank::parse_experiment_config(j),
                        claimrank::ConfigError);
    }
    SECTION("wrong value types are wrapped as ConfigError") {
        nlohmann::json j = {{"dataset_path", "d.tsv"},
                            {"output_dir", "out"},
                            {"train_fraction", "most of it"}};
        CHECK_THROWS_AS(claimrank::parse_experiment_config(j),
                        claimrank::ConfigError);
    }
    SECTION("p_values accepts a JSON null entry") {
        nlohmann::json j = {{"dataset_path", "d.tsv"},
                            {"output_dir", "out"},
                            {"p_values", {nullptr, 0.25}}};
        auto cfg = claimrank::parse_experiment_config(j);
        REQUIRE(cfg.p_values.size() == 2);
        CHECK_FALSE(cfg.p_values[0].has_value());
        CHECK(cfg.p_values[1] == 0.25);
    }
}

TEST_CASE("experiment config validation catches bad sweeps",
          "[experiment][config]") {
    auto base = [] {
        ExperimentConfig cfg;
        cfg.dataset_path = "d.tsv";
        cfg.output_dir = "out";
        cfg.seeds = {1};
        return cfg;
    };
    auto expect_config_error = [](ExperimentConfig cfg) {
        CHECK_THROWS_AS(cfg.validate(), claimrank::ConfigError);
    };

    { auto c = base(); c.dataset_path.clear(); expect_config_error(c); }
    { auto c = base(); c.output_dir.clear(); expect_config_error(c); }
    { auto c = base(); c.train_fraction = 1.0; expect_config_error(c); }
    { auto c = base(); c.p_values.clear(); expect_config_error(c); }
    { auto c = base(); c.p_values = {0.1, 0.1}; expect_config_error(c); }
    { auto c = base(); c.p_values = {std::nullopt, std::nullopt}; expect_config_error(c); }
    { auto c = base(); c.p_values = {1.5}; expect_config_error(c); }
    { auto c = base(); c.arms = {"quantum"}; expect_config_error(c); }
    { auto c = base(); c.arms = {"eda", "eda"}; expect_config_error(c); }
    { auto c = base(); c.k_list = {}; expect_config_error(c); }
    { auto c = base(); c.k_list = {0}; expect_config_error(c); }
    { auto c = base(); c.workers = 0; expect_config_error(c); }
    { auto c = base(); c.run_id.clear(); expect_config_error(c); }
    {
        auto c = base();
        c.top_k = 0;
        CHECK_THROWS_AS(c.validate(), claimrank::InvalidTopKError);
    }
}

TEST_CASE("default seed head comes from the environment",
          "[experiment][config]") {
    EnvGuard guard("CLAIMRANK_SEED");

    unsetenv("CLAIMRANK_SEED");
    CHECK(claimrank::default_seed_head() == 42);

    setenv("CLAIMRANK_SEED", "7", 1);
    CHECK(claimrank::default_seed_head() == 7);

    setenv("CLAIMRANK_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(claimrank::default_seed_head(), claimrank::ConfigError);

    unsetenv("CLAIMRANK_SEED");
    ExperimentConfig cfg;
    cfg.apply_default_seeds();
    CHECK(cfg.seeds == std::vector<uint64_t>{42, 43, 44, 45, 46});
}

TEST_CASE("config files load and reject junk", "[experiment][config]") {
    auto dir = testutil::make_temp_dir("expcfg");
    auto path = (dir / "config.json").string();

    testutil::spit(path,
                   R"({"dataset_path": "d.tsv", "output_dir": "out",
                       "arms": ["eda"], "p_values": [0.2]})");
    auto cfg = claimrank::load_experiment_config(path);
    CHECK(cfg.arms == std::vector<std::string>{"eda"});

    testutil::spit(path, "{not json");
    CHECK_THROWS_AS(claimrank::load_experiment_config(path),
                    claimrank::ConfigError);
    CHECK_THROWS_AS(claimrank::load_experiment_config((dir / "nope").string()),
                    claimrank::IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("a small sweep produces the full artifact tree",
          "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweep");
    auto dataset = write_small_corpus(dir);
    auto cfg = small_config(dataset, (dir / "out").string());

    auto report = claimrank::run_experiment(cfg);

    REQUIRE(report.cells.size() == 4);  // {null, 0.3} x {7, 8}
    std::set<std::string> dirs;
    for (const auto& cell : report.cells) dirs.insert(cell.dir);
    CHECK(dirs == std::set<std::string>{
                      "cells/null_pnull_s7", "cells/null_pnull_s8",
                      "cells/contextual_p0.3_s7", "cells/contextual_p0.3_s8"});

    for (const auto& cell : report.cells) {
        auto cell_dir = dir / "out" / cell.dir;
        for (const char* name :
             {"split_train.tsv", "split_holdout.tsv", "train_augmented.tsv",
              "balance.json", "model.json", "run.tsv", "metrics.json"}) {
            INFO(cell.dir << "/" << name);
            CHECK(std::filesystem::exists(cell_dir / name));
        }
    }
    CHECK(std::filesystem::exists(dir / "out" / "manifest.json"));

    SECTION("null arm copies the split verbatim and reports zero balancing") {
        for (const auto& cell : report.cells) {
            if (cell.arm != "null") continue;
            auto cell_dir = dir / "out" / cell.dir;
            CHECK(testutil::slurp(cell_dir / "train_augmented.tsv") ==
                  testutil::slurp(cell_dir / "split_train.tsv"));
            CHECK(cell.balance.epochs_run == 0);
            CHECK(cell.balance.augmented_generated == 0);
        }
    }

    SECTION("augmented rows never reuse holdout ids") {
        for (const auto& cell : report.cells) {
            auto cell_dir = dir / "out" / cell.dir;
            auto holdout = claimrank::parse_dataset(
                (cell_dir / "split_holdout.tsv").string(), TsvFormat::canonical);
            auto train_aug = claimrank::parse_dataset(
                (cell_dir / "train_augmented.tsv").string(),
                TsvFormat::canonical);
            std::set<std::string> holdout_ids;
            for (const auto& t : holdout.tweets) holdout_ids.insert(t.tweet_id);
            for (const auto& t : train_aug.tweets) {
                if (t.origin != claimrank::Origin::original) {
                    INFO(cell.dir << " id " << t.tweet_id);
                    CHECK(holdout_ids.count(t.tweet_id) == 0);
                }
            }
        }
    }

    SECTION("contextual cells actually balanced the classes") {
        for (const auto& cell : report.cells) {
            if (cell.arm != "contextual") continue;
            CHECK(cell.balance.epochs_run > 0);
            CHECK(cell.balance.final_positive >= cell.balance.final_negative);
        }
    }

    SECTION("run files carry the composed run id") {
        for (const auto& cell : report.cells) {
            auto run = claimrank::read_run(
                (dir / "out" / cell.dir / "run.tsv").string());
            CHECK(run.run_id ==
                  "claimrank." + cell.dir.substr(std::string("cells/").size()));
        }
    }

    SECTION("medians group by (arm, p) in first-appearance order") {
        REQUIRE(report.medians.size() == 2);
        CHECK(report.medians[0].arm == "null");
        CHECK_FALSE(report.medians[0].p.has_value());
        CHECK(report.medians[1].arm == "contextual");
        CHECK(report.medians[1].p == 0.3);
    }

    SECTION("manifest echoes the canonical config without output_dir") {
        auto manifest =
            nlohmann::json::parse(testutil::slurp(dir / "out" / "manifest.json"));
        CHECK(manifest.contains("config_hash"));
        CHECK(manifest["cells"].size() == 4);
        CHECK_FALSE(manifest["config"].contains("output_dir"));
        CHECK_FALSE(manifest["config"].contains("workers"));
        CHECK(manifest["config"]["seeds"] ==
              nlohmann::json::array({7, 8}));
        CHECK(manifest["timings"].contains("total_ms"));
    }

    std::filesystem::remove_all(dir);
}

TEST_CASE("sweeps are deterministic and parallel-safe", "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweepdet");
    auto dataset = write_small_corpus(dir);

    auto cfg1 = small_config(dataset, (dir / "out1").string());
    auto cfg2 = small_config(dataset, (dir / "out2").string());
    auto cfg3 = small_config(dataset, (dir / "out3").string());
    cfg3.workers = 4;

    claimrank::run_experiment(cfg1);
    claimrank::run_experiment(cfg2);
    claimrank::run_experiment(cfg3);

    check_cells_identical(dir / "out1", dir / "out2");
    check_cells_identical(dir / "out1", dir / "out3");

    auto m1 = manifest_sans_timings(dir / "out1");
    CHECK(m1 == manifest_sans_timings(dir / "out2"));
    CHECK(m1 == manifest_sans_timings(dir / "out3"));

    std::filesystem::remove_all(dir);
}

TEST_CASE("median aggregation ignores seed order", "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweepseed");
    auto dataset = write_small_corpus(dir);

    auto forward = small_config(dataset, (dir / "fwd").string());
    forward.seeds = {7, 8, 9};
    auto backward = small_config(dataset, (dir / "bwd").string());
    backward.seeds = {9, 7, 8};

    auto a = claimrank::run_experiment(forward);
    auto b = claimrank::run_experiment(backward);
    REQUIRE(a.medians.size() == b.medians.size());
    for (size_t i = 0; i < a.medians.size(); ++i) {
        CHECK(claimrank::metric_report_json(a.medians[i].median) ==
              claimrank::metric_report_json(b.medians[i].median));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("eda and backtranslate arms run end to end", "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweeparms");
    auto dataset = write_small_corpus(dir);

    auto cfg = small_config(dataset, (dir / "out").string());
    cfg.arms = {"eda", "backtranslate"};
    cfg.p_values = {0.2};
    cfg.seeds = {11};

    auto report = claimrank::run_experiment(cfg);
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells[0].arm == "eda");
    CHECK(report.cells[0].p == 0.2);
    CHECK(report.cells[1].arm == "backtranslate");
    CHECK_FALSE(report.cells[1].p.has_value());

    // The generated rows carry the arm's id suffix and origin.
    auto eda_aug = claimrank::parse_dataset(
        (dir / "out" / report.cells[0].dir / "train_augmented.tsv").string(),
        TsvFormat::canonical);
    bool saw_eda = false;
    for (const auto& t : eda_aug.tweets) {
        if (t.origin == claimrank::Origin::augmented) {
            saw_eda = true;
            CHECK(t.tweet_id.find("#eda") != std::string::npos);
        }
    }
    CHECK(saw_eda);

    auto bt_aug = claimrank::parse_dataset(
        (dir / "out" / report.cells[1].dir / "train_augmented.tsv").string(),
        TsvFormat::canonical);
    bool saw_bt = false;
    for (const auto& t : bt_aug.tweets) {
        if (t.origin == claimrank::Origin::backtranslated) {
            saw_bt = true;
            CHECK(t.tweet_id.find("#bt") != std::string::npos);
        }
    }
    CHECK(saw_bt);
    std::filesystem::remove_all(dir);
}

TEST_CASE("an empty dataset aborts the sweep", "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweepempty");
    auto path = (dir / "empty.tsv").string();
    testutil::spit(path, "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n");

    auto cfg = small_config(path, (dir / "out").string());
    CHECK_THROWS_AS(claimrank::run_experiment(cfg),
                    claimrank::EmptyCorpusError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cell failures name the offending cell", "[experiment][sweep]") {
    auto dir = testutil::make_temp_dir("sweepfail");
    // One positive only: the 0.7 split leaves no positive for the holdout,
    // so every cell fails in stratified_split.
    LabeledDataset ds = testutil::make_dataset(1, 30);
    auto path = (dir / "corpus.tsv").string();
    claimrank::write_dataset(ds, path);

    auto cfg = small_config(path, (dir / "out").string());
    cfg.p_values = {std::nullopt};
    cfg.seeds = {7};
    try {
        claimrank::run_experiment(cfg);
        FAIL("expected an error");
    } catch (const claimrank::Error& e) {
        CHECK(std::string(e.what()).find("null_pnull_s7") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("reports render all three sections deterministically",
          "[experiment][report]") {
    auto dir = testutil::make_temp_dir("report");
    auto dataset = write_small_corpus(dir);
    auto cfg = small_config(dataset, (dir / "out").string());
    auto report = claimrank::run_experiment(cfg);

    auto tsv = claimrank::render_report(report, "tsv");
    CHECK(tsv.find("# cells") != std::string::npos);
    CHECK(tsv.find("# medians") != std::string::npos);
    CHECK(tsv.find("# samples_vs_score") != std::string::npos);
    CHECK(tsv.find("p=null") != std::string::npos);
    CHECK(tsv.find("contextual p=0.3") != std::string::npos);
    CHECK(tsv.find("cw_recall") != std::string::npos);
    CHECK(tsv == claimrank::render_report(report, "tsv"));

    auto md = claimrank::render_report(report, "markdown");
    CHECK(md.find("## ") != std::string::npos);
    CHECK(md.find("|") != std::string::npos);

    CHECK_THROWS_AS(claimrank::render_report(report, "pdf"),
                    claimrank::ConfigError);
    CHECK_THROWS_AS(claimrank::render_report(claimrank::SweepReport{}, "tsv"),
                    claimrank::ConfigError);

    claimrank::write_report_files(report, (dir / "out").string());
    CHECK(testutil::slurp(dir / "out" / "report.tsv") == tsv);
    CHECK(testutil::slurp(dir / "out" / "report.md") == md);
    std::filesystem::remove_all(dir);
}
