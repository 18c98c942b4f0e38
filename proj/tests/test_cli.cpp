#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "json.hpp"

#include "claimrank/corpus.hpp"
#include "claimrank/rank_eval.hpp"
#include "synth_corpus.hpp"
#include "test_helpers.hpp"

using testutil::run_command;

namespace {

std::string cli() { return testutil::cli_path(); }

std::string fixture(const std::string& name) {
    return std::string(CLAIMRANK_TESTS_DIR) + "/data/" + name;
}

// Tiny but trainable corpus on disk; returns its path.
std::string write_corpus(const std::filesystem::path& dir,
                         size_t per_topic = 60) {
    testutil::SynthParams params;
    params.n_topics = 2;
    params.per_topic = per_topic;
    params.positive_rate = 0.2;
    params.seed = 99;
    auto ds = testutil::make_synth_corpus(params);
    auto path = (dir / "corpus.tsv").string();
    claimrank::write_dataset(ds, path);
    return path;
}

}  // namespace

TEST_CASE("cli: no subcommand is a usage error", "[cli]") {
    auto r = run_command(cli());
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("cli: unknown flags exit 1", "[cli]") {
    auto r = run_command(cli() + " stats --no-such-flag");
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("cli: domain errors exit 2 with a message", "[cli]") {
    auto r = run_command(cli() + " stats --input /nonexistent/data.tsv");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cli stats reports dataset statistics as JSON", "[cli]") {
    auto r = run_command(cli() + " stats --input " + fixture("fixture_tweets.tsv"));
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["name"] == "fixture_tweets");
    CHECK(j["n_samples"] == 20);
    CHECK(j["n_positive"] == 6);
    CHECK(j["positive_rate"] == Catch::Approx(0.3));
    CHECK(j["unique_words"].get<int>() > 0);
}

TEST_CASE("cli tokens prints the UNK report", "[cli]") {
    auto r = run_command(cli() + " tokens --input " +
                         fixture("fixture_tweets.tsv") + " --vocab " +
                         fixture("fixture_vocab.txt"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "total\tunk\tpercent\n91\t9\t9.890\n");
}

TEST_CASE("cli ingest converts checkthat input to canonical", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_ingest");
    auto raw = (dir / "raw.tsv").string();
    testutil::spit(raw,
                   "topic_id\ttweet_id\ttweet_url\ttweet_text\tcheck_worthiness\n"
                   "covid\t1\thttps://x/1\tfirst claim\t1\n"
                   "covid\t2\thttps://x/2\tsecond one\t0\n");
    auto out = (dir / "canonical.tsv").string();
    auto r = run_command(cli() + " ingest --input " + raw +
                         " --format checkthat --output " + out);
    REQUIRE(r.exit_code == 0);
    auto ds = claimrank::parse_dataset(out, claimrank::TsvFormat::canonical);
    REQUIRE(ds.tweets.size() == 2);
    CHECK(ds.tweets[0].text == "first claim");
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli augment rewrites rows with the built-in scorer", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_augment");
    auto corpus = write_corpus(dir);
    auto out = (dir / "augmented.tsv").string();

    auto r = run_command(cli() + " augment --input " + corpus +
                         " --p 0.3 --seed 5 --output " + out);
    REQUIRE(r.exit_code == 0);
    auto ds = claimrank::parse_dataset(out, claimrank::TsvFormat::canonical);
    auto orig = claimrank::parse_dataset(corpus, claimrank::TsvFormat::canonical);
    REQUIRE(ds.tweets.size() == orig.tweets.size());
    for (size_t i = 0; i < ds.tweets.size(); ++i) {
        CHECK(ds.tweets[i].origin == claimrank::Origin::augmented);
        CHECK(ds.tweets[i].tweet_id == orig.tweets[i].tweet_id + "#aug1");
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli augment honors an external scorer command", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_ext");
    auto corpus = (dir / "two.tsv").string();
    testutil::spit(corpus,
                   "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                   "t\t1\talpha beta\t1\n");
    auto out = (dir / "aug.tsv").string();
    auto r = run_command(cli() + " augment --input " + corpus +
                         " --p 1.0 --scorer-cmd 'python3 " +
                         testutil::mocks_dir() + "/const_scorer.py' --output " +
                         out);
    REQUIRE(r.exit_code == 0);
    auto ds = claimrank::parse_dataset(out, claimrank::TsvFormat::canonical);
    REQUIRE(ds.tweets.size() == 1);
    CHECK(ds.tweets[0].text == "X X");
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli balance writes the balanced set and a report", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_balance");
    auto corpus = write_corpus(dir);
    auto out = (dir / "balanced.tsv").string();
    auto report = (dir / "balance.json").string();

    auto r = run_command(cli() + " balance --input " + corpus +
                         " --p 0.2 --seed 5 --output " + out + " --report " +
                         report);
    REQUIRE(r.exit_code == 0);

    auto j = nlohmann::json::parse(testutil::slurp(report));
    CHECK(j["epochs_run"].get<int>() > 0);
    CHECK(j["final_positive"].get<int>() >= j["final_negative"].get<int>());

    auto ds = claimrank::parse_dataset(out, claimrank::TsvFormat::canonical);
    size_t pos = 0, neg = 0;
    for (const auto& t : ds.tweets) (t.label == 1 ? pos : neg) += 1;
    CHECK(pos >= neg);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli train/rank/eval chain works end to end", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_chain");
    auto corpus = write_corpus(dir);
    auto model = (dir / "model.json").string();
    auto run_file = (dir / "run.tsv").string();

    auto r1 = run_command(cli() + " train --input " + corpus +
                          " --seed 3 --model " + model);
    REQUIRE(r1.exit_code == 0);
    auto train_json = nlohmann::json::parse(r1.out);
    CHECK(train_json["initial_loss"].get<double>() > 0.0);
    CHECK(train_json["epoch_losses"].size() == 10);  // baseline profile

    auto r2 = run_command(cli() + " rank --input " + corpus + " --model " +
                          model + " --run-id demo --output " + run_file);
    REQUIRE(r2.exit_code == 0);
    auto run = claimrank::read_run(run_file);
    CHECK(run.run_id == "demo");

    auto r3 = run_command(cli() + " eval --run " + run_file + " --gold " +
                          corpus + " --k-list 1,5");
    REQUIRE(r3.exit_code == 0);
    auto metrics = nlohmann::json::parse(r3.out);
    CHECK(metrics.contains("map"));
    CHECK(metrics.contains("p_at_1"));
    CHECK(metrics.contains("p_at_5"));
    CHECK(metrics.contains("cw_f1"));
    CHECK(metrics["map"].get<double>() >= 0.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli rank needs exactly one score source", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_rank");
    auto corpus = write_corpus(dir, 30);

    auto r = run_command(cli() + " rank --input " + corpus);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli rank surfaces id mismatches from external scores", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_scores");
    auto corpus = (dir / "corpus.tsv").string();
    testutil::spit(corpus,
                   "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                   "t\ta\tfirst text\t1\n"
                   "t\tb\tsecond text\t0\n");
    auto scores = (dir / "scores.tsv").string();
    testutil::spit(scores,
                   "tweet_id\tlogit_neg\tlogit_pos\n"
                   "a\t0.0\t1.0\n");
    auto r = run_command(cli() + " rank --input " + corpus + " --scores " +
                         scores);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("id mismatch") != std::string::npos);

    testutil::spit(scores,
                   "tweet_id\tlogit_neg\tlogit_pos\n"
                   "a\t0.0\t1.0\n"
                   "b\t0.5\t-0.5\n");
    auto ok = run_command(cli() + " rank --input " + corpus + " --scores " +
                          scores);
    REQUIRE(ok.exit_code == 0);
    CHECK(ok.out.find("claimrank") != std::string::npos);  // default run id
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli sweep runs a small grid and writes reports", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_sweep");
    auto corpus = write_corpus(dir, 80);
    auto out_dir = (dir / "out").string();

    auto r = run_command(cli() + " sweep --input " + corpus + " --output-dir " +
                         out_dir +
                         " --p-values null,0.2 --seeds 7 --train-fraction 0.7");
    REQUIRE(r.exit_code == 0);
    CHECK(r.err.find("sweep complete: 2 cells") != std::string::npos);
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "manifest.json"));
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "report.tsv"));
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "report.md"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli sweep accepts a config file with flag overrides", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_sweepcfg");
    auto corpus = write_corpus(dir, 80);
    auto cfg_path = (dir / "config.json").string();
    nlohmann::json cfg = {
        {"dataset_path", corpus},
        {"output_dir", (dir / "ignored").string()},
        {"p_values", {nullptr}},
        {"seeds", {3}},
        {"train_fraction", 0.7},
    };
    testutil::spit(cfg_path, cfg.dump());

    auto out_dir = (dir / "real_out").string();
    auto r = run_command(cli() + " sweep --config " + cfg_path +
                         " --output-dir " + out_dir);
    REQUIRE(r.exit_code == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "manifest.json"));
    CHECK_FALSE(std::filesystem::exists(std::filesystem::path(dir / "ignored") /
                                        "manifest.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli seed flag falls back to CLAIMRANK_SEED then 42", "[cli]") {
    auto dir = testutil::make_temp_dir("cli_seed");
    auto corpus = write_corpus(dir, 40);
    auto out_a = (dir / "a.tsv").string();
    auto out_b = (dir / "b.tsv").string();
    auto out_c = (dir / "c.tsv").string();

    // Environment seed is honored...
    auto r1 = run_command("CLAIMRANK_SEED=9 " + cli() + " augment --input " +
                          corpus + " --p 0.5 --output " + out_a);
    REQUIRE(r1.exit_code == 0);
    // ...and the explicit flag wins over it.
    auto r2 = run_command("CLAIMRANK_SEED=1234 " + cli() + " augment --input " +
                          corpus + " --p 0.5 --seed 9 --output " + out_b);
    REQUIRE(r2.exit_code == 0);
    CHECK(testutil::slurp(out_a) == testutil::slurp(out_b));

    // A different seed changes the output.
    auto r3 = run_command(cli() + " augment --input " + corpus +
                          " --p 0.5 --seed 10 --output " + out_c);
    REQUIRE(r3.exit_code == 0);
    CHECK(testutil::slurp(out_a) != testutil::slurp(out_c));
    std::filesystem::remove_all(dir);
}
