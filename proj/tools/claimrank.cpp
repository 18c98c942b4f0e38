// claimrank — check-worthiness augmentation, training, ranking, and
// evaluation pipeline as one scriptable binary. Exit codes: 0 success,
// 1 usage error, 2 data/contract error. Diagnostics go to stderr; data goes
// to files or stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "claimrank/augment.hpp"
#include "claimrank/classifier.hpp"
#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"
#include "claimrank/experiment.hpp"
#include "claimrank/external_scorer.hpp"
#include "claimrank/lm_scorer.hpp"
#include "claimrank/rank_eval.hpp"
#include "claimrank/translate.hpp"
#include "claimrank/wordpiece.hpp"

namespace {

using claimrank::LabeledDataset;
using claimrank::Tweet;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  return flag ? *flag : claimrank::default_seed_head();
}

LabeledDataset read_input(const std::string& path, const std::string& format) {
  return claimrank::parse_dataset(path, claimrank::parse_format(format));
}

void write_output(const LabeledDataset& ds, const std::string& output, bool with_origin) {
  if (output.empty() || output == "-") {
    claimrank::write_dataset(ds, std::cout, with_origin);
  } else {
    claimrank::write_dataset(ds, output, with_origin);
  }
}

std::vector<std::optional<double>> parse_p_values_csv(const std::string& csv) {
  std::vector<std::optional<double>> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item == "null") {
      out.push_back(std::nullopt);
    } else {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw claimrank::ConfigError("bad p value '" + item + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
std::vector<T> parse_int_csv(const std::string& csv, const char* what) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(static_cast<T>(std::stoull(item)));
    } catch (const std::exception&) {
      throw claimrank::ConfigError(std::string("bad ") + what + " '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> parse_string_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    out.push_back(
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

claimrank::AugmentConfig make_augment_config(double p, const std::string& mode,
                                             const std::string& selection, std::size_t top_k,
                                             std::uint64_t seed) {
  claimrank::AugmentConfig cfg;
  cfg.p = p;
  if (mode == "substitute") {
    cfg.mode = claimrank::AugmentMode::substitute;
  } else if (mode == "insert") {
    cfg.mode = claimrank::AugmentMode::insert;
  } else {
    throw claimrank::ConfigError("unknown mode '" + mode + "'");
  }
  if (selection == "argmax") {
    cfg.selection = claimrank::Selection::argmax;
  } else if (selection == "sample_top_k") {
    cfg.selection = claimrank::Selection::sample_top_k;
  } else {
    throw claimrank::ConfigError("unknown selection '" + selection + "'");
  }
  cfg.top_k = top_k;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// Builds the scorer a subcommand should use: an external process when
// --scorer-cmd is given, otherwise the built-in n-gram model trained on the
// input dataset itself.
std::unique_ptr<claimrank::CandidateScorer> make_scorer(const std::string& scorer_cmd,
                                                        int timeout_ms, bool lowercase,
                                                        const LabeledDataset& ds) {
  if (!scorer_cmd.empty()) {
    return std::make_unique<claimrank::ExternalScorer>(scorer_cmd, timeout_ms);
  }
  std::vector<std::string> sentences;
  sentences.reserve(ds.tweets.size());
  for (const Tweet& t : ds.tweets) sentences.push_back(t.text);
  claimrank::NGramScorer::Params params;
  params.lowercase = lowercase;
  return std::make_unique<claimrank::NGramScorer>(sentences, params);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"check-worthiness claim ranking pipeline"};
  app.require_subcommand(1);

  std::string input, format = "canonical", output, vocab_path, model_path, scores_path;
  std::string run_path, gold_path, run_id = "claimrank", mode = "substitute";
  std::string selection = "sample_top_k", profile = "baseline_linear", scorer_cmd;
  std::string config_path, output_dir, k_list_csv, p_values_csv, arms_csv, seeds_csv;
  std::string translate_endpoint, pivot = "en", report_path;
  std::optional<std::uint64_t> seed_flag;
  double p = 0.1;
  std::optional<double> train_fraction;
  std::size_t top_k = 10;
  std::optional<std::size_t> workers, epochs, batch_size;
  std::optional<double> learning_rate;
  int timeout_ms = 30000;
  bool lowercase = false, strict_exceed = false, skip_empty_topics = false, with_origin = false;

  CLI::App* ingest = app.add_subcommand("ingest", "normalize a dataset to canonical TSV");
  ingest->add_option("--input", input, "dataset path")->required();
  ingest->add_option("--format", format, "canonical|checkthat");
  ingest->add_option("--output", output, "output path (default stdout)");
  ingest->add_flag("--with-origin", with_origin, "include the origin column");

  CLI::App* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  stats->add_option("--input", input, "dataset path")->required();
  stats->add_option("--format", format, "canonical|checkthat");

  CLI::App* tokens = app.add_subcommand("tokens", "subword UNK report for a dataset");
  tokens->add_option("--input", input, "dataset path")->required();
  tokens->add_option("--format", format, "canonical|checkthat");
  tokens->add_option("--vocab", vocab_path, "subword vocabulary file")->required();
  tokens->add_flag("--lowercase", lowercase, "case-fold before tokenizing");

  CLI::App* augment = app.add_subcommand("augment", "contextually augment every row once");
  augment->add_option("--input", input, "dataset path")->required();
  augment->add_option("--format", format, "canonical|checkthat");
  augment->add_option("--p", p, "per-token augmentation probability");
  augment->add_option("--mode", mode, "substitute|insert");
  augment->add_option("--selection", selection, "argmax|sample_top_k");
  augment->add_option("--top-k", top_k, "candidate pool size");
  augment->add_option("--seed", seed_flag, "seed (default: CLAIMRANK_SEED or 42)");
  augment->add_option("--scorer-cmd", scorer_cmd, "external scorer command");
  augment->add_option("--timeout-ms", timeout_ms, "external scorer timeout");
  augment->add_flag("--lowercase", lowercase, "case-fold the built-in scorer");
  augment->add_option("--output", output, "output path (default stdout)");

  CLI::App* balance = app.add_subcommand("balance", "balance classes by epoch-wise augmentation");
  balance->add_option("--input", input, "dataset path")->required();
  balance->add_option("--format", format, "canonical|checkthat");
  balance->add_option("--p", p, "per-token augmentation probability");
  balance->add_option("--mode", mode, "substitute|insert");
  balance->add_option("--selection", selection, "argmax|sample_top_k");
  balance->add_option("--top-k", top_k, "candidate pool size");
  balance->add_option("--seed", seed_flag, "seed (default: CLAIMRANK_SEED or 42)");
  balance->add_option("--scorer-cmd", scorer_cmd, "external scorer command");
  balance->add_option("--timeout-ms", timeout_ms, "external scorer timeout");
  balance->add_flag("--lowercase", lowercase, "case-fold the built-in scorer");
  balance->add_flag("--strict-exceed", strict_exceed, "balance until positives > negatives");
  balance->add_option("--output", output, "balanced dataset path (default stdout)");
  balance->add_option("--report", report_path, "balance report JSON path (default stderr)");

  CLI::App* train_cmd = app.add_subcommand("train", "train the built-in linear classifier");
  train_cmd->add_option("--input", input, "dataset path")->required();
  train_cmd->add_option("--format", format, "canonical|checkthat");
  train_cmd->add_option("--profile", profile, "baseline_linear|paper_transformer");
  train_cmd->add_option("--seed", seed_flag, "seed (default: CLAIMRANK_SEED or 42)");
  train_cmd->add_option("--epochs", epochs, "override profile epochs");
  train_cmd->add_option("--batch-size", batch_size, "override profile batch size");
  train_cmd->add_option("--learning-rate", learning_rate, "override profile learning rate");
  train_cmd->add_option("--model", model_path, "model JSON output path")->required();

  CLI::App* rank = app.add_subcommand("rank", "rank a dataset with a model or external scores");
  rank->add_option("--input", input, "dataset path")->required();
  rank->add_option("--format", format, "canonical|checkthat");
  rank->add_option("--model", model_path, "model JSON path");
  rank->add_option("--scores", scores_path, "external score TSV path");
  rank->add_option("--run-id", run_id, "run identifier");
  rank->add_option("--output", output, "run file path (default stdout)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a run file against gold labels");
  eval->add_option("--run", run_path, "run file path")->required();
  eval->add_option("--gold", gold_path, "gold dataset path")->required();
  eval->add_option("--format", format, "gold format: canonical|checkthat");
  eval->add_option("--k-list", k_list_csv, "comma-separated k values (default 1,3,5,10,20,30)");
  eval->add_flag("--skip-empty-topics", skip_empty_topics,
                 "drop topics without relevant items from the means");

  CLI::App* sweep = app.add_subcommand("sweep", "run the full experiment grid");
  sweep->add_option("--config", config_path, "experiment config JSON");
  sweep->add_option("--input", input, "dataset path (overrides config dataset_path)");
  sweep->add_option("--format", format, "canonical|checkthat");
  sweep->add_option("--output-dir", output_dir, "output directory (overrides config)");
  sweep->add_option("--train-fraction", train_fraction, "stratified train fraction");
  sweep->add_option("--p-values", p_values_csv, "comma-separated p values, 'null' allowed");
  sweep->add_option("--arms", arms_csv, "comma-separated arms: contextual,backtranslate,eda");
  sweep->add_option("--profile", profile, "baseline_linear|paper_transformer");
  sweep->add_option("--seeds", seeds_csv, "comma-separated seed list");
  sweep->add_option("--seed", seed_flag, "seed list head (expands to 5 consecutive)");
  sweep->add_option("--mode", mode, "substitute|insert");
  sweep->add_option("--selection", selection, "argmax|sample_top_k");
  sweep->add_option("--top-k", top_k, "candidate pool size");
  sweep->add_option("--k-list", k_list_csv, "comma-separated k values");
  sweep->add_option("--workers", workers, "parallel cell workers");
  sweep->add_option("--run-id", run_id, "run identifier prefix");
  sweep->add_option("--translate-endpoint", translate_endpoint, "HTTP translation endpoint");
  sweep->add_option("--pivot", pivot, "back-translation pivot language");
  sweep->add_flag("--strict-exceed", strict_exceed, "balance until positives > negatives");
  sweep->add_flag("--lowercase", lowercase, "case-fold the built-in scorer");
  sweep->add_flag("--skip-empty-topics", skip_empty_topics,
                  "drop topics without relevant items from the means");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      write_output(read_input(input, format), output, with_origin);
    } else if (*stats) {
      const LabeledDataset ds = read_input(input, format);
      const claimrank::DatasetStats s = claimrank::stats(ds);
      nlohmann::ordered_json j;
      j["name"] = ds.name;
      j["n_samples"] = s.n_samples;
      j["n_positive"] = s.n_positive;
      j["positive_rate"] = s.positive_rate;
      j["unique_words"] = s.unique_word_count;
      std::cout << j.dump(2) << '\n';
    } else if (*tokens) {
      const LabeledDataset ds = read_input(input, format);
      const claimrank::SubwordVocab vocab = claimrank::load_vocab(vocab_path);
      std::cout << claimrank::unk_report_tsv(claimrank::unk_report(vocab, ds.tweets, lowercase));
    } else if (*augment) {
      const LabeledDataset ds = read_input(input, format);
      const claimrank::AugmentConfig cfg =
          make_augment_config(p, mode, selection, top_k, resolve_seed(seed_flag));
      const auto scorer = make_scorer(scorer_cmd, timeout_ms, lowercase, ds);
      LabeledDataset out;
      out.name = ds.name + "/augmented";
      for (const Tweet& t : ds.tweets) {
        out.tweets.push_back(claimrank::contextual_substitute(t, *scorer, cfg));
      }
      write_output(out, output, /*with_origin=*/true);
    } else if (*balance) {
      const LabeledDataset ds = read_input(input, format);
      const claimrank::AugmentConfig cfg =
          make_augment_config(p, mode, selection, top_k, resolve_seed(seed_flag));
      const auto scorer = make_scorer(scorer_cmd, timeout_ms, lowercase, ds);
      auto [balanced, report] = claimrank::balance_classes(
          ds,
          [&](const Tweet& t, std::size_t epoch) {
            return claimrank::contextual_substitute(t, *scorer, cfg, epoch);
          },
          strict_exceed);
      nlohmann::ordered_json j;
      j["epochs_run"] = report.epochs_run;
      j["augmented_generated"] = report.augmented_generated;
      j["final_positive"] = report.final_positive;
      j["final_negative"] = report.final_negative;
      if (report_path.empty()) {
        std::cerr << j.dump(2) << '\n';
      } else {
        std::ofstream rep(report_path, std::ios::binary);
        if (!rep) throw claimrank::IoError("cannot write '" + report_path + "'");
        rep << j.dump(2) << '\n';
      }
      write_output(balanced, output, /*with_origin=*/true);
    } else if (*train_cmd) {
      const LabeledDataset ds = read_input(input, format);
      claimrank::TrainConfig cfg =
          claimrank::TrainConfig::for_profile(claimrank::parse_profile(profile));
      cfg.seed = resolve_seed(seed_flag);
      if (epochs) cfg.epochs = *epochs;
      if (batch_size) cfg.batch_size = *batch_size;
      if (learning_rate) cfg.learning_rate = *learning_rate;
      const claimrank::TrainResult result = claimrank::train(ds, cfg);
      claimrank::save_model(result.model, cfg, model_path);
      nlohmann::ordered_json j;
      j["model"] = model_path;
      j["seed"] = cfg.seed;
      j["initial_loss"] = result.initial_loss;
      j["epoch_losses"] = result.epoch_losses;
      std::cout << j.dump(2) << '\n';
    } else if (*rank) {
      const LabeledDataset ds = read_input(input, format);
      if (model_path.empty() == scores_path.empty()) {
        throw claimrank::ConfigError("rank needs exactly one of --model or --scores");
      }
      std::vector<claimrank::LogitRow> rows;
      rows.reserve(ds.tweets.size());
      if (!model_path.empty()) {
        const claimrank::LinearModel model = claimrank::load_model(model_path);
        for (const Tweet& t : ds.tweets) {
          const auto [neg, pos] = claimrank::predict_logits(model, t.text);
          rows.push_back({t.topic_id, t.tweet_id, neg, pos});
        }
      } else {
        const auto scores = claimrank::load_external_scores(scores_path, ds);
        for (std::size_t i = 0; i < ds.tweets.size(); ++i) {
          rows.push_back({ds.tweets[i].topic_id, ds.tweets[i].tweet_id, scores[i].first,
                          scores[i].second});
        }
      }
      const claimrank::RankedRun run = claimrank::score_and_rank(rows, run_id);
      if (output.empty() || output == "-") {
        claimrank::write_run(run, std::cout);
      } else {
        claimrank::write_run(run, output);
      }
    } else if (*eval) {
      const claimrank::RankedRun run = claimrank::read_run(run_path);
      const LabeledDataset gold = read_input(gold_path, format);
      const std::vector<std::size_t> k_list =
          k_list_csv.empty() ? claimrank::default_k_list()
                             : parse_int_csv<std::size_t>(k_list_csv, "k");
      const claimrank::MetricReport report =
          claimrank::evaluate(run, gold, k_list, skip_empty_topics);
      std::cout << claimrank::metric_report_json(report).dump(2) << '\n';
    } else if (*sweep) {
      claimrank::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = claimrank::load_experiment_config(config_path);
      if (!input.empty()) cfg.dataset_path = input;
      if (sweep->count("--format")) cfg.format = claimrank::parse_format(format);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (train_fraction) cfg.train_fraction = *train_fraction;
      if (!p_values_csv.empty()) cfg.p_values = parse_p_values_csv(p_values_csv);
      if (!arms_csv.empty()) cfg.arms = parse_string_csv(arms_csv);
      if (sweep->count("--profile")) cfg.profile = claimrank::parse_profile(profile);
      if (!seeds_csv.empty()) cfg.seeds = parse_int_csv<std::uint64_t>(seeds_csv, "seed");
      if (seed_flag && seeds_csv.empty()) {
        cfg.seeds.clear();
        for (std::uint64_t i = 0; i < 5; ++i) cfg.seeds.push_back(*seed_flag + i);
      }
      if (sweep->count("--mode")) {
        cfg.mode = mode == "insert" ? claimrank::AugmentMode::insert
                                    : claimrank::AugmentMode::substitute;
      }
      if (sweep->count("--selection")) {
        cfg.selection = selection == "argmax" ? claimrank::Selection::argmax
                                              : claimrank::Selection::sample_top_k;
      }
      if (sweep->count("--top-k")) cfg.top_k = top_k;
      if (!k_list_csv.empty()) cfg.k_list = parse_int_csv<std::size_t>(k_list_csv, "k");
      if (workers) cfg.workers = *workers;
      if (sweep->count("--run-id")) cfg.run_id = run_id;
      if (!translate_endpoint.empty()) cfg.translate_endpoint = translate_endpoint;
      if (sweep->count("--pivot")) cfg.pivot = pivot;
      if (strict_exceed) cfg.strict_exceed = true;
      if (lowercase) cfg.lowercase = true;
      if (skip_empty_topics) cfg.skip_empty_topics = true;
      cfg.apply_default_seeds();
      const claimrank::SweepReport report = claimrank::run_experiment(cfg);
      claimrank::write_report_files(report, cfg.output_dir);
      std::cerr << "sweep complete: " << report.cells.size() << " cells under "
                << cfg.output_dir << '\n';
    }
  } catch (const claimrank::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
