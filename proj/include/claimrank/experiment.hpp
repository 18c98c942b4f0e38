#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "claimrank/augment.hpp"
#include "claimrank/classifier.hpp"
#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"
#include "claimrank/lm_scorer.hpp"
#include "claimrank/rank_eval.hpp"
#include "claimrank/rng.hpp"
#include "claimrank/translate.hpp"

namespace claimrank {

inline std::uint64_t default_seed_head() {
  if (const char* env = std::getenv("CLAIMRANK_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("CLAIMRANK_SEED is not an integer");
    }
  }
  return 42;
}

struct ExperimentConfig {
  std::string dataset_path;
  TsvFormat format = TsvFormat::canonical;
  double train_fraction = 0.8;
  std::vector<std::optional<double>> p_values = {std::nullopt, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> arms = {"contextual"};
  Profile profile = Profile::baseline_linear;
  std::vector<std::uint64_t> seeds;  // empty → 5 consecutive from the default head
  std::string output_dir;
  AugmentMode mode = AugmentMode::substitute;
  Selection selection = Selection::sample_top_k;
  std::size_t top_k = 10;
  bool strict_exceed = false;
  bool lowercase = false;
  bool skip_empty_topics = false;
  std::vector<std::size_t> k_list = default_k_list();
  std::size_t workers = 1;
  std::string run_id = "claimrank";
  std::string translate_endpoint;  // empty → word-reversing mock
  std::string pivot = "en";

  void apply_default_seeds() {
    if (!seeds.empty()) return;
    const std::uint64_t head = default_seed_head();
    for (std::uint64_t i = 0; i < 5; ++i) seeds.push_back(head + i);
  }

  void validate() const {
    if (dataset_path.empty()) throw ConfigError("dataset_path is required");
    if (output_dir.empty()) throw ConfigError("output_dir is required");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw ConfigError("train_fraction must lie strictly between 0 and 1");
    }
    if (p_values.empty()) throw ConfigError("p_values must be non-empty");
    std::size_t nulls = 0;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
      if (!p_values[i]) {
        ++nulls;
        continue;
      }
      if (!(*p_values[i] >= 0.0 && *p_values[i] <= 1.0)) {
        throw ConfigError("p values must lie in [0, 1]");
      }
      for (std::size_t j = i + 1; j < p_values.size(); ++j) {
        if (p_values[j] && *p_values[j] == *p_values[i]) {
          throw ConfigError("duplicate p value");
        }
      }
    }
    if (nulls > 1) throw ConfigError("p_values may contain null at most once");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      if (arms[i] != "contextual" && arms[i] != "backtranslate" && arms[i] != "eda") {
        throw ConfigError("unknown arm '" + arms[i] + "'");
      }
      for (std::size_t j = i + 1; j < arms.size(); ++j) {
        if (arms[i] == arms[j]) throw ConfigError("duplicate arm '" + arms[i] + "'");
      }
    }
    if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (k_list.empty()) throw ConfigError("k_list must be non-empty");
    for (std::size_t k : k_list) {
      if (k < 1) throw ConfigError("k_list entries must be >= 1");
    }
    if (top_k < 1) throw InvalidTopKError("top_k must be at least 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (run_id.empty()) throw ConfigError("run_id must be non-empty");
  }
};

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "dataset_path") {
        cfg.dataset_path = value.get<std::string>();
      } else if (key == "format") {
        cfg.format = parse_format(value.get<std::string>());
      } else if (key == "train_fraction") {
        cfg.train_fraction = value.get<double>();
      } else if (key == "p_values") {
        cfg.p_values.clear();
        if (!value.is_array()) throw ConfigError("p_values must be an array");
        for (const nlohmann::json& p : value) {
          if (p.is_null()) {
            cfg.p_values.push_back(std::nullopt);
          } else if (p.is_number()) {
            cfg.p_values.push_back(p.get<double>());
          } else {
            throw ConfigError("p_values entries must be numbers or null");
          }
        }
      } else if (key == "arms") {
        cfg.arms = value.get<std::vector<std::string>>();
      } else if (key == "profile") {
        cfg.profile = parse_profile(value.get<std::string>());
      } else if (key == "seeds") {
        cfg.seeds = value.get<std::vector<std::uint64_t>>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "substitute") {
          cfg.mode = AugmentMode::substitute;
        } else if (mode == "insert") {
          cfg.mode = AugmentMode::insert;
        } else {
          throw ConfigError("unknown mode '" + mode + "'");
        }
      } else if (key == "selection") {
        const std::string sel = value.get<std::string>();
        if (sel == "argmax") {
          cfg.selection = Selection::argmax;
        } else if (sel == "sample_top_k") {
          cfg.selection = Selection::sample_top_k;
        } else {
          throw ConfigError("unknown selection '" + sel + "'");
        }
      } else if (key == "top_k") {
        cfg.top_k = value.get<std::size_t>();
      } else if (key == "strict_exceed") {
        cfg.strict_exceed = value.get<bool>();
      } else if (key == "lowercase") {
        cfg.lowercase = value.get<bool>();
      } else if (key == "skip_empty_topics") {
        cfg.skip_empty_topics = value.get<bool>();
      } else if (key == "k_list") {
        cfg.k_list = value.get<std::vector<std::size_t>>();
      } else if (key == "workers") {
        cfg.workers = value.get<std::size_t>();
      } else if (key == "run_id") {
        cfg.run_id = value.get<std::string>();
      } else if (key == "translate_endpoint") {
        cfg.translate_endpoint = value.get<std::string>();
      } else if (key == "pivot") {
        cfg.pivot = value.get<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  cfg.apply_default_seeds();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  return parse_experiment_config(j);
}

inline std::string format_p(const std::optional<double>& p) {
  if (!p) return "null";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", *p);
  return buf;
}

struct CellResult {
  std::string arm;
  std::optional<double> p;
  std::uint64_t seed = 0;
  std::string dir;  // relative to output_dir
  MetricReport metrics;
  BalanceReport balance;
  std::int64_t wall_ms = 0;
};

struct MedianRow {
  std::string arm;
  std::optional<double> p;
  MetricReport median;
};

struct SampleRow {
  std::string dataset;
  std::size_t n_train_samples = 0;
  double map = 0.0;
};

struct SweepReport {
  std::vector<CellResult> cells;
  std::vector<MedianRow> medians;
  std::vector<SampleRow> samples_vs_score;
};

namespace detail {

struct CellSpec {
  std::string arm;  // "null", "contextual", "eda", "backtranslate"
  std::optional<double> p;
  std::uint64_t seed = 0;

  std::string dir_name() const {
    return arm + "_p" + format_p(p) + "_s" + std::to_string(seed);
  }
};

inline std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::optional<double>>> groups;
  for (const std::optional<double>& p : cfg.p_values) {
    if (!p) groups.emplace_back("null", std::nullopt);
  }
  for (const std::string& arm : cfg.arms) {
    if (arm == "backtranslate") {
      groups.emplace_back(arm, std::nullopt);
      continue;
    }
    for (const std::optional<double>& p : cfg.p_values) {
      if (p) groups.emplace_back(arm, p);
    }
  }
  if (groups.empty()) {
    throw ConfigError("config yields no cells (no null p and no usable arm/p pairs)");
  }
  std::vector<CellSpec> cells;
  for (const auto& [arm, p] : groups) {
    for (std::uint64_t seed : cfg.seeds) cells.push_back({arm, p, seed});
  }
  return cells;
}

// Canonical config serialization used for both the manifest echo and the
// config hash. output_dir and workers are deliberately excluded so reruns
// in other directories (or at other parallelism) compare byte-identical.
inline nlohmann::ordered_json canonical_config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset_path"] = cfg.dataset_path;
  j["format"] = cfg.format == TsvFormat::canonical ? "canonical" : "checkthat";
  j["train_fraction"] = cfg.train_fraction;
  nlohmann::ordered_json ps = nlohmann::ordered_json::array();
  for (const std::optional<double>& p : cfg.p_values) {
    if (p) {
      ps.push_back(*p);
    } else {
      ps.push_back(nullptr);
    }
  }
  j["p_values"] = std::move(ps);
  j["arms"] = cfg.arms;
  j["profile"] = std::string(profile_name(cfg.profile));
  j["seeds"] = cfg.seeds;
  j["mode"] = cfg.mode == AugmentMode::substitute ? "substitute" : "insert";
  j["selection"] = cfg.selection == Selection::argmax ? "argmax" : "sample_top_k";
  j["top_k"] = cfg.top_k;
  j["strict_exceed"] = cfg.strict_exceed;
  j["lowercase"] = cfg.lowercase;
  j["skip_empty_topics"] = cfg.skip_empty_topics;
  j["k_list"] = cfg.k_list;
  j["run_id"] = cfg.run_id;
  j["translate_endpoint"] = cfg.translate_endpoint;
  j["pivot"] = cfg.pivot;
  return j;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_json(cfg).dump())));
  return buf;
}

inline nlohmann::ordered_json balance_report_json(const BalanceReport& r) {
  nlohmann::ordered_json j;
  j["epochs_run"] = r.epochs_run;
  j["augmented_generated"] = r.augmented_generated;
  j["final_positive"] = r.final_positive;
  j["final_negative"] = r.final_negative;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<std::string> train_word_pool(const LabeledDataset& ds) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> pool;
  for (const Tweet& t : ds.tweets) {
    for (const TokenSpan& span : whitespace_spans(t.text)) {
      std::string w(span.view(t.text));
      if (seen.insert(w).second) pool.push_back(std::move(w));
    }
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline CellResult run_cell(const ExperimentConfig& cfg, const LabeledDataset& dataset,
                           const CellSpec& spec) {
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path cell_dir =
      std::filesystem::path(cfg.output_dir) / "cells" / spec.dir_name();

  auto [train_split, holdout] = stratified_split(dataset, cfg.train_fraction, spec.seed);
  write_dataset(train_split, (cell_dir / "split_train.tsv").string(), /*with_origin=*/true);
  write_dataset(holdout, (cell_dir / "split_holdout.tsv").string(), /*with_origin=*/true);

  LabeledDataset train_aug;
  BalanceReport balance;
  if (spec.arm == "null") {
    train_aug = train_split;
    for (const Tweet& t : train_split.tweets) {
      (t.label == 1 ? balance.final_positive : balance.final_negative) += 1;
    }
  } else {
    Augmenter augmenter;
    std::optional<NGramScorer> scorer;
    std::vector<std::string> word_pool;
    if (spec.arm == "contextual") {
      std::vector<std::string> sentences;
      sentences.reserve(train_split.tweets.size());
      for (const Tweet& t : train_split.tweets) sentences.push_back(t.text);
      NGramScorer::Params params;
      params.lowercase = cfg.lowercase;
      scorer.emplace(sentences, params);
      AugmentConfig acfg;
      acfg.p = *spec.p;
      acfg.mode = cfg.mode;
      acfg.selection = cfg.selection;
      acfg.top_k = cfg.top_k;
      acfg.seed = spec.seed;
      augmenter = [&scorer, acfg](const Tweet& t, std::size_t epoch) {
        return contextual_substitute(t, *scorer, acfg, epoch);
      };
    } else if (spec.arm == "eda") {
      word_pool = train_word_pool(train_split);
      const double p = *spec.p;
      const std::uint64_t seed = spec.seed;
      augmenter = [p, seed, &word_pool](const Tweet& t, std::size_t epoch) {
        static constexpr EdaOp kOps[] = {EdaOp::random_insert, EdaOp::random_delete,
                                         EdaOp::random_swap};
        Rng op_rng(fnv1a64("eda-op", record_seed(seed, t.tweet_id, epoch)));
        const EdaOp op = kOps[op_rng.next_below(3)];
        return eda_op(t, op, p, seed, epoch, nullptr, &word_pool);
      };
    } else {  // backtranslate
      const TranslateFn translate = cfg.translate_endpoint.empty()
                                        ? word_reversing_translator()
                                        : http_translator(cfg.translate_endpoint);
      const std::string pivot = cfg.pivot;
      augmenter = [translate, pivot](const Tweet& t, std::size_t epoch) {
        Tweet out = back_translate(t, translate, pivot);
        out.tweet_id += std::to_string(epoch);
        return out;
      };
    }
    auto balanced = balance_classes(train_split, augmenter, cfg.strict_exceed);
    train_aug = std::move(balanced.first);
    balance = balanced.second;
  }

  // Leakage guard: nothing generated during balancing may shadow a holdout id.
  {
    std::unordered_set<std::string> holdout_ids;
    for (const Tweet& t : holdout.tweets) holdout_ids.insert(t.tweet_id);
    for (std::size_t i = train_split.tweets.size(); i < train_aug.tweets.size(); ++i) {
      if (holdout_ids.count(train_aug.tweets[i].tweet_id)) {
        throw Error("augmented id leaked into holdout: " + train_aug.tweets[i].tweet_id);
      }
    }
  }
  write_dataset(train_aug, (cell_dir / "train_augmented.tsv").string(), /*with_origin=*/true);
  write_text_file(cell_dir / "balance.json", balance_report_json(balance).dump(2) + "\n");

  TrainConfig tcfg = TrainConfig::for_profile(cfg.profile);
  tcfg.seed = spec.seed;
  const TrainResult trained = train(train_aug, tcfg);
  save_model(trained.model, tcfg, (cell_dir / "model.json").string());

  std::vector<LogitRow> rows;
  rows.reserve(holdout.tweets.size());
  for (const Tweet& t : holdout.tweets) {
    const auto [neg, pos] = predict_logits(trained.model, t.text);
    rows.push_back({t.topic_id, t.tweet_id, neg, pos});
  }
  const RankedRun run = score_and_rank(rows, cfg.run_id + "." + spec.dir_name());
  write_run(run, (cell_dir / "run.tsv").string());

  const MetricReport metrics = evaluate(run, holdout, cfg.k_list, cfg.skip_empty_topics);
  write_text_file(cell_dir / "metrics.json", metric_report_json(metrics).dump(2) + "\n");

  CellResult result;
  result.arm = spec.arm;
  result.p = spec.p;
  result.seed = spec.seed;
  result.dir = "cells/" + spec.dir_name();
  result.metrics = metrics;
  result.balance = balance;
  result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return result;
}

inline double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline MetricReport median_report(const std::vector<const MetricReport*>& reports) {
  MetricReport median;
  auto collect = [&](auto getter) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const MetricReport* r : reports) values.push_back(getter(*r));
    return median_of(std::move(values));
  };
  median.map = collect([](const MetricReport& r) { return r.map; });
  median.mrr = collect([](const MetricReport& r) { return r.mrr; });
  median.r_precision = collect([](const MetricReport& r) { return r.r_precision; });
  for (std::size_t i = 0; i < reports.front()->p_at_k.size(); ++i) {
    median.p_at_k.emplace_back(
        reports.front()->p_at_k[i].first,
        collect([i](const MetricReport& r) { return r.p_at_k[i].second; }));
  }
  median.cw_precision = collect([](const MetricReport& r) { return r.cw_precision; });
  median.cw_recall = collect([](const MetricReport& r) { return r.cw_recall; });
  median.cw_f1 = collect([](const MetricReport& r) { return r.cw_f1; });
  return median;
}

}  // namespace detail

// Runs the full sweep: every (arm, p, seed) cell gets its own directory of
// artifacts, and the manifest ties them together with aggregated medians.
inline SweepReport run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.apply_default_seeds();
  cfg.validate();
  const LabeledDataset dataset = parse_dataset(cfg.dataset_path, cfg.format);
  if (dataset.empty()) throw EmptyCorpusError("dataset '" + cfg.dataset_path + "' is empty");

  const std::vector<detail::CellSpec> cells = detail::enumerate_cells(cfg);
  for (const detail::CellSpec& spec : cells) {
    std::filesystem::create_directories(std::filesystem::path(cfg.output_dir) / "cells" /
                                        spec.dir_name());
  }

  const auto sweep_started = std::chrono::steady_clock::now();
  std::vector<std::optional<CellResult>> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        try {
          results[i] = detail::run_cell(cfg, dataset, cells[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const std::size_t n_workers = std::min(cfg.workers, cells.size());
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      threads.reserve(n_workers);
      for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error("cell " + cells[i].dir_name() + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error("cell " + cells[i].dir_name() + ": " + e.what());
    }
  }

  SweepReport report;
  for (std::optional<CellResult>& r : results) report.cells.push_back(std::move(*r));

  // Medians per (arm, p) group, in first-appearance cell order.
  for (const CellResult& cell : report.cells) {
    const bool known = std::any_of(report.medians.begin(), report.medians.end(),
                                   [&](const MedianRow& m) {
                                     return m.arm == cell.arm && m.p == cell.p;
                                   });
    if (known) continue;
    std::vector<const MetricReport*> group;
    for (const CellResult& other : report.cells) {
      if (other.arm == cell.arm && other.p == cell.p) group.push_back(&other.metrics);
    }
    report.medians.push_back({cell.arm, cell.p, detail::median_report(group)});
  }

  // Headline point for the sample-count table: the contextual p=0.1 median
  // when present, else the null arm, else the first group.
  {
    const MedianRow* headline = nullptr;
    for (const MedianRow& m : report.medians) {
      if (m.arm == "contextual" && m.p && *m.p == 0.1) headline = &m;
    }
    if (!headline) {
      for (const MedianRow& m : report.medians) {
        if (m.arm == "null") headline = &m;
      }
    }
    if (!headline) headline = &report.medians.front();
    report.samples_vs_score.push_back({dataset.name, dataset.size(), headline->median.map});
  }

  nlohmann::ordered_json manifest;
  manifest["config_hash"] = detail::config_hash(cfg);
  manifest["config"] = detail::canonical_config_json(cfg);
  nlohmann::ordered_json cell_entries = nlohmann::ordered_json::array();
  for (const CellResult& cell : report.cells) {
    nlohmann::ordered_json entry;
    entry["arm"] = cell.arm;
    if (cell.p) {
      entry["p"] = *cell.p;
    } else {
      entry["p"] = nullptr;
    }
    entry["seed"] = cell.seed;
    entry["dir"] = cell.dir;
    entry["balance"] = detail::balance_report_json(cell.balance);
    entry["metrics"] = metric_report_json(cell.metrics);
    cell_entries.push_back(std::move(entry));
  }
  manifest["cells"] = std::move(cell_entries);
  nlohmann::ordered_json medians = nlohmann::ordered_json::array();
  for (const MedianRow& m : report.medians) {
    nlohmann::ordered_json entry;
    entry["arm"] = m.arm;
    if (m.p) {
      entry["p"] = *m.p;
    } else {
      entry["p"] = nullptr;
    }
    entry["metrics"] = metric_report_json(m.median);
    medians.push_back(std::move(entry));
  }
  manifest["medians"] = std::move(medians);
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const SampleRow& s : report.samples_vs_score) {
    nlohmann::ordered_json entry;
    entry["dataset"] = s.dataset;
    entry["n_train_samples"] = s.n_train_samples;
    entry["map"] = s.map;
    samples.push_back(std::move(entry));
  }
  manifest["samples_vs_score"] = std::move(samples);
  nlohmann::ordered_json timings;
  nlohmann::ordered_json cell_timings;
  for (const CellResult& cell : report.cells) cell_timings[cell.dir] = cell.wall_ms;
  timings["cells"] = std::move(cell_timings);
  timings["total_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - sweep_started)
                            .count();
  manifest["timings"] = std::move(timings);
  detail::write_text_file(std::filesystem::path(cfg.output_dir) / "manifest.json",
                          manifest.dump(2) + "\n");
  return report;
}

namespace detail {

inline int arm_rank(const std::string& arm) {
  if (arm == "null") return 0;
  if (arm == "contextual") return 1;
  if (arm == "eda") return 2;
  return 3;  // backtranslate
}

inline std::string median_column_label(const MedianRow& m) {
  if (m.arm == "null") return "p=null";
  if (m.arm == "backtranslate") return "translation";
  return m.arm + " p=" + format_p(m.p);
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

// Deterministic rendering of a sweep: the long per-cell table, the Table-3
// style medians grid (rows cw_precision/recall/f1, columns per arm/p), and
// the sample-count table sorted by map ascending.
inline std::string render_report(const SweepReport& report, const std::string& format) {
  if (format != "tsv" && format != "markdown") {
    throw ConfigError("unknown report format '" + format + "'");
  }
  const bool md = format == "markdown";
  if (report.cells.empty()) throw ConfigError("cannot render an empty report");

  std::vector<const MedianRow*> grid;
  for (const MedianRow& m : report.medians) grid.push_back(&m);
  std::sort(grid.begin(), grid.end(), [](const MedianRow* a, const MedianRow* b) {
    const int ra = detail::arm_rank(a->arm);
    const int rb = detail::arm_rank(b->arm);
    if (ra != rb) return ra < rb;
    return a->p.value_or(-1.0) < b->p.value_or(-1.0);
  });

  std::vector<SampleRow> samples = report.samples_vs_score;
  std::sort(samples.begin(), samples.end(), [](const SampleRow& a, const SampleRow& b) {
    if (a.map != b.map) return a.map < b.map;
    return a.dataset < b.dataset;
  });

  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& fields) {
    if (md) {
      out << '|';
      for (const std::string& f : fields) out << ' ' << f << " |";
      out << '\n';
    } else {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << '\t';
        out << fields[i];
      }
      out << '\n';
    }
  };
  auto emit_rule = [&](std::size_t n) {
    if (!md) return;
    out << '|';
    for (std::size_t i = 0; i < n; ++i) out << " --- |";
    out << '\n';
  };

  // Per-cell results.
  out << (md ? "## Cells\n\n" : "# cells\n");
  std::vector<std::string> header = {"arm", "p", "seed", "map", "mrr", "r_precision"};
  for (const auto& [k, value] : report.cells.front().metrics.p_at_k) {
    header.push_back("p_at_" + std::to_string(k));
  }
  header.insert(header.end(), {"cw_precision", "cw_recall", "cw_f1"});
  emit_row(header);
  emit_rule(header.size());
  for (const CellResult& cell : report.cells) {
    std::vector<std::string> row = {cell.arm, format_p(cell.p), std::to_string(cell.seed),
                                    detail::fixed6(cell.metrics.map),
                                    detail::fixed6(cell.metrics.mrr),
                                    detail::fixed6(cell.metrics.r_precision)};
    for (const auto& [k, value] : cell.metrics.p_at_k) row.push_back(detail::fixed6(value));
    row.push_back(detail::fixed6(cell.metrics.cw_precision));
    row.push_back(detail::fixed6(cell.metrics.cw_recall));
    row.push_back(detail::fixed6(cell.metrics.cw_f1));
    emit_row(row);
  }
  out << '\n';

  // Medians grid.
  out << (md ? "## Medians over seeds\n\n" : "# medians\n");
  std::vector<std::string> grid_header = {"metric"};
  for (const MedianRow* m : grid) grid_header.push_back(detail::median_column_label(*m));
  emit_row(grid_header);
  emit_rule(grid_header.size());
  const std::pair<const char*, double MetricReport::*> grid_rows[] = {
      {"cw_precision", &MetricReport::cw_precision},
      {"cw_recall", &MetricReport::cw_recall},
      {"cw_f1", &MetricReport::cw_f1},
  };
  for (const auto& [label, member] : grid_rows) {
    std::vector<std::string> row = {label};
    for (const MedianRow* m : grid) row.push_back(detail::fixed4(m->median.*member));
    emit_row(row);
  }
  out << '\n';

  // Training-set size vs headline score.
  out << (md ? "## Samples vs score\n\n" : "# samples_vs_score\n");
  emit_row({"dataset", "n_train_samples", "map"});
  emit_rule(3);
  for (const SampleRow& s : samples) {
    emit_row({s.dataset, std::to_string(s.n_train_samples), detail::fixed6(s.map)});
  }
  return out.str();
}

inline void write_report_files(const SweepReport& report, const std::string& output_dir) {
  detail::write_text_file(std::filesystem::path(output_dir) / "report.tsv",
                          render_report(report, "tsv"));
  detail::write_text_file(std::filesystem::path(output_dir) / "report.md",
                          render_report(report, "markdown"));
}

}  // namespace claimrank
