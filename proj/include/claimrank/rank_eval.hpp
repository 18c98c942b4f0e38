#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"

namespace claimrank {

// Numerically safe two-class softmax (max-shifted).
inline std::pair<double, double> softmax2(double logit_neg, double logit_pos) {
  const double m = std::max(logit_neg, logit_pos);
  const double e_neg = std::exp(logit_neg - m);
  const double e_pos = std::exp(logit_pos - m);
  const double total = e_neg + e_pos;
  return {e_neg / total, e_pos / total};
}

struct LogitRow {
  std::string topic_id;
  std::string tweet_id;
  double logit_neg = 0.0;
  double logit_pos = 0.0;
};

struct RunEntry {
  std::string topic_id;
  std::string tweet_id;
  double score = 0.0;
  std::size_t rank = 0;
};

struct RankedRun {
  std::string run_id;
  std::vector<RunEntry> entries;  // grouped by topic, rank ascending
};

// score = p_pos − p_neg ∈ [−1, 1]; positive iff p_pos > 0.5. Topics keep
// their first-appearance order; ties keep input order (stable sort).
inline RankedRun score_and_rank(const std::vector<LogitRow>& rows, const std::string& run_id) {
  std::vector<std::string> topic_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_topic;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i].logit_neg) || !std::isfinite(rows[i].logit_pos)) {
      throw Error("non-finite logit for tweet_id " + rows[i].tweet_id);
    }
    auto [it, inserted] = by_topic.try_emplace(rows[i].topic_id);
    if (inserted) topic_order.push_back(rows[i].topic_id);
    it->second.push_back(i);
  }

  RankedRun run;
  run.run_id = run_id;
  run.entries.reserve(rows.size());
  for (const std::string& topic : topic_order) {
    std::vector<std::size_t>& indices = by_topic[topic];
    std::vector<double> scores(rows.size());
    for (std::size_t i : indices) {
      const auto [p_neg, p_pos] = softmax2(rows[i].logit_neg, rows[i].logit_pos);
      scores[i] = p_pos - p_neg;
    }
    std::stable_sort(indices.begin(), indices.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t r = 0; r < indices.size(); ++r) {
      run.entries.push_back({topic, rows[indices[r]].tweet_id, scores[indices[r]], r + 1});
    }
  }
  return run;
}

// Mean over relevant items of precision at their rank; 0 with no relevant.
inline double average_precision(const std::vector<int>& relevance) {
  double sum = 0.0;
  std::size_t relevant_seen = 0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i]) {
      ++relevant_seen;
      sum += static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
    }
  }
  return relevant_seen == 0 ? 0.0 : sum / static_cast<double>(relevant_seen);
}

struct MetricReport {
  double map = 0.0;
  double mrr = 0.0;
  double r_precision = 0.0;
  std::vector<std::pair<std::size_t, double>> p_at_k;  // (k, value), k ascending
  double cw_precision = 0.0;
  double cw_recall = 0.0;
  double cw_f1 = 0.0;
};

inline const std::vector<std::size_t>& default_k_list() {
  static const std::vector<std::size_t> k_list = {1, 3, 5, 10, 20, 30};
  return k_list;
}

// Ranked-retrieval metrics averaged over topics, plus pooled positive-class
// precision/recall/F1 at the score > 0 threshold. Run and gold must cover
// exactly the same ids with agreeing topics.
inline MetricReport evaluate(const RankedRun& run, const LabeledDataset& gold,
                             const std::vector<std::size_t>& k_list = default_k_list(),
                             bool skip_empty_topics = false) {
  struct GoldRow {
    std::string topic_id;
    int label;
  };
  std::unordered_map<std::string, GoldRow> gold_by_id;
  for (const Tweet& t : gold.tweets) gold_by_id.emplace(t.tweet_id, GoldRow{t.topic_id, t.label});

  std::vector<std::string> offenders;
  std::unordered_set<std::string> seen;
  for (const RunEntry& e : run.entries) {
    if (!seen.insert(e.tweet_id).second) {
      offenders.push_back(e.tweet_id + " (duplicate in run)");
      continue;
    }
    auto it = gold_by_id.find(e.tweet_id);
    if (it == gold_by_id.end()) {
      offenders.push_back(e.tweet_id + " (not in gold)");
    } else if (it->second.topic_id != e.topic_id) {
      offenders.push_back(e.tweet_id + " (topic mismatch)");
    }
  }
  for (const Tweet& t : gold.tweets) {
    if (!seen.count(t.tweet_id)) offenders.push_back(t.tweet_id + " (missing from run)");
  }
  if (!offenders.empty()) {
    std::sort(offenders.begin(), offenders.end());
    std::string joined;
    for (const std::string& o : offenders) {
      if (!joined.empty()) joined += ", ";
      joined += o;
    }
    throw IdMismatchError("id mismatch: " + joined);
  }

  // Per-topic relevance lists in rank order.
  std::vector<std::string> topic_order;
  std::unordered_map<std::string, std::vector<const RunEntry*>> by_topic;
  for (const RunEntry& e : run.entries) {
    auto [it, inserted] = by_topic.try_emplace(e.topic_id);
    if (inserted) topic_order.push_back(e.topic_id);
    it->second.push_back(&e);
  }

  MetricReport report;
  for (std::size_t k : k_list) report.p_at_k.emplace_back(k, 0.0);
  std::size_t topics_counted = 0;
  std::size_t tp = 0, fp = 0, fn = 0;

  for (const std::string& topic : topic_order) {
    std::vector<const RunEntry*>& entries = by_topic[topic];
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    std::vector<int> relevance;
    relevance.reserve(entries.size());
    for (const RunEntry* e : entries) {
      const GoldRow& g = gold_by_id.at(e->tweet_id);
      relevance.push_back(g.label);
      const bool predicted = e->score > 0.0;
      if (predicted && g.label == 1) ++tp;
      if (predicted && g.label == 0) ++fp;
      if (!predicted && g.label == 1) ++fn;
    }
    const std::size_t r_total =
        static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), 1));
    if (r_total == 0 && skip_empty_topics) continue;
    ++topics_counted;

    report.map += average_precision(relevance);
    for (std::size_t i = 0; i < relevance.size(); ++i) {
      if (relevance[i]) {
        report.mrr += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
    if (r_total > 0) {
      std::size_t in_top_r = 0;
      for (std::size_t i = 0; i < std::min(r_total, relevance.size()); ++i) {
        in_top_r += relevance[i] == 1;
      }
      report.r_precision += static_cast<double>(in_top_r) / static_cast<double>(r_total);
    }
    for (auto& [k, value] : report.p_at_k) {
      std::size_t in_top_k = 0;
      for (std::size_t i = 0; i < std::min(k, relevance.size()); ++i) {
        in_top_k += relevance[i] == 1;
      }
      value += static_cast<double>(in_top_k) / static_cast<double>(k);
    }
  }

  if (topics_counted > 0) {
    const double n = static_cast<double>(topics_counted);
    report.map /= n;
    report.mrr /= n;
    report.r_precision /= n;
    for (auto& [k, value] : report.p_at_k) value /= n;
  }
  report.cw_precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  report.cw_recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  report.cw_f1 = report.cw_precision + report.cw_recall == 0.0
                     ? 0.0
                     : 2.0 * report.cw_precision * report.cw_recall /
                           (report.cw_precision + report.cw_recall);
  return report;
}

inline std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return buf;
}

inline void write_run(const RankedRun& run, std::ostream& out) {
  for (const RunEntry& e : run.entries) {
    out << e.topic_id << '\t' << e.tweet_id << '\t' << format_score(e.score) << '\t' << e.rank
        << '\t' << run.run_id << '\n';
  }
}

inline void write_run(const RankedRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_run(run, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline RankedRun read_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  RankedRun run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cols = detail::split_tabs(line);
    if (cols.size() != 5) throw ParseError(line_no, "column count");
    RunEntry e;
    e.topic_id = cols[0];
    e.tweet_id = cols[1];
    {
      const auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(),
                                             e.score);
      if (ec != std::errc() || ptr != cols[2].data() + cols[2].size() || !std::isfinite(e.score)) {
        throw ParseError(line_no, "non-numeric score");
      }
    }
    {
      const auto [ptr, ec] =
          std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), e.rank);
      if (ec != std::errc() || ptr != cols[3].data() + cols[3].size() || e.rank == 0) {
        throw ParseError(line_no, "bad rank");
      }
    }
    if (run.entries.empty()) {
      run.run_id = cols[4];
    } else if (cols[4] != run.run_id) {
      throw ParseError(line_no, "inconsistent run_id");
    }
    run.entries.push_back(std::move(e));
  }
  return run;
}

inline nlohmann::ordered_json metric_report_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["map"] = report.map;
  j["mrr"] = report.mrr;
  j["r_precision"] = report.r_precision;
  for (const auto& [k, value] : report.p_at_k) {
    j["p_at_" + std::to_string(k)] = value;
  }
  j["cw_precision"] = report.cw_precision;
  j["cw_recall"] = report.cw_recall;
  j["cw_f1"] = report.cw_f1;
  return j;
}

inline MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport report;
  report.map = j.at("map").get<double>();
  report.mrr = j.at("mrr").get<double>();
  report.r_precision = j.at("r_precision").get<double>();
  for (const auto& [key, value] : j.items()) {
    if (key.rfind("p_at_", 0) == 0) {
      report.p_at_k.emplace_back(std::stoul(key.substr(5)), value.get<double>());
    }
  }
  std::sort(report.p_at_k.begin(), report.p_at_k.end());
  report.cw_precision = j.at("cw_precision").get<double>();
  report.cw_recall = j.at("cw_recall").get<double>();
  report.cw_f1 = j.at("cw_f1").get<double>();
  return report;
}

}  // namespace claimrank
