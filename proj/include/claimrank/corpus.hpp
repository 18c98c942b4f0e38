#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "claimrank/errors.hpp"
#include "claimrank/rng.hpp"
#include "claimrank/text.hpp"

namespace claimrank {

enum class Origin { original, augmented, backtranslated };

inline std::string_view origin_name(Origin o) {
  switch (o) {
    case Origin::original:
      return "original";
    case Origin::augmented:
      return "augmented";
    case Origin::backtranslated:
      return "backtranslated";
  }
  return "original";
}

inline Origin parse_origin(std::string_view s, std::size_t line_no) {
  if (s == "original") return Origin::original;
  if (s == "augmented") return Origin::augmented;
  if (s == "backtranslated") return Origin::backtranslated;
  throw ParseError(line_no, "unknown origin '" + std::string(s) + "'");
}

struct Tweet {
  std::string topic_id;
  std::string tweet_id;
  std::string text;
  int label = 0;  // 0 = not check-worthy, 1 = check-worthy
  Origin origin = Origin::original;

  bool operator==(const Tweet&) const = default;
};

// Order-preserving container; ranking tie-breaks depend on input order.
struct LabeledDataset {
  std::string name;
  std::vector<Tweet> tweets;

  std::size_t size() const { return tweets.size(); }
  bool empty() const { return tweets.empty(); }
};

struct DatasetStats {
  std::size_t n_samples = 0;
  std::size_t n_positive = 0;
  double positive_rate = 0.0;
  std::size_t unique_word_count = 0;
};

enum class TsvFormat { canonical, checkthat };

inline TsvFormat parse_format(std::string_view s) {
  if (s == "canonical") return TsvFormat::canonical;
  if (s == "checkthat") return TsvFormat::checkthat;
  throw ConfigError("unknown dataset format '" + std::string(s) + "'");
}

namespace detail {

inline const char* kCanonicalHeader = "topic_id\ttweet_id\ttweet_text\tcheck_worthiness";

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Escapes for the canonical format; keeps rows one-per-line and round-trips
// byte-identically.
inline std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

inline std::string unescape_text(std::string_view text, std::size_t line_no) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 >= text.size()) throw ParseError(line_no, "dangling escape in tweet_text");
    switch (text[++i]) {
      case '\\':
        out.push_back('\\');
        break;
      case 't':
        out.push_back('\t');
        break;
      case 'n':
        out.push_back('\n');
        break;
      case 'r':
        out.push_back('\r');
        break;
      default:
        throw ParseError(line_no, "unknown escape in tweet_text");
    }
  }
  return out;
}

inline int parse_label(std::string_view s, std::size_t line_no) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError(line_no, "non-binary label '" + std::string(s) + "'");
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline LabeledDataset parse_dataset(std::istream& in, TsvFormat format,
                                    const std::string& name = "dataset") {
  LabeledDataset ds;
  ds.name = name;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  detail::strip_cr(line);
  ++line_no;

  std::size_t col_topic = 0, col_id = 1, col_text = 2, col_label = 3;
  std::size_t expected_cols = 4;
  bool with_origin = false;
  std::size_t col_origin = 4;

  if (format == TsvFormat::canonical) {
    if (line == detail::kCanonicalHeader) {
      with_origin = false;
    } else if (line == std::string(detail::kCanonicalHeader) + "\torigin") {
      with_origin = true;
      expected_cols = 5;
    } else {
      throw ParseError(1, "bad canonical header");
    }
  } else {
    const std::vector<std::string> cols = detail::split_tabs(line);
    auto find = [&](std::string_view want) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == want) return i;
      }
      throw ParseError(1, "missing column '" + std::string(want) + "'");
    };
    col_topic = find("topic_id");
    col_id = find("tweet_id");
    col_text = find("tweet_text");
    col_label = find("check_worthiness");
    expected_cols = std::max({col_topic, col_id, col_text, col_label}) + 1;
  }

  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    ++line_no;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cols = detail::split_tabs(line);
    if (format == TsvFormat::canonical ? cols.size() != expected_cols
                                       : cols.size() < expected_cols) {
      throw ParseError(line_no, "column count");
    }
    Tweet t;
    t.topic_id = cols[col_topic];
    t.tweet_id = cols[col_id];
    t.text = format == TsvFormat::canonical ? detail::unescape_text(cols[col_text], line_no)
                                            : cols[col_text];
    t.label = detail::parse_label(cols[col_label], line_no);
    t.origin = with_origin ? parse_origin(cols[col_origin], line_no) : Origin::original;
    if (trim_whitespace(t.text).empty()) throw ParseError(line_no, "empty tweet_text");
    if (!seen_ids.insert(t.tweet_id).second) {
      throw ParseError(line_no, "duplicate tweet_id '" + t.tweet_id + "'");
    }
    ds.tweets.push_back(std::move(t));
  }
  return ds;
}

inline LabeledDataset parse_dataset(const std::string& path, TsvFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_dataset(in, format, std::filesystem::path(path).stem().string());
}

inline void write_dataset(const LabeledDataset& ds, std::ostream& out,
                          bool with_origin = false) {
  out << detail::kCanonicalHeader;
  if (with_origin) out << "\torigin";
  out << '\n';
  for (const Tweet& t : ds.tweets) {
    out << t.topic_id << '\t' << t.tweet_id << '\t' << detail::escape_text(t.text) << '\t'
        << t.label;
    if (with_origin) out << '\t' << origin_name(t.origin);
    out << '\n';
  }
}

inline void write_dataset(const LabeledDataset& ds, const std::string& path,
                          bool with_origin = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_dataset(ds, out, with_origin);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string dataset_to_string(const LabeledDataset& ds, bool with_origin = false) {
  std::ostringstream out;
  write_dataset(ds, out, with_origin);
  return out.str();
}

inline DatasetStats stats(const LabeledDataset& ds) {
  DatasetStats s;
  s.n_samples = ds.tweets.size();
  std::unordered_set<std::string> types;
  for (const Tweet& t : ds.tweets) {
    if (t.label == 1) ++s.n_positive;
    for (std::string& w : stat_words(t.text)) {
      types.insert(std::move(w));
    }
  }
  s.unique_word_count = types.size();
  s.positive_rate =
      s.n_samples == 0 ? 0.0
                       : static_cast<double>(s.n_positive) / static_cast<double>(s.n_samples);
  return s;
}

// Round-half-up; split sizes are defined in terms of this.
inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(x + 0.5);
}

// Per-class membership is chosen by a seeded shuffle; both outputs keep the
// input's relative row order.
inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds,
                                                                  double train_fraction,
                                                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw SplitError("train_fraction must be strictly between 0 and 1");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.tweets.size(); ++i) {
    by_class[ds.tweets[i].label].push_back(i);
  }
  std::vector<bool> in_train(ds.tweets.size(), false);
  for (int label = 0; label < 2; ++label) {
    const std::size_t n = by_class[label].size();
    if (n == 0) {
      throw SplitError("class " + std::to_string(label) + " has no samples");
    }
    const std::size_t n_train = round_half_up(train_fraction * static_cast<double>(n));
    if (n_train == 0 || n_train == n) {
      throw SplitError("class " + std::to_string(label) +
                       " would receive 0 samples on one side");
    }
    std::vector<std::size_t> order = by_class[label];
    Rng rng(fnv1a64_u64(static_cast<std::uint64_t>(label), fnv1a64_u64(seed)));
    shuffle(order, rng);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  }
  LabeledDataset train, holdout;
  train.name = ds.name + "/train";
  holdout.name = ds.name + "/holdout";
  for (std::size_t i = 0; i < ds.tweets.size(); ++i) {
    (in_train[i] ? train : holdout).tweets.push_back(ds.tweets[i]);
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace claimrank
