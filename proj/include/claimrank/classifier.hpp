#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"
#include "claimrank/rng.hpp"
#include "claimrank/text.hpp"

namespace claimrank {

enum class Profile { paper_transformer, baseline_linear };

inline Profile parse_profile(std::string_view s) {
  if (s == "paper_transformer") return Profile::paper_transformer;
  if (s == "baseline_linear") return Profile::baseline_linear;
  throw ConfigError("unknown profile '" + std::string(s) + "'");
}

inline std::string_view profile_name(Profile p) {
  return p == Profile::paper_transformer ? "paper_transformer" : "baseline_linear";
}

struct TrainConfig {
  Profile profile = Profile::baseline_linear;
  double learning_rate = 0.05;
  double adam_epsilon = 1e-8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;

  // paper_transformer carries the fine-tuning hyperparameters for external
  // models; baseline_linear is what the built-in model actually trains with.
  static TrainConfig for_profile(Profile profile) {
    TrainConfig cfg;
    cfg.profile = profile;
    if (profile == Profile::paper_transformer) {
      cfg.learning_rate = 1.5e-5;
      cfg.epochs = 2;
    }
    return cfg;
  }

  void validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (!(adam_epsilon > 0)) throw ConfigError("adam_epsilon must be positive");
    if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1)) {
      throw ConfigError("adam betas must lie in (0, 1)");
    }
    if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be >= 1");
  }
};

inline constexpr int kFeatureBits = 18;
inline constexpr std::size_t kFeatureDim = std::size_t{1} << kFeatureBits;
inline constexpr const char* kFeatureSpec =
    "fold_case; word 1-2 grams + char 3-5 grams; fnv1a64 signed hashing";

using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

namespace detail {

inline void add_feature(std::unordered_map<std::uint32_t, double>& acc, std::string_view key) {
  const std::uint64_t h = fnv1a64(key);
  const double sign = (h >> 63) ? -1.0 : 1.0;
  acc[static_cast<std::uint32_t>(h & (kFeatureDim - 1))] += sign;
}

}  // namespace detail

// Hashed bag of word 1-2-grams and character 3-5-grams over case-folded
// text. Values are signed occurrence counts; indices are sorted and exact
// cancellations dropped.
inline SparseVec featurize(std::string_view text) {
  const std::string folded = fold_case(text);
  const std::vector<std::string> words = pretokenize(folded);
  if (words.empty()) return {};  // no tokens, no features (not even char grams)
  std::unordered_map<std::uint32_t, double> acc;
  std::string key;
  for (std::size_t i = 0; i < words.size(); ++i) {
    key = "w1\x1f";
    key += words[i];
    detail::add_feature(acc, key);
    if (i + 1 < words.size()) {
      key = "w2\x1f";
      key += words[i];
      key += '\x1f';
      key += words[i + 1];
      detail::add_feature(acc, key);
    }
  }
  for (std::size_t n = 3; n <= 5; ++n) {
    if (folded.size() < n) break;
    const char prefix[] = {'c', static_cast<char>('0' + n), '\x1f'};
    for (std::size_t i = 0; i + n <= folded.size(); ++i) {
      key.assign(prefix, 3);
      key.append(folded, i, n);
      detail::add_feature(acc, key);
    }
  }
  SparseVec out;
  out.reserve(acc.size());
  for (const auto& [idx, value] : acc) {
    if (value != 0.0) out.emplace_back(idx, value);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct LinearModel {
  int feature_bits = kFeatureBits;
  std::vector<double> weights = std::vector<double>(kFeatureDim, 0.0);
  double bias = 0.0;
};

inline double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow; BCE is softplus(z) − y·z.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double dot(const SparseVec& x, const std::vector<double>& w) {
  double z = 0.0;
  for (const auto& [idx, value] : x) z += w[idx] * value;
  return z;
}

// Mean binary cross-entropy and its gradient over a batch. grad_w must be
// zeroed (at least at the touched indices) on entry; touched collects the
// indices written so callers can reset them cheaply.
inline double bce_loss_and_grad(const std::vector<const SparseVec*>& batch,
                                const std::vector<int>& labels,
                                const std::vector<double>& weights, double bias,
                                std::vector<double>& grad_w, double& grad_b,
                                std::vector<std::uint32_t>* touched = nullptr) {
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  grad_b = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double z = dot(*batch[i], weights) + bias;
    const double y = static_cast<double>(labels[i]);
    loss += softplus(z) - y * z;
    const double gz = (stable_sigmoid(z) - y) * inv_n;
    for (const auto& [idx, value] : *batch[i]) {
      if (touched && grad_w[idx] == 0.0) touched->push_back(idx);
      grad_w[idx] += gz * value;
    }
    grad_b += gz;
  }
  return loss * inv_n;
}

// Bias-corrected Adam over a fixed parameter vector plus a scalar bias.
// Indices outside `active` are assumed to have zero gradient for every step
// of this optimizer's life, which keeps their moments at zero — skipping
// them is then exactly the dense update.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t dim, const TrainConfig& cfg)
      : lr_(cfg.learning_rate),
        beta1_(cfg.adam_beta1),
        beta2_(cfg.adam_beta2),
        eps_(cfg.adam_epsilon),
        m_(dim + 1, 0.0),
        v_(dim + 1, 0.0) {}

  void step(std::vector<double>& weights, double& bias, const std::vector<double>& grad_w,
            double grad_b, const std::vector<std::uint32_t>& active) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::uint32_t idx : active) {
      update_one(weights[idx], m_[idx], v_[idx], grad_w[idx], c1, c2);
    }
    update_one(bias, m_.back(), v_.back(), grad_b, c1, c2);
  }

  std::uint64_t steps() const { return t_; }

 private:
  void update_one(double& w, double& m, double& v, double g, double c1, double c2) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g * g;
    w -= lr_ * (m / c1) / (std::sqrt(v / c2) + eps_);
  }

  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainResult {
  LinearModel model;
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;
};

inline TrainResult train(const LabeledDataset& train_set, const TrainConfig& cfg) {
  cfg.validate();
  std::size_t n_pos = 0;
  for (const Tweet& t : train_set.tweets) n_pos += t.label == 1;
  if (train_set.tweets.empty() || n_pos == 0 || n_pos == train_set.tweets.size()) {
    throw DegenerateDataError("training data must contain both classes");
  }

  const std::size_t n = train_set.tweets.size();
  std::vector<SparseVec> features(n);
  std::vector<int> labels(n);
  std::vector<std::uint32_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = featurize(train_set.tweets[i].text);
    labels[i] = train_set.tweets[i].label;
    for (const auto& [idx, value] : features[i]) active.push_back(idx);
  }
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  TrainResult result;
  LinearModel& model = result.model;
  AdamOptimizer adam(kFeatureDim, cfg);

  auto dataset_loss = [&] {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dot(features[i], model.weights) + model.bias;
      loss += softplus(z) - static_cast<double>(labels[i]) * z;
    }
    return loss / static_cast<double>(n);
  };
  result.initial_loss = dataset_loss();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> grad_w(kFeatureDim, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<const SparseVec*> batch;
  std::vector<int> batch_labels;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(fnv1a64_u64(epoch, fnv1a64("shuffle", fnv1a64_u64(cfg.seed))));
    shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      batch.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&features[order[i]]);
        batch_labels.push_back(labels[order[i]]);
      }
      touched.clear();
      double grad_b = 0.0;
      bce_loss_and_grad(batch, batch_labels, model.weights, model.bias, grad_w, grad_b,
                        &touched);
      adam.step(model.weights, model.bias, grad_w, grad_b, active);
      for (std::uint32_t idx : touched) grad_w[idx] = 0.0;
    }
    result.epoch_losses.push_back(dataset_loss());
  }
  return result;
}

// Two-logit shape with class 0 as the fixed reference, so ranking treats
// built-in and external scores identically.
inline std::pair<double, double> predict_logits(const LinearModel& model,
                                                std::string_view text) {
  return {0.0, dot(featurize(text), model.weights) + model.bias};
}

inline nlohmann::ordered_json model_to_json(const LinearModel& model, const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "claimrank-linear";
  j["version"] = 1;
  j["feature_bits"] = model.feature_bits;
  j["dim"] = std::size_t{1} << model.feature_bits;
  j["feature_spec"] = kFeatureSpec;
  j["bias"] = model.bias;
  nlohmann::ordered_json weights = nlohmann::ordered_json::array();
  for (std::size_t idx = 0; idx < model.weights.size(); ++idx) {
    if (model.weights[idx] != 0.0) {
      weights.push_back({idx, model.weights[idx]});
    }
  }
  j["weights"] = std::move(weights);
  nlohmann::ordered_json config;
  config["profile"] = std::string(profile_name(cfg.profile));
  config["learning_rate"] = cfg.learning_rate;
  config["adam_epsilon"] = cfg.adam_epsilon;
  config["adam_beta1"] = cfg.adam_beta1;
  config["adam_beta2"] = cfg.adam_beta2;
  config["epochs"] = cfg.epochs;
  config["batch_size"] = cfg.batch_size;
  config["seed"] = cfg.seed;
  j["config"] = std::move(config);
  return j;
}

inline void save_model(const LinearModel& model, const TrainConfig& cfg,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << model_to_json(model, cfg).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("model file: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "claimrank-linear" ||
      j.value("version", 0) != 1) {
    throw ParseError(0, "not a claimrank-linear v1 model file");
  }
  LinearModel model;
  model.feature_bits = j.at("feature_bits").get<int>();
  if (model.feature_bits != kFeatureBits) {
    throw ParseError(0, "unsupported feature_bits in model file");
  }
  model.bias = j.at("bias").get<double>();
  for (const nlohmann::json& pair : j.at("weights")) {
    const std::size_t idx = pair.at(0).get<std::size_t>();
    if (idx >= model.weights.size()) throw ParseError(0, "weight index out of range");
    model.weights[idx] = pair.at(1).get<double>();
  }
  return model;
}

namespace detail {

inline double parse_logit(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(line_no, "non-numeric logit '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

// Reads per-tweet logits produced by an external model and aligns them with
// the dataset order. Every dataset id must appear exactly once.
inline std::vector<std::pair<double, double>> load_external_scores(const std::string& path,
                                                                   const LabeledDataset& ds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tweet_id\tlogit_neg\tlogit_pos") throw ParseError(1, "bad score file header");

  std::unordered_map<std::string, std::pair<double, double>> by_id;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cols = detail::split_tabs(line);
    if (cols.size() != 3) throw ParseError(line_no, "column count");
    const double neg = detail::parse_logit(cols[1], line_no);
    const double pos = detail::parse_logit(cols[2], line_no);
    if (!by_id.emplace(cols[0], std::make_pair(neg, pos)).second) {
      throw DuplicateIdError("id mismatch: duplicate " + cols[0]);
    }
  }

  std::vector<std::pair<double, double>> out;
  out.reserve(ds.tweets.size());
  for (const Tweet& t : ds.tweets) {
    auto it = by_id.find(t.tweet_id);
    if (it == by_id.end()) throw MissingIdError(t.tweet_id);
    out.push_back(it->second);
  }
  if (by_id.size() != ds.tweets.size()) {
    std::vector<std::string> unknown;
    std::unordered_set<std::string> ds_ids;
    for (const Tweet& t : ds.tweets) ds_ids.insert(t.tweet_id);
    for (const auto& [id, logits] : by_id) {
      if (!ds_ids.count(id)) unknown.push_back(id);
    }
    std::sort(unknown.begin(), unknown.end());
    std::string joined;
    for (const std::string& id : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw IdMismatchError("id mismatch: unknown ids in score file: " + joined);
  }
  return out;
}

}  // namespace claimrank
