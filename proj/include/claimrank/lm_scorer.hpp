#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "claimrank/errors.hpp"
#include "claimrank/text.hpp"

namespace claimrank {

struct Candidate {
  std::string token;
  double logprob = 0.0;

  bool operator==(const Candidate&) const = default;
};

// Contract for anything that can rank substitutes for a masked position.
// Implementations must return at most top_k candidates with finite logprobs,
// sorted descending.
class CandidateScorer {
 public:
  virtual ~CandidateScorer() = default;
  virtual std::vector<Candidate> score_candidates(const std::vector<std::string>& left,
                                                  const std::vector<std::string>& right,
                                                  std::size_t top_k) = 0;
};

// Interpolated trigram model with add-k smoothing. Sentences are padded with
// two begin markers and one end marker; the end marker is a predictable
// outcome, the begin markers appear only as context.
class NGramScorer : public CandidateScorer {
 public:
  struct Params {
    double add_k = 0.01;
    double lambda1 = 0.1;  // unigram
    double lambda2 = 0.3;  // bigram
    double lambda3 = 0.6;  // trigram
    bool lowercase = false;
  };

  explicit NGramScorer(const std::vector<std::string>& sentences)
      : NGramScorer(sentences, Params()) {}

  NGramScorer(const std::vector<std::string>& sentences, Params params) : params_(params) {
    const double lsum = params_.lambda1 + params_.lambda2 + params_.lambda3;
    if (!(lsum > 0.0) || params_.lambda1 < 0 || params_.lambda2 < 0 || params_.lambda3 < 0) {
      throw ConfigError("interpolation weights must be non-negative with positive sum");
    }
    params_.lambda1 /= lsum;
    params_.lambda2 /= lsum;
    params_.lambda3 /= lsum;
    if (!(params_.add_k > 0.0)) throw ConfigError("add-k constant must be positive");

    for (const std::string& sentence : sentences) {
      std::vector<std::uint32_t> ids;
      ids.reserve(8);
      ids.push_back(kBos);
      ids.push_back(kBos);
      const std::string folded = params_.lowercase ? fold_case(sentence) : std::string();
      for (const std::string& tok : pretokenize(params_.lowercase ? folded : sentence)) {
        ids.push_back(intern(tok));
      }
      if (ids.size() == 2) continue;  // no tokens at all
      ids.push_back(kEos);
      // Outcomes are positions 2..end: every word plus the end marker.
      for (std::size_t i = 2; i < ids.size(); ++i) {
        ++total_outcomes_;
        ++unigram_[ids[i]];
        ++bigram_[pack2(ids[i - 1], ids[i])];
        ++bigram_ctx_[ids[i - 1]];
        ++trigram_[pack3(ids[i - 2], ids[i - 1], ids[i])];
        ++trigram_ctx_[pack2(ids[i - 2], ids[i - 1])];
      }
    }
    if (total_outcomes_ == 0) throw EmptyCorpusError("n-gram training corpus has no tokens");
    // Outcome vocabulary: every word plus the end marker.
    outcome_types_ = static_cast<double>(words_.size() + 1);
  }

  // Interpolated P(word | up to last two context tokens). Context tokens not
  // seen in training contribute zero counts, so smoothing still yields a
  // proper distribution. Only the orders the context supports participate,
  // with their weights renormalized.
  double cond_prob(const std::vector<std::string>& left, const std::string& word) const {
    const std::uint32_t w = id_of(word);
    const std::size_t m = std::min<std::size_t>(left.size(), 2);
    const double p1 = smoothed(count(unigram_, w), total_outcomes_);
    if (m == 0) return p1;
    const std::uint32_t l1 = id_of(left.back());
    const double p2 = smoothed(count(bigram_, pack2(l1, w)), count(bigram_ctx_, l1));
    if (m == 1) {
      return (params_.lambda1 * p1 + params_.lambda2 * p2) /
             (params_.lambda1 + params_.lambda2);
    }
    const std::uint32_t l2 = id_of(left[left.size() - 2]);
    const double p3 =
        smoothed(count(trigram_, pack3(l2, l1, w)), count(trigram_ctx_, pack2(l2, l1)));
    return params_.lambda1 * p1 + params_.lambda2 * p2 + params_.lambda3 * p3;
  }

  std::vector<Candidate> score_candidates(const std::vector<std::string>& left,
                                          const std::vector<std::string>& right,
                                          std::size_t top_k) override {
    if (top_k < 1) throw InvalidTopKError("top_k must be at least 1");
    // Left factor: P(w | left); right factor: P(r1 | ..., w). Both use the
    // same interpolated estimate; the product is renormalized over the pool.
    std::vector<Candidate> pool;
    pool.reserve(words_.size());
    double total = 0.0;
    std::vector<std::string> right_ctx;
    for (const std::string& word : words_) {
      double score = cond_prob(left, word);
      if (!right.empty()) {
        right_ctx.clear();
        if (!left.empty()) right_ctx.push_back(left.back());
        right_ctx.push_back(word);
        score *= cond_prob(right_ctx, right.front());
      }
      total += score;
      pool.push_back({word, score});
    }
    for (Candidate& c : pool) c.logprob /= total;  // still raw probabilities here
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      return a.token < b.token;
    });
    if (pool.size() > top_k) pool.resize(top_k);
    for (Candidate& c : pool) c.logprob = std::log(c.logprob);
    return pool;
  }

  const std::vector<std::string>& vocabulary() const { return words_; }

  std::uint64_t bigram_count(const std::string& a, const std::string& b) const {
    return count(bigram_, pack2(id_of(a), id_of(b)));
  }

  std::uint64_t trigram_count(const std::string& a, const std::string& b,
                              const std::string& c) const {
    return count(trigram_, pack3(id_of(a), id_of(b), id_of(c)));
  }

 private:
  static constexpr std::uint32_t kBos = 0;
  static constexpr std::uint32_t kEos = 1;
  static constexpr std::uint32_t kIdBits = 21;
  static constexpr std::uint32_t kUnseen = (1u << kIdBits) - 1;  // reserved, never interned

  std::uint32_t intern(const std::string& tok) {
    auto it = word_ids_.find(tok);
    if (it != word_ids_.end()) return it->second;
    const std::uint32_t id = static_cast<std::uint32_t>(words_.size()) + 2;
    if (id >= kUnseen) throw Error("n-gram vocabulary exceeds id space");
    words_.push_back(tok);
    word_ids_.emplace(tok, id);
    return id;
  }

  std::uint32_t id_of(const std::string& tok) const {
    auto it = word_ids_.find(tok);
    return it == word_ids_.end() ? kUnseen : it->second;
  }

  static std::uint64_t pack2(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << kIdBits) | b;
  }

  static std::uint64_t pack3(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    return (pack2(a, b) << kIdBits) | c;
  }

  template <typename Map, typename Key>
  static std::uint64_t count(const Map& map, Key key) {
    auto it = map.find(static_cast<typename Map::key_type>(key));
    return it == map.end() ? 0 : it->second;
  }

  double smoothed(std::uint64_t ngram, std::uint64_t ctx) const {
    return (static_cast<double>(ngram) + params_.add_k) /
           (static_cast<double>(ctx) + params_.add_k * outcome_types_);
  }

  Params params_;
  std::vector<std::string> words_;                       // id - 2 → token
  std::unordered_map<std::string, std::uint32_t> word_ids_;
  std::unordered_map<std::uint32_t, std::uint64_t> unigram_;
  std::unordered_map<std::uint64_t, std::uint64_t> bigram_;
  std::unordered_map<std::uint32_t, std::uint64_t> bigram_ctx_;
  std::unordered_map<std::uint64_t, std::uint64_t> trigram_;
  std::unordered_map<std::uint64_t, std::uint64_t> trigram_ctx_;
  std::uint64_t total_outcomes_ = 0;
  double outcome_types_ = 0.0;
};

}  // namespace claimrank
