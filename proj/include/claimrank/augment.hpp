#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"
#include "claimrank/lm_scorer.hpp"
#include "claimrank/rng.hpp"
#include "claimrank/text.hpp"

namespace claimrank {

enum class AugmentMode { substitute, insert };
enum class Selection { argmax, sample_top_k };

struct AugmentConfig {
  double p = 0.1;                    // per-token augmentation probability
  AugmentMode mode = AugmentMode::substitute;
  Selection selection = Selection::sample_top_k;
  std::size_t top_k = 10;
  std::uint64_t seed = 42;
  bool protect_urls = true;
  bool protect_mentions = true;
  bool protect_hashtags = true;
  bool protect_numerals = false;
  std::size_t context_window = 10;   // words passed to the scorer per side

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
    if (top_k < 1) throw InvalidTopKError("top_k must be at least 1");
    if (context_window < 1) throw ConfigError("context_window must be at least 1");
  }
};

struct SubstitutionTrace {
  std::size_t eligible = 0;     // positions the coin was flipped for
  std::size_t selected = 0;     // positions where the coin came up heads
  std::size_t substituted = 0;  // positions actually rewritten
};

namespace detail {

// One pre-token with its byte span in the source text. Protected chunks stay
// atomic; everything else is split on punctuation like the subword
// pre-tokenizer, so "eligible positions" are whole words.
struct AugToken {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::string current;         // replacement text, initially the original bytes
  bool eligible = false;
  std::string inserted_after;  // word to splice in after this token, if any
};

inline bool ascii_iprefix(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

inline bool is_protected_chunk(std::string_view chunk, const AugmentConfig& cfg) {
  if (cfg.protect_urls && (ascii_iprefix(chunk, "http://") || ascii_iprefix(chunk, "https://") ||
                           ascii_iprefix(chunk, "www."))) {
    return true;
  }
  if (cfg.protect_mentions && chunk.size() > 1 && chunk.front() == '@') return true;
  if (cfg.protect_hashtags && chunk.size() > 1 && chunk.front() == '#') return true;
  if (cfg.protect_numerals && has_digit(chunk)) return true;
  return false;
}

inline std::vector<AugToken> augment_tokens(std::string_view text, const AugmentConfig& cfg) {
  std::vector<AugToken> tokens;
  for (const TokenSpan& chunk : whitespace_spans(text)) {
    const std::string_view view = chunk.view(text);
    if (is_protected_chunk(view, cfg)) {
      AugToken t;
      t.offset = chunk.offset;
      t.length = chunk.length;
      t.current = std::string(view);
      tokens.push_back(std::move(t));
      continue;
    }
    for (const TokenSpan& piece : pretokenize_spans(view)) {
      AugToken t;
      t.offset = chunk.offset + piece.offset;
      t.length = piece.length;
      t.current = std::string(piece.view(view));
      t.eligible = has_word_char(t.current);
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

// Splices current token strings (and any insertions) back over their spans,
// leaving every untouched byte — whitespace runs included — verbatim.
inline std::string rebuild(std::string_view text, const std::vector<AugToken>& tokens) {
  std::string out;
  out.reserve(text.size() + 16);
  std::size_t cursor = 0;
  for (const AugToken& t : tokens) {
    out.append(text.substr(cursor, t.offset - cursor));
    out += t.current;
    if (!t.inserted_after.empty()) {
      out.push_back(' ');
      out += t.inserted_after;
    }
    cursor = t.offset + t.length;
  }
  out.append(text.substr(cursor));
  return out;
}

inline std::vector<std::string> context_before(const std::vector<AugToken>& tokens,
                                               std::size_t i, std::size_t window,
                                               bool include_self) {
  const std::size_t end = include_self ? i + 1 : i;
  const std::size_t begin = end > window ? end - window : 0;
  std::vector<std::string> out;
  out.reserve(end - begin);
  for (std::size_t j = begin; j < end; ++j) out.push_back(tokens[j].current);
  return out;
}

inline std::vector<std::string> context_after(const std::vector<AugToken>& tokens,
                                              std::size_t i, std::size_t window) {
  std::vector<std::string> out;
  const std::size_t end = std::min(tokens.size(), i + 1 + window);
  out.reserve(end - (i + 1));
  for (std::size_t j = i + 1; j < end; ++j) out.push_back(tokens[j].current);
  return out;
}

// Weighted draw over candidates, proportional to exp(logprob).
inline const Candidate& sample_candidate(const std::vector<Candidate>& candidates, Rng& rng) {
  double total = 0.0;
  for (const Candidate& c : candidates) total += std::exp(c.logprob);
  double u = rng.next_double() * total;
  for (const Candidate& c : candidates) {
    u -= std::exp(c.logprob);
    if (u <= 0.0) return c;
  }
  return candidates.back();
}

}  // namespace detail

// Rewrites each eligible word position independently with probability cfg.p,
// drawing replacements (or insertions) from the scorer. The per-record seed
// makes results independent of processing order across tweets.
inline Tweet contextual_substitute(const Tweet& tweet, CandidateScorer& scorer,
                                   const AugmentConfig& cfg, std::size_t epoch = 1,
                                   SubstitutionTrace* trace = nullptr) {
  cfg.validate();
  if (trim_whitespace(tweet.text).empty()) throw Error("cannot augment empty text");
  std::vector<detail::AugToken> tokens = detail::augment_tokens(tweet.text, cfg);
  Rng rng(record_seed(cfg.seed, tweet.tweet_id, epoch));

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].eligible) continue;
    if (trace) ++trace->eligible;
    if (!rng.bernoulli(cfg.p)) continue;
    if (trace) ++trace->selected;

    const bool insert = cfg.mode == AugmentMode::insert;
    const std::vector<std::string> left =
        detail::context_before(tokens, i, cfg.context_window, insert);
    const std::vector<std::string> right = detail::context_after(tokens, i, cfg.context_window);
    // Ask for one extra candidate so excluding the original still leaves
    // top_k choices when the scorer has enough vocabulary.
    std::vector<Candidate> candidates =
        scorer.score_candidates(left, right, cfg.top_k + (insert ? 0 : 1));
    if (!insert) {
      std::erase_if(candidates, [&](const Candidate& c) { return c.token == tokens[i].current; });
    }
    if (candidates.size() > cfg.top_k) candidates.resize(cfg.top_k);
    if (candidates.empty()) continue;

    const Candidate& chosen = cfg.selection == Selection::argmax
                                  ? candidates.front()
                                  : detail::sample_candidate(candidates, rng);
    if (insert) {
      tokens[i].inserted_after = chosen.token;
    } else {
      tokens[i].current = chosen.token;
    }
    if (trace) ++trace->substituted;
  }

  Tweet out = tweet;
  out.text = detail::rebuild(tweet.text, tokens);
  out.tweet_id = tweet.tweet_id + "#aug" + std::to_string(epoch);
  out.origin = Origin::augmented;
  return out;
}

enum class EdaOp { random_insert, random_delete, random_swap, synonym_replace };

inline EdaOp parse_eda_op(std::string_view s) {
  if (s == "random_insert") return EdaOp::random_insert;
  if (s == "random_delete") return EdaOp::random_delete;
  if (s == "random_swap") return EdaOp::random_swap;
  if (s == "synonym_replace") return EdaOp::synonym_replace;
  throw ConfigError("unknown eda op '" + std::string(s) + "'");
}

using SynonymLexicon = std::unordered_map<std::string, std::vector<std::string>>;

// EDA-style random edit over whitespace-delimited words. Unchanged inputs are
// returned byte-identical; edited ones are re-joined with single spaces.
inline Tweet eda_op(const Tweet& tweet, EdaOp op, double p, std::uint64_t seed,
                    std::size_t epoch = 1, const SynonymLexicon* synonyms = nullptr,
                    const std::vector<std::string>* word_pool = nullptr) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
  if (op == EdaOp::synonym_replace && (synonyms == nullptr || synonyms->empty())) {
    throw MissingLexiconError("synonym_replace needs a synonym lexicon");
  }
  if (op == EdaOp::random_insert && (word_pool == nullptr || word_pool->empty())) {
    throw MissingLexiconError("random_insert needs a word pool");
  }

  std::vector<std::string> words;
  for (const TokenSpan& span : whitespace_spans(tweet.text)) {
    words.emplace_back(span.view(tweet.text));
  }
  Rng rng(record_seed(seed, tweet.tweet_id, epoch));
  bool changed = false;
  const std::size_t n = words.size();

  switch (op) {
    case EdaOp::random_delete: {
      std::vector<std::string> kept;
      for (std::string& w : words) {
        if (rng.bernoulli(p)) {
          changed = true;
        } else {
          kept.push_back(std::move(w));
        }
      }
      if (kept.empty() && n > 0) {
        kept.push_back(words[rng.next_below(n)]);  // never delete every word
      }
      words = std::move(kept);
      break;
    }
    case EdaOp::random_swap: {
      if (n >= 2) {
        const std::size_t swaps = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        for (std::size_t s = 0; s < swaps; ++s) {
          const std::size_t j = rng.next_below(n - 1);
          std::swap(words[j], words[j + 1]);
          changed = true;
        }
      }
      break;
    }
    case EdaOp::random_insert: {
      std::vector<std::string> grown;
      grown.reserve(n * 2);
      for (std::string& w : words) {
        grown.push_back(std::move(w));
        if (rng.bernoulli(p)) {
          grown.push_back((*word_pool)[rng.next_below(word_pool->size())]);
          changed = true;
        }
      }
      words = std::move(grown);
      break;
    }
    case EdaOp::synonym_replace: {
      for (std::string& w : words) {
        if (!rng.bernoulli(p)) continue;
        auto it = synonyms->find(w);
        if (it == synonyms->end() || it->second.empty()) continue;
        w = it->second.size() == 1 ? it->second.front()
                                   : it->second[rng.next_below(it->second.size())];
        changed = true;
      }
      break;
    }
  }

  Tweet out = tweet;
  if (changed) {
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) text.push_back(' ');
      text += words[i];
    }
    out.text = std::move(text);
  }
  out.tweet_id = tweet.tweet_id + "#eda" + std::to_string(epoch);
  out.origin = Origin::augmented;
  return out;
}

struct BalanceReport {
  std::size_t epochs_run = 0;
  std::size_t augmented_generated = 0;
  std::size_t final_positive = 0;
  std::size_t final_negative = 0;
};

using Augmenter = std::function<Tweet(const Tweet&, std::size_t epoch)>;

// Epoch-wise oversampling: every positive row of the input is augmented once
// per epoch until positives reach (or, with strict_exceed, surpass) the
// negative count. Input rows are never touched.
inline std::pair<LabeledDataset, BalanceReport> balance_classes(const LabeledDataset& train,
                                                                const Augmenter& augment,
                                                                bool strict_exceed = false) {
  std::vector<std::size_t> positive_rows;
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < train.tweets.size(); ++i) {
    if (train.tweets[i].label == 1) {
      positive_rows.push_back(i);
    } else {
      ++negatives;
    }
  }
  if (positive_rows.empty()) throw NoPositivesError("training split has no positive samples");
  if (negatives == 0) throw NoNegativesError("training split has no negative samples");

  LabeledDataset out = train;
  BalanceReport report;
  std::size_t positives = positive_rows.size();
  auto needs_epoch = [&] { return strict_exceed ? positives <= negatives : positives < negatives; };
  while (needs_epoch()) {
    ++report.epochs_run;
    for (std::size_t row : positive_rows) {
      Tweet augmented = augment(train.tweets[row], report.epochs_run);
      if (augmented.label != 1) throw Error("augmenter changed a label during balancing");
      if (augmented.origin == Origin::original) {
        throw Error("augmenter returned origin=original during balancing");
      }
      out.tweets.push_back(std::move(augmented));
      ++report.augmented_generated;
      ++positives;
    }
  }
  report.final_positive = positives;
  report.final_negative = negatives;
  return {std::move(out), report};
}

}  // namespace claimrank
