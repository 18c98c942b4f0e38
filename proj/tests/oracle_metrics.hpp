#pragma once

// Brute-force reference implementations of the ranking metrics, written
// directly from the textbook definitions and sharing no code with the
// library. Used to cross-check the production implementations.

#include <cstddef>
#include <vector>

namespace oracle {

// Precision among the first `cutoff` entries of a 0/1 relevance list laid
// out in rank order, with an explicit denominator.
inline double precision_at(const std::vector<int>& rel, std::size_t cutoff,
                           double denominator) {
  double hits = 0.0;
  for (std::size_t i = 0; i < rel.size() && i < cutoff; ++i) {
    if (rel[i] == 1) hits += 1.0;
  }
  return denominator == 0.0 ? 0.0 : hits / denominator;
}

inline double average_precision(const std::vector<int>& rel) {
  double relevant = 0.0;
  for (int r : rel) relevant += r;
  if (relevant == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel[i] == 1) {
      // precision at this item's rank, recomputed from scratch each time
      sum += precision_at(rel, i + 1, static_cast<double>(i + 1));
    }
  }
  return sum / relevant;
}

inline double reciprocal_rank(const std::vector<int>& rel) {
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel[i] == 1) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double r_precision(const std::vector<int>& rel) {
  std::size_t relevant = 0;
  for (int r : rel) relevant += static_cast<std::size_t>(r);
  if (relevant == 0) return 0.0;
  return precision_at(rel, relevant, static_cast<double>(relevant));
}

// P@k with the fixed-k denominator convention (numerator counts only the
// items that exist).
inline double precision_at_k(const std::vector<int>& rel, std::size_t k) {
  return precision_at(rel, k, static_cast<double>(k));
}

// Means over a set of topics, each given as a rank-ordered relevance list.
// Topics without relevant items contribute zero unless skipped.
struct TopicMeans {
  double map = 0.0;
  double mrr = 0.0;
  double r_precision = 0.0;
  std::vector<double> p_at_k;
};

inline TopicMeans topic_means(const std::vector<std::vector<int>>& topics,
                              const std::vector<std::size_t>& k_list,
                              bool skip_empty_topics = false) {
  TopicMeans means;
  means.p_at_k.assign(k_list.size(), 0.0);
  std::size_t counted = 0;
  for (const std::vector<int>& rel : topics) {
    bool any_relevant = false;
    for (int r : rel) any_relevant = any_relevant || r == 1;
    if (!any_relevant && skip_empty_topics) continue;
    ++counted;
    means.map += average_precision(rel);
    means.mrr += reciprocal_rank(rel);
    means.r_precision += r_precision(rel);
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      means.p_at_k[i] += precision_at_k(rel, k_list[i]);
    }
  }
  if (counted > 0) {
    means.map /= static_cast<double>(counted);
    means.mrr /= static_cast<double>(counted);
    means.r_precision /= static_cast<double>(counted);
    for (double& v : means.p_at_k) v /= static_cast<double>(counted);
  }
  return means;
}

}  // namespace oracle
