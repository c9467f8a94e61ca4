#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "imentor/core/error.hpp"

namespace imentor {

struct EvalMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> auc;  // undefined when truth has a single class
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline EvalMetrics metrics_from(const Confusion& c) {
  EvalMetrics m;
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

/// Area under the ROC curve as the Mann-Whitney rank statistic; tied
/// positive/negative pairs count one half.
inline std::optional<double> roc_auc(std::span<const double> scores, std::span<const char> truth) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]]) {
        rank_sum_pos += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

/// Thresholded precision/recall/F1 (score >= threshold is positive) and AUC.
inline EvalMetrics evaluate(std::span<const double> scores, std::span<const char> truth, double threshold = 0.5) {
  if (scores.size() != truth.size()) throw ArgumentError("evaluate: scores and truth differ in length");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw ArgumentError("evaluate: scores must lie in [0, 1]");
    const bool predicted = scores[i] >= threshold;
    if (predicted && truth[i]) ++c.tp;
    else if (predicted) ++c.fp;
    else if (truth[i]) ++c.fn;
    else ++c.tn;
  }
  auto m = metrics_from(c);
  m.auc = roc_auc(scores, truth);
  return m;
}

/// Arithmetic mean over folds; AUC over the folds where it is defined.
inline EvalMetrics mean_metrics(std::span<const EvalMetrics> folds) {
  EvalMetrics m;
  if (folds.empty()) return m;
  double auc_sum = 0;
  std::size_t auc_n = 0;
  for (const auto& f : folds) {
    m.precision += f.precision;
    m.recall += f.recall;
    m.f1 += f.f1;
    if (f.auc) {
      auc_sum += *f.auc;
      ++auc_n;
    }
  }
  const double k = static_cast<double>(folds.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  if (auc_n > 0) m.auc = auc_sum / static_cast<double>(auc_n);
  return m;
}

}  // namespace imentor
