#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imentor/annotation/sampling.hpp"
#include "imentor/classifier/eval_metrics.hpp"
#include "imentor/classifier/model.hpp"

namespace imentor {

struct CrossValidation {
  EvalMetrics mean;
  std::vector<EvalMetrics> per_fold;
  /// Held-out score of every example, (comment_id, score), in canonical order.
  std::vector<std::pair<std::int64_t, double>> out_of_fold;
};

/// Fold assignment: examples in canonical order, shuffled once by `seed`,
/// cut into `folds` near-equal consecutive parts. Returns fold index per
/// canonical position.
inline std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (n < folds) {
    throw ArgumentError("cannot split " + std::to_string(n) + " examples into " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0xc5));
  shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = f;
  }
  return fold_of;
}

/// k-fold cross-validation; metrics per held-out fold, then averaged.
inline CrossValidation cross_validate(Family family, std::span<const LabeledExample> examples,
                                      const Hyperparameters& hp, std::size_t folds, std::uint64_t seed,
                                      TrainOptions opts = {}) {
  const auto ordered = canonical_order(examples);
  const auto fold_of = assign_folds(ordered.size(), folds, seed);
  CrossValidation cv;
  cv.out_of_fold.resize(ordered.size());
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<LabeledExample> train_set;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      if (fold_of[i] == f) {
        held.push_back(i);
      } else {
        train_set.push_back(*ordered[i]);
      }
    }
    const auto model = train(family, train_set, hp, seed, opts);
    std::vector<double> scores;
    std::vector<char> truth;
    for (auto i : held) {
      const double s = model.score_text(ordered[i]->text());
      scores.push_back(s);
      truth.push_back(ordered[i]->label() ? 1 : 0);
      cv.out_of_fold[i] = {ordered[i]->comment_id(), s};
    }
    cv.per_fold.push_back(evaluate(scores, truth));
  }
  cv.mean = mean_metrics(cv.per_fold);
  return cv;
}

struct SearchResult {
  Hyperparameters best;
  double best_f1 = -1;
  std::vector<std::pair<Hyperparameters, double>> tried;  // in sampling order
};

/// Number of points in a grid (product of the value-list sizes).
inline std::size_t grid_size(const nlohmann::json& grid) {
  std::size_t n = 1;
  for (const auto& [name, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ArgumentError("grid entry '" + name + "' must be a non-empty list");
    }
    n *= values.size();
  }
  return n;
}

/// Grid point with mixed-radix index `k` (parameters in name order).
inline Hyperparameters grid_point(const nlohmann::json& grid, std::size_t k) {
  Hyperparameters hp = nlohmann::json::object();
  for (const auto& [name, values] : grid.items()) {
    hp[name] = values[k % values.size()];
    k /= values.size();
  }
  return hp;
}

/// Randomized hyperparameter search: `iterations` distinct grid points
/// (all of them if the grid is smaller), each scored by CV F1 on the same
/// folds. Ties go to the first point sampled.
inline SearchResult randomized_search(Family family, std::span<const LabeledExample> examples, const nlohmann::json& grid,
                                      std::size_t iterations, std::uint64_t seed, std::size_t folds = 10,
                                      TrainOptions opts = {}) {
  if (!grid.is_object() || grid.empty()) throw ArgumentError("search grid must be a non-empty object");
  if (iterations < 1) throw ArgumentError("search needs at least one iteration");
  const auto size = grid_size(grid);
  const auto picks = sample_indices(size, std::min(iterations, size), derive_seed(seed, 0x5e));
  SearchResult result;
  for (auto k : picks) {
    auto hp = grid_point(grid, k);
    const double f1 = cross_validate(family, examples, hp, folds, seed, opts).mean.f1;
    result.tried.emplace_back(hp, f1);
    if (f1 > result.best_f1) {
      result.best_f1 = f1;
      result.best = hp;
    }
  }
  return result;
}

}  // namespace imentor
