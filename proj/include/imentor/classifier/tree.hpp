#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "imentor/classifier/features.hpp"
#include "imentor/core/random.hpp"

namespace imentor {

/// Dense column-major training matrix with binary labels.
class TrainingMatrix {
 public:
  TrainingMatrix(std::span<const FeatureVector> rows, std::size_t features, std::span<const char> labels)
      : rows_(rows.size()), features_(features), values_(rows.size() * features, 0.0f), labels_(labels.begin(), labels.end()) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [f, w] : rows[r].entries) values_[f * rows_ + r] = static_cast<float>(w);
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t features() const { return features_; }
  float value(std::size_t row, std::size_t feature) const { return values_[feature * rows_ + row]; }
  bool label(std::size_t row) const { return labels_[row] != 0; }

 private:
  std::size_t rows_;
  std::size_t features_;
  std::vector<float> values_;
  std::vector<char> labels_;
};

struct TreeParams {
  int max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0: all
};

/// Binary CART classification tree on Gini impurity.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    float threshold = 0;        // go left when value <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    float positive_fraction = 0;
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  /// Fits on the rows listed in `sample` (repeats allowed, as in a bootstrap).
  static DecisionTree fit(const TrainingMatrix& data, std::vector<std::uint32_t> sample, const TreeParams& params,
                          std::uint64_t seed) {
    DecisionTree tree;
    Builder b{data, params, Rng(seed), tree.nodes_, {}};
    b.feature_order.resize(data.features());
    std::iota(b.feature_order.begin(), b.feature_order.end(), std::uint32_t{0});
    b.build(sample, 0);
    return tree;
  }

  float predict_fraction(const FeatureVector& x) const {
    std::int32_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = x.at(static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].positive_fraction;
  }

  float predict_fraction(const TrainingMatrix& data, std::size_t row) const {
    std::int32_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = data.value(row, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].positive_fraction;
  }

  const std::vector<Node>& nodes() const { return nodes_; }

  int depth() const { return nodes_.empty() ? 0 : depth_of(0); }

 private:
  int depth_of(std::int32_t i) const {
    if (nodes_[i].feature < 0) return 0;
    return 1 + std::max(depth_of(nodes_[i].left), depth_of(nodes_[i].right));
  }

  struct Split {
    bool found = false;
    std::uint32_t feature = 0;
    float threshold = 0;
    double gain = 0;
  };

  struct Builder {
    const TrainingMatrix& data;
    const TreeParams& params;
    Rng rng;
    std::vector<Node>& nodes;
    std::vector<std::uint32_t> feature_order;
    std::vector<std::pair<float, char>> scratch{};

    std::int32_t build(std::vector<std::uint32_t>& sample, int depth) {
      const auto id = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      std::size_t positives = 0;
      for (auto r : sample) positives += data.label(r);
      nodes[id].positive_fraction = static_cast<float>(static_cast<double>(positives) / static_cast<double>(sample.size()));

      const bool pure = positives == 0 || positives == sample.size();
      const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
      if (pure || depth_capped || sample.size() < params.min_samples_split ||
          sample.size() < 2 * params.min_samples_leaf) {
        return id;
      }
      const Split split = best_split(sample, positives);
      if (!split.found) return id;

      std::vector<std::uint32_t> left, right;
      for (auto r : sample) (data.value(r, split.feature) <= split.threshold ? left : right).push_back(r);
      sample.clear();
      sample.shrink_to_fit();
      nodes[id].feature = static_cast<std::int32_t>(split.feature);
      nodes[id].threshold = split.threshold;
      const auto l = build(left, depth + 1);
      nodes[id].left = l;
      const auto r = build(right, depth + 1);
      nodes[id].right = r;
      return id;
    }

    // Visits features in random order until `max_features` non-constant ones
    // have been evaluated (constant features do not count).
    Split best_split(const std::vector<std::uint32_t>& sample, std::size_t positives) {
      const std::size_t nf = feature_order.size();
      const std::size_t wanted = params.max_features == 0 ? nf : std::min(params.max_features, nf);
      const double n = static_cast<double>(sample.size());
      const double parent = gini(static_cast<double>(positives), n);
      Split best;
      std::size_t evaluated = 0;
      for (std::size_t k = 0; k < nf && evaluated < wanted; ++k) {
        const auto j = k + rng.below(nf - k);
        std::swap(feature_order[k], feature_order[j]);
        const auto f = feature_order[k];

        scratch.clear();
        float lo = data.value(sample.front(), f), hi = lo;
        for (auto r : sample) {
          const float v = data.value(r, f);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          scratch.emplace_back(v, static_cast<char>(data.label(r)));
        }
        if (lo == hi) continue;
        ++evaluated;
        std::sort(scratch.begin(), scratch.end());

        double left_pos = 0;
        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
          left_pos += scratch[i].second;
          if (scratch[i].first == scratch[i + 1].first) continue;
          const std::size_t nl = i + 1;
          const std::size_t nr = scratch.size() - nl;
          if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
          const double dl = static_cast<double>(nl);
          const double dr = static_cast<double>(nr);
          const double child = (dl * gini(left_pos, dl) + dr * gini(static_cast<double>(positives) - left_pos, dr)) / n;
          const double gain = parent - child;
          if (!best.found || gain > best.gain) {
            float mid = scratch[i].first + (scratch[i + 1].first - scratch[i].first) / 2.0f;
            if (!(mid < scratch[i + 1].first)) mid = scratch[i].first;
            best = {true, f, mid, gain};
          }
        }
      }
      return best;
    }

    static double gini(double pos, double total) {
      const double p = pos / total;
      return 2.0 * p * (1.0 - p);
    }
  };

  std::vector<Node> nodes_;
};

}  // namespace imentor
