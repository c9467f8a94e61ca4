#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "imentor/core/error.hpp"
#include "imentor/core/random.hpp"
#include "imentor/stats/distributions.hpp"

namespace imentor {

/// Cochran's sample size with p = 0.5 and finite-population correction,
/// rounded up.
inline std::int64_t required_sample_size(std::int64_t population, double confidence, double margin) {
  if (population < 1) throw ArgumentError("required_sample_size: population must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ArgumentError("required_sample_size: confidence must lie in (0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw ArgumentError("required_sample_size: margin must lie in (0, 1)");
  const double z = stats::normal_quantile(1.0 - (1.0 - confidence) / 2.0);
  const double n0 = z * z * 0.25 / (margin * margin);
  const double n = n0 / (1.0 + (n0 - 1.0) / static_cast<double>(population));
  // Absorb representation error so an exact integer never rounds up to the next.
  const auto rounded = static_cast<std::int64_t>(std::ceil(n - 1e-9));
  return std::clamp<std::int64_t>(rounded, 1, population);
}

/// `size` distinct indices from [0, population), uniformly, in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t size, std::uint64_t seed) {
  if (size > population) throw ArgumentError("sample size exceeds population");
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = i + rng.below(population - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  return idx;
}

}  // namespace imentor
