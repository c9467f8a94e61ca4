#pragma once

#include <ranges>

#include "imentor/core/error.hpp"

namespace imentor {

/// Cohen's kappa for two aligned binary label sequences. When chance
/// agreement is 1 the ratio is 0/0; it is defined as 1 for perfect
/// agreement, else 0.
template <std::ranges::sized_range A, std::ranges::sized_range B>
double cohens_kappa(const A& a, const B& b) {
  if (std::ranges::size(a) != std::ranges::size(b)) throw ArgumentError("cohens_kappa: label vectors differ in length");
  if (std::ranges::empty(a)) throw ArgumentError("cohens_kappa: no labels");
  const double n = static_cast<double>(std::ranges::size(a));
  double agree = 0, a_true = 0, b_true = 0;
  auto ib = std::ranges::begin(b);
  for (auto ia = std::ranges::begin(a); ia != std::ranges::end(a); ++ia, ++ib) {
    const bool x = *ia;
    const bool y = *ib;
    agree += x == y;
    a_true += x;
    b_true += y;
  }
  const double po = agree / n;
  const double pa = a_true / n;
  const double pb = b_true / n;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace imentor
