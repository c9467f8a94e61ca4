#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string_view>

#include "imentor/core/error.hpp"
#include "imentor/stats/distributions.hpp"

namespace imentor::stats {

enum class EffectKind { cohens_d, cohens_h };

inline std::string_view to_string(EffectKind k) { return k == EffectKind::cohens_d ? "cohens-d" : "cohens-h"; }

/// Alternative hypothesis. `less` means estimate < 0.
enum class Tail { two_sided, less, greater };

/// Uniform result of every hypothesis test.
struct StatResult {
  double statistic = 0.0;
  std::optional<double> df;  // absent for z tests
  double p_value = 1.0;
  double estimate = 0.0;     // mean difference, or p1 - p2
  double effect_size = 0.0;  // absolute value
  EffectKind effect_kind = EffectKind::cohens_d;
  double alpha_adjusted = 0.05;

  /// P-value under the other one-sided convention a reader might expect:
  /// upper tail of |statistic|. Reported alongside in verbose output.
  double p_one_sided = 0.5;

  bool significant() const { return p_value < alpha_adjusted; }
};

struct TestOptions {
  Tail tail = Tail::two_sided;
  double alpha = 0.05;
};

/// Bonferroni-adjusted per-test significance level.
inline double bonferroni(double alpha, int tests) {
  if (tests < 1) {
    throw ArgumentError("bonferroni: number of tests must be >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ArgumentError("bonferroni: alpha must lie in (0, 1)");
  }
  return alpha / tests;
}

namespace detail {

struct Moments {
  double n = 0;
  double mean = 0;
  double var = 0;  // sample variance, n - 1 denominator
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = static_cast<double>(xs.size());
  if (xs.empty()) {
    return m;
  }
  double sum = 0;
  for (double x : xs) sum += x;
  m.mean = sum / m.n;
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.var = ss / (m.n - 1);
  }
  return m;
}

inline double tail_p(Tail tail, double upper, double lower, double two_sided) {
  switch (tail) {
    case Tail::less:
      return lower;
    case Tail::greater:
      return upper;
    case Tail::two_sided:
    default:
      return two_sided;
  }
}

}  // namespace detail

/// Cohen's d with pooled standard deviation; absolute value.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateError("cohens_d: each sample needs at least 2 values");
  }
  const auto ma = detail::moments(a);
  const auto mb = detail::moments(b);
  const double pooled = ((ma.n - 1) * ma.var + (mb.n - 1) * mb.var) / (ma.n + mb.n - 2);
  if (!(pooled > 0.0)) {
    throw DegenerateError("cohens_d: pooled variance is zero");
  }
  return std::fabs(ma.mean - mb.mean) / std::sqrt(pooled);
}

/// Cohen's h = 2 asin sqrt(p1) - 2 asin sqrt(p2); absolute value.
inline double cohens_h(double p1, double p2) {
  return std::fabs(2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2)));
}

/// Welch two-sample t-test (unequal variances). estimate = mean(a) - mean(b).
inline StatResult welch_t_test(std::span<const double> a, std::span<const double> b, TestOptions opts = {}) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateError("welch_t_test: each sample needs at least 2 values");
  }
  const auto ma = detail::moments(a);
  const auto mb = detail::moments(b);
  const double va = ma.var / ma.n;
  const double vb = mb.var / mb.n;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    throw DegenerateError("welch_t_test: both samples have zero variance");
  }
  StatResult r;
  r.estimate = ma.mean - mb.mean;
  r.statistic = r.estimate / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (ma.n - 1) + vb * vb / (mb.n - 1));
  r.df = df;
  const double upper = student_t_sf(r.statistic, df);
  const double lower = student_t_sf(-r.statistic, df);
  r.p_value = detail::tail_p(opts.tail, upper, lower, student_t_two_sided(r.statistic, df));
  r.p_one_sided = student_t_sf(std::fabs(r.statistic), df);
  r.effect_kind = EffectKind::cohens_d;
  r.effect_size = cohens_d(a, b);
  r.alpha_adjusted = opts.alpha;
  return r;
}

/// Pooled two-proportion z-test. estimate = x1/n1 - x2/n2; effect = |Cohen's h|.
inline StatResult two_prop_z_test(long long x1, long long n1, long long x2, long long n2, TestOptions opts = {}) {
  if (n1 < 1 || n2 < 1) {
    throw ArgumentError("two_prop_z_test: group sizes must be >= 1");
  }
  if (x1 < 0 || x1 > n1 || x2 < 0 || x2 > n2) {
    throw ArgumentError("two_prop_z_test: successes must lie in [0, n]");
  }
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  if (x1 + x2 == 0 || x1 + x2 == n1 + n2) {
    throw DegenerateError("two_prop_z_test: pooled proportion is 0 or 1");
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  StatResult r;
  r.estimate = p1 - p2;
  r.statistic = r.estimate / se;
  const double upper = normal_sf(r.statistic);
  const double lower = normal_sf(-r.statistic);
  r.p_value = detail::tail_p(opts.tail, upper, lower, 2.0 * normal_sf(std::fabs(r.statistic)));
  r.p_one_sided = normal_sf(std::fabs(r.statistic));
  r.effect_kind = EffectKind::cohens_h;
  r.effect_size = cohens_h(p1, p2);
  r.alpha_adjusted = opts.alpha;
  return r;
}

}  // namespace imentor::stats
