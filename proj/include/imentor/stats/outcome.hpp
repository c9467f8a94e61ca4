#pragma once

#include <optional>
#include <span>
#include <string>

#include "imentor/core/error.hpp"
#include "imentor/stats/tests.hpp"

namespace imentor {

/// One table cell holding a test. `result` is absent when the test could
/// not run (degenerate or empty groups) and `error` then says why.
struct TestOutcome {
  std::optional<stats::StatResult> result;
  std::string error;
};

inline TestOutcome guarded_z_test(long long x1, long long n1, long long x2, long long n2,
                                  const stats::TestOptions& opts) {
  try {
    return {stats::two_prop_z_test(x1, n1, x2, n2, opts), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

inline TestOutcome guarded_welch(std::span<const double> a, std::span<const double> b,
                                 const stats::TestOptions& opts) {
  try {
    return {stats::welch_t_test(a, b, opts), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace imentor
