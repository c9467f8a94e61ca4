#pragma once

#include <stdexcept>
#include <string>

namespace imentor {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller passed something outside an operation's domain.
struct ArgumentError : Error {
  using Error::Error;
};

/// Unreadable input, malformed file, broken invariant in persisted data.
struct DataError : Error {
  using Error::Error;
};

/// A statistic is undefined for the given input (zero variance, p = 0 or 1).
struct DegenerateError : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

/// Remote service failure that survived retries.
struct ClientError : Error {
  using Error::Error;
};

}  // namespace imentor
