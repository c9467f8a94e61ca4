#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "imentor/core/error.hpp"
#include "imentor/core/parallel.hpp"
#include "imentor/ingestion/types.hpp"

namespace imentor {

/// Binary, as produced by name-based inference services. This is a limit of
/// the instrument, not a claim about contributors.
enum class Gender { woman, man };

inline std::string_view to_string(Gender g) { return g == Gender::woman ? "woman" : "man"; }

inline Gender parse_gender(std::string_view s) {
  if (s == "woman") return Gender::woman;
  if (s == "man") return Gender::man;
  throw DataError("unknown gender class '" + std::string(s) + "'");
}

inline constexpr double kDefaultConfidenceCutoff = 0.90;

struct GenderRecord {
  std::string contributor;
  Gender inferred = Gender::man;
  double probability = 0;  // confidence in [0, 1]
  std::string source;
};

struct NameQuery {
  std::string name;
  std::string location;  // empty when unknown
  friend auto operator<=>(const NameQuery&, const NameQuery&) = default;
};

struct GenderEstimate {
  Gender gender = Gender::man;
  double confidence = 0;
};

/// Maps the service's -1 (man) .. +1 (woman) scale to a class and a
/// confidence |scale|.
inline GenderEstimate from_scale(double scale) {
  if (!(scale >= -1.0 && scale <= 1.0)) throw ClientError("gender scale out of [-1, 1]");
  return {scale > 0 ? Gender::woman : Gender::man, std::fabs(scale)};
}

/// Name-based gender inference service.
class GenderClient {
 public:
  virtual ~GenderClient() = default;
  virtual std::string id() const = 0;
  /// Raw score on the -1 .. +1 scale. Throws ClientError on failure.
  virtual double gender_scale(const NameQuery& query) = 0;
};

/// Deterministic offline client backed by a `name<TAB>location<TAB>scale`
/// file. An entry with an empty location matches any location. Unknown
/// names score 0 (no information).
class FixtureGenderClient final : public GenderClient {
 public:
  FixtureGenderClient() = default;
  explicit FixtureGenderClient(std::map<NameQuery, double> table) : table_(std::move(table)) {}
  FixtureGenderClient(FixtureGenderClient&& other) noexcept
      : table_(std::move(other.table_)), calls_(other.calls_.load()) {}

  static FixtureGenderClient from_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read gender fixture " + file.string());
    std::map<NameQuery, double> table;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string name, location, scale;
      if (!std::getline(fields, name, '\t') || !std::getline(fields, location, '\t') || !std::getline(fields, scale)) {
        throw DataError(file.filename().string() + ":" + std::to_string(number) + ": expected 3 tab-separated fields");
      }
      table[{name, location}] = std::stod(scale);
    }
    return FixtureGenderClient(std::move(table));
  }

  std::string id() const override { return "fixture"; }

  double gender_scale(const NameQuery& query) override {
    ++calls_;
    if (auto it = table_.find(query); it != table_.end()) return it->second;
    if (auto it = table_.find({query.name, ""}); it != table_.end()) return it->second;
    return 0.0;
  }

  std::size_t calls() const { return calls_; }

 private:
  std::map<NameQuery, double> table_;
  std::atomic<std::size_t> calls_{0};
};

struct CachedEstimate {
  Gender gender = Gender::man;
  double confidence = 0;
};

/// On-disk cache keyed by (name, location); lines are
/// `name<TAB>location<TAB>class<TAB>confidence`. Many readers, one writer.
class GenderCache {
 public:
  GenderCache() = default;
  GenderCache(GenderCache&& other) noexcept {
    std::unique_lock lock(other.mutex_);
    entries_ = std::move(other.entries_);
  }
  GenderCache& operator=(GenderCache&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mutex_, other.mutex_);
      entries_ = std::move(other.entries_);
    }
    return *this;
  }

  static GenderCache load(const std::filesystem::path& file) {
    GenderCache cache;
    std::ifstream in(file);
    if (!in) return cache;  // no cache yet
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string name, location, cls, conf;
      if (!std::getline(fields, name, '\t') || !std::getline(fields, location, '\t') ||
          !std::getline(fields, cls, '\t') || !std::getline(fields, conf)) {
        throw DataError(file.filename().string() + ":" + std::to_string(number) + ": malformed cache line");
      }
      cache.entries_[{name, location}] = {parse_gender(cls), std::stod(conf)};
    }
    return cache;
  }

  void save(const std::filesystem::path& file) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(file);
    if (!out) throw DataError("cannot write gender cache " + file.string());
    char buf[64];
    for (const auto& [q, e] : entries_) {
      std::snprintf(buf, sizeof buf, "%.17g", e.confidence);
      out << q.name << '\t' << q.location << '\t' << to_string(e.gender) << '\t' << buf << '\n';
    }
  }

  std::optional<CachedEstimate> find(const NameQuery& q) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(q);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void insert(const NameQuery& q, CachedEstimate e) {
    std::unique_lock lock(mutex_);
    entries_[q] = e;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

 private:
  std::map<NameQuery, CachedEstimate> entries_;
  mutable std::shared_mutex mutex_;
};

struct InferenceOptions {
  double cutoff = kDefaultConfidenceCutoff;
  RetryPolicy retry{3, std::chrono::milliseconds(200), 2.0};
  std::size_t workers = 4;
  double requests_per_second = 0;  // 0: unlimited
  Sleeper sleeper = real_sleeper();
};

struct Unresolved {
  std::string contributor;
  std::string reason;
};

struct InferenceResult {
  std::vector<GenderRecord> records;      // confidence above cutoff, by login
  std::vector<std::string> below_cutoff;  // answered, but not confidently
  std::vector<Unresolved> unresolved;     // no usable input or client failure
  std::size_t client_calls = 0;
};

inline NameQuery query_for(const Contributor& c) { return {c.display_name.value_or(""), c.location.value_or("")}; }

/// Infers gender for each contributor with a display name. Cached answers
/// are reused; only cache misses reach the client, in bounded parallel with
/// retry/backoff and an optional rate limit.
inline InferenceResult infer_genders(std::span<const Contributor> contributors, GenderClient& client,
                                     GenderCache& cache, const InferenceOptions& opts = {}) {
  InferenceResult out;
  std::vector<NameQuery> misses;
  {
    std::set<NameQuery> seen;
    for (const auto& c : contributors) {
      if (!c.display_name) continue;
      auto q = query_for(c);
      if (!cache.find(q) && seen.insert(q).second) misses.push_back(std::move(q));
    }
  }

  RateLimiter limiter(opts.requests_per_second, std::max(1.0, opts.requests_per_second), opts.sleeper);
  struct Answer {
    std::optional<double> scale;
    std::string error;
  };
  std::atomic<std::size_t> calls{0};
  auto answers = parallel_map<Answer>(misses.size(), opts.workers, [&](std::size_t i) {
    try {
      const double s = with_retries<ClientError>(opts.retry, opts.sleeper, [&] {
        limiter.acquire();
        ++calls;
        return client.gender_scale(misses[i]);
      });
      return Answer{s, {}};
    } catch (const Error& e) {
      return Answer{std::nullopt, e.what()};
    }
  });
  out.client_calls = calls;

  std::map<NameQuery, std::string> failures;
  for (std::size_t i = 0; i < misses.size(); ++i) {
    if (!answers[i].scale) {
      failures[misses[i]] = answers[i].error;
      continue;
    }
    try {
      const auto e = from_scale(*answers[i].scale);
      cache.insert(misses[i], {e.gender, e.confidence});
    } catch (const ClientError& err) {
      failures[misses[i]] = err.what();
    }
  }

  for (const auto& c : contributors) {
    if (!c.display_name) {
      out.unresolved.push_back({c.login, "no display name"});
      continue;
    }
    const auto q = query_for(c);
    if (auto f = failures.find(q); f != failures.end()) {
      out.unresolved.push_back({c.login, f->second});
      continue;
    }
    const auto hit = cache.find(q);
    if (!hit) {
      out.unresolved.push_back({c.login, "no answer"});
      continue;
    }
    if (hit->confidence > opts.cutoff) {
      out.records.push_back({c.login, hit->gender, hit->confidence, client.id()});
    } else {
      out.below_cutoff.push_back(c.login);
    }
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const auto& a, const auto& b) { return a.contributor < b.contributor; });
  return out;
}

// ---- gender records file ----

inline void write_gender_records(std::span<const GenderRecord> records, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  char buf[64];
  out << "contributor\tinferred\tprobability\tsource\n";
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.probability);
    out << r.contributor << '\t' << to_string(r.inferred) << '\t' << buf << '\t' << r.source << '\n';
  }
}

inline std::vector<GenderRecord> read_gender_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file.string());
  std::vector<GenderRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    if (++number == 1 || line.empty()) continue;
    std::istringstream fields(line);
    std::string login, cls, prob, source;
    if (!std::getline(fields, login, '\t') || !std::getline(fields, cls, '\t') || !std::getline(fields, prob, '\t') ||
        !std::getline(fields, source)) {
      throw DataError(file.filename().string() + ":" + std::to_string(number) + ": malformed gender record");
    }
    out.push_back({login, parse_gender(cls), std::stod(prob), source});
  }
  return out;
}

}  // namespace imentor
