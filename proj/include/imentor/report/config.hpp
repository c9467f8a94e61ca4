#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "imentor/classifier/model.hpp"
#include "imentor/core/error.hpp"
#include "imentor/core/random.hpp"
#include "imentor/demography/gender.hpp"
#include "imentor/relations/relations.hpp"

namespace imentor {

enum class Format { plain, csv, json_lines };

inline std::string_view to_string(Format f) {
  switch (f) {
    case Format::plain:
      return "plain";
    case Format::csv:
      return "csv";
    case Format::json_lines:
    default:
      return "json-lines";
  }
}

inline Format parse_format(std::string_view s) {
  if (s == "plain") return Format::plain;
  if (s == "csv") return Format::csv;
  if (s == "json-lines" || s == "jsonl") return Format::json_lines;
  throw ArgumentError("unknown format '" + std::string(s) + "' (plain, csv, json-lines)");
}

struct GenderConfig {
  std::string client = "fixture";  // fixture | http
  std::optional<std::filesystem::path> fixture;
  std::optional<std::filesystem::path> cache;
  double cutoff = kDefaultConfidenceCutoff;
  double requests_per_second = 1.0;
};

/// Everything that determines a report. Relative paths are resolved against
/// `base_dir` (the directory of the config file).
struct Config {
  std::filesystem::path base_dir = ".";
  std::filesystem::path store;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> model;
  Family family = Family::random_forest;
  Hyperparameters hyperparameters = nlohmann::json::object();
  std::vector<Family> evaluate{std::begin(kAllFamilies), std::end(kAllFamilies)};
  std::size_t folds = 10;
  GenderConfig genders;
  std::uint64_t seed_sample = 0;
  std::uint64_t seed_train = 0;
  double alpha = 0.05;
  int bonferroni_tests = 3;
  int threshold_days = kDefaultThresholdDays;
  std::vector<Format> formats{Format::plain, Format::csv, Format::json_lines};
  bool verbose = false;
  bool offline = false;
  std::size_t workers = 0;  // does not affect results

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ArgumentError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.contains(k)) throw ArgumentError("unknown config key '" + where + k + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline std::optional<std::filesystem::path> optional_path(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ArgumentError(std::string("config key '") + key + "' must be a path string");
  return std::filesystem::path(it->get<std::string>());
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j, std::filesystem::path base_dir = ".") {
  detail::check_keys(j,
                     {"store", "labels", "model", "classifier", "genders", "seeds", "alpha", "bonferroni_tests",
                      "threshold_days", "formats", "verbose", "offline", "workers"},
                     "");
  Config c;
  c.base_dir = std::move(base_dir);
  auto store = detail::optional_path(j, "store");
  if (!store) throw ArgumentError("config needs 'store'");
  c.store = *store;
  c.labels = detail::optional_path(j, "labels");
  c.model = detail::optional_path(j, "model");
  if (auto it = j.find("classifier"); it != j.end()) {
    detail::check_keys(*it, {"family", "hyperparameters", "evaluate", "folds"}, "classifier.");
    c.family = parse_family(detail::get_or<std::string>(*it, "family", std::string(to_string(c.family))));
    c.hyperparameters = detail::get_or<nlohmann::json>(*it, "hyperparameters", nlohmann::json::object());
    resolve_hyperparameters(c.family, c.hyperparameters);
    if (auto e = it->find("evaluate"); e != it->end()) {
      c.evaluate.clear();
      for (const auto& f : *e) c.evaluate.push_back(parse_family(f.get<std::string>()));
    }
    c.folds = detail::get_or<std::size_t>(*it, "folds", c.folds);
  }
  if (auto it = j.find("genders"); it != j.end()) {
    detail::check_keys(*it, {"client", "fixture", "cache", "cutoff", "requests_per_second"}, "genders.");
    c.genders.client = detail::get_or<std::string>(*it, "client", c.genders.client);
    if (c.genders.client != "fixture" && c.genders.client != "http") {
      throw ArgumentError("genders.client must be 'fixture' or 'http'");
    }
    c.genders.fixture = detail::optional_path(*it, "fixture");
    c.genders.cache = detail::optional_path(*it, "cache");
    c.genders.cutoff = detail::get_or<double>(*it, "cutoff", c.genders.cutoff);
    c.genders.requests_per_second = detail::get_or<double>(*it, "requests_per_second", c.genders.requests_per_second);
  }
  if (auto it = j.find("seeds"); it != j.end()) {
    detail::check_keys(*it, {"sample", "train"}, "seeds.");
    c.seed_sample = detail::get_or<std::uint64_t>(*it, "sample", 0);
    c.seed_train = detail::get_or<std::uint64_t>(*it, "train", 0);
  }
  c.alpha = detail::get_or<double>(j, "alpha", c.alpha);
  c.bonferroni_tests = detail::get_or<int>(j, "bonferroni_tests", c.bonferroni_tests);
  c.threshold_days = detail::get_or<int>(j, "threshold_days", c.threshold_days);
  if (auto it = j.find("formats"); it != j.end()) {
    c.formats.clear();
    for (const auto& f : *it) c.formats.push_back(parse_format(f.get<std::string>()));
  }
  c.verbose = detail::get_or<bool>(j, "verbose", false);
  c.offline = detail::get_or<bool>(j, "offline", false);
  c.workers = detail::get_or<std::size_t>(j, "workers", 0);
  if (!(c.alpha > 0 && c.alpha < 1)) throw ArgumentError("alpha must lie in (0, 1)");
  if (c.bonferroni_tests < 1) throw ArgumentError("bonferroni_tests must be >= 1");
  if (c.threshold_days < 0) throw ArgumentError("threshold_days must be >= 0");
  return c;
}

inline Config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArgumentError("cannot read config " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("config " + file.string() + ": " + e.what());
  }
  return config_from_json(j, file.parent_path().empty() ? "." : file.parent_path());
}

/// Canonical form of the settings that influence results (paths as
/// written, so the hash does not depend on where the tree is checked out).
inline nlohmann::json to_json(const Config& c) {
  nlohmann::json j;
  j["store"] = c.store.generic_string();
  j["labels"] = c.labels ? nlohmann::json(c.labels->generic_string()) : nlohmann::json();
  j["model"] = c.model ? nlohmann::json(c.model->generic_string()) : nlohmann::json();
  nlohmann::json families = nlohmann::json::array();
  for (auto f : c.evaluate) families.push_back(to_string(f));
  j["classifier"] = {{"family", to_string(c.family)},
                     {"hyperparameters", c.hyperparameters},
                     {"evaluate", families},
                     {"folds", c.folds}};
  j["genders"] = {{"client", c.genders.client},
                  {"fixture", c.genders.fixture ? nlohmann::json(c.genders.fixture->generic_string()) : nlohmann::json()},
                  {"cache", c.genders.cache ? nlohmann::json(c.genders.cache->generic_string()) : nlohmann::json()},
                  {"cutoff", c.genders.cutoff}};
  j["seeds"] = {{"sample", c.seed_sample}, {"train", c.seed_train}};
  j["alpha"] = c.alpha;
  j["bonferroni_tests"] = c.bonferroni_tests;
  j["threshold_days"] = c.threshold_days;
  j["verbose"] = c.verbose;
  j["offline"] = c.offline;
  return j;
}

inline std::string config_hash(const Config& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

}  // namespace imentor
