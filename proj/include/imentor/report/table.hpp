#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imentor/core/error.hpp"
#include "imentor/report/config.hpp"

namespace imentor {

/// A typed table value. Rendering only rounds; every number shown is stored
/// here as computed.
struct Cell {
  enum class Kind { missing, text, count, count_share, percent, statistic, alpha, p_value, real };

  Kind kind = Kind::missing;
  std::string text;
  long long count = 0;
  double value = 0;

  static Cell missing() { return {}; }
  static Cell of_text(std::string s) { return {Kind::text, std::move(s)}; }
  static Cell of_count(long long n) { return {Kind::count, {}, n}; }
  static Cell of_count_share(long long n, double share) { return {Kind::count_share, {}, n, share}; }
  static Cell of_percent(double share) { return {Kind::percent, {}, 0, share}; }
  static Cell of_statistic(double v) { return {Kind::statistic, {}, 0, v}; }
  static Cell of_alpha(double v) { return {Kind::alpha, {}, 0, v}; }
  static Cell of_p(double v) { return {Kind::p_value, {}, 0, v}; }
  static Cell of_real(double v) { return {Kind::real, {}, 0, v}; }

  template <typename T>
  static Cell maybe(const std::optional<T>& v, Cell (*make)(T)) {
    return v ? make(*v) : missing();
  }
};

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  // "-0.00" reads as a sign that is not there
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace detail

/// Display precision: percentages and statistics to 2 decimals, alpha to 3,
/// p-values to 3 with "<0.001" below that.
inline std::string display(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::missing:
      return "NA";
    case Cell::Kind::text:
      return c.text;
    case Cell::Kind::count:
      return std::to_string(c.count);
    case Cell::Kind::count_share:
      return std::to_string(c.count) + " (" + detail::fixed(c.value * 100.0, 2) + "%)";
    case Cell::Kind::percent:
      return detail::fixed(c.value * 100.0, 2) + "%";
    case Cell::Kind::statistic:
    case Cell::Kind::real:
      return detail::fixed(c.value, 2);
    case Cell::Kind::alpha:
      return detail::fixed(c.value, 3);
    case Cell::Kind::p_value:
      return c.value < 0.001 ? "<0.001" : detail::fixed(c.value, 3);
  }
  return "NA";
}

struct Table {
  Table() = default;
  Table(std::string name_, std::string title_, std::vector<std::string> columns_)
      : name(std::move(name_)), title(std::move(title_)), columns(std::move(columns_)) {}

  std::string name;  // file stem
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw ArgumentError("table " + name + ": row width does not match header");
    rows.push_back(std::move(row));
  }
};

enum class StageStatus { ok, failed, skipped };

inline std::string_view to_string(StageStatus s) {
  return s == StageStatus::ok ? "ok" : s == StageStatus::failed ? "failed" : "skipped";
}

struct StageReport {
  std::string stage;
  StageStatus status = StageStatus::ok;
  std::string detail;
};

struct Bundle {
  std::string config_hash;
  std::uint64_t seed_sample = 0;
  std::uint64_t seed_train = 0;
  std::vector<StageReport> stages;
  std::vector<Table> tables;

  bool partial() const {
    for (const auto& s : stages) {
      if (s.status != StageStatus::ok) return true;
    }
    return false;
  }

  const Table* find(std::string_view name) const {
    for (const auto& t : tables) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string render_plain(const Table& t, const Bundle& b) {
  std::vector<std::vector<std::string>> grid{t.columns};
  for (const auto& row : t.rows) {
    std::vector<std::string> line;
    for (const auto& c : row) line.push_back(display(c));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out = t.title + "\n";
  out += "config_hash=" + b.config_hash + " seed_sample=" + std::to_string(b.seed_sample) +
         " seed_train=" + std::to_string(b.seed_train) + "\n\n";
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      if (i) line += "  ";
      line += grid[r][i];
      if (i + 1 < grid[r].size()) line.append(width[i] - grid[r][i].size(), ' ');
    }
    line.erase(line.find_last_not_of(' ') + 1);
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
    }
  }
  if (t.rows.empty()) out += "(no rows)\n";
  for (const auto& n : t.notes) out += "note: " + n + "\n";
  return out;
}

inline std::string render_csv(const Table& t, const Bundle& b) {
  std::string out;
  for (const auto& c : t.columns) out += csv_field(c) + ",";
  out += "config_hash,seed_sample,seed_train\n";
  const std::string tail = b.config_hash + "," + std::to_string(b.seed_sample) + "," + std::to_string(b.seed_train);
  for (const auto& row : t.rows) {
    for (const auto& c : row) out += csv_field(display(c)) + ",";
    out += tail + "\n";
  }
  return out;
}

inline std::string render_json_lines(const Table& t, const Bundle& b) {
  std::string out;
  for (const auto& row : t.rows) {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < row.size(); ++i) j[t.columns[i]] = display(row[i]);
    j["config_hash"] = b.config_hash;
    j["seed_sample"] = b.seed_sample;
    j["seed_train"] = b.seed_train;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string_view extension(Format f) {
  switch (f) {
    case Format::plain:
      return ".txt";
    case Format::csv:
      return ".csv";
    case Format::json_lines:
    default:
      return ".jsonl";
  }
}

inline std::string render(const Table& t, const Bundle& b, Format f) {
  switch (f) {
    case Format::plain:
      return render_plain(t, b);
    case Format::csv:
      return render_csv(t, b);
    case Format::json_lines:
    default:
      return render_json_lines(t, b);
  }
}

inline std::string render(const Table& t, const Bundle& b, std::string_view format) {
  return render(t, b, parse_format(format));
}

/// Writes one file per table and format into `dir`. Returns the paths.
inline std::vector<std::filesystem::path> write_bundle(const Bundle& b, const std::filesystem::path& dir,
                                                       const std::vector<Format>& formats) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : b.tables) {
    for (auto f : formats) {
      const auto file = dir / (t.name + std::string(extension(f)));
      std::ofstream out(file, std::ios::binary);
      if (!out) throw DataError("cannot write " + file.string());
      out << render(t, b, f);
      written.push_back(file);
    }
  }
  return written;
}

}  // namespace imentor
