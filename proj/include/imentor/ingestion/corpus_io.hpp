#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "imentor/core/error.hpp"
#include "imentor/core/time.hpp"
#include "imentor/ingestion/types.hpp"

namespace imentor {

/// A record that failed validation, with where it came from.
struct Rejection {
  std::string origin;  // "file:line" or an API path
  std::string reason;
};

struct LoadResult {
  Corpus corpus;
  std::vector<Rejection> rejections;
};

inline constexpr std::string_view kPrSuffix = ".prs.ndjson";
inline constexpr std::string_view kCommentSuffix = ".comments.ndjson";
inline constexpr std::string_view kContributorSuffix = ".contributors.ndjson";

/// File-name stem for a project ("apache/kafka" -> "apache__kafka").
inline std::string project_file_stem(std::string_view project) {
  std::string out;
  for (char c : project) {
    if (c == '/' || c == '\\') {
      out += "__";
    } else {
      out += c;
    }
  }
  return out;
}

/// CRLF to LF, trims surrounding whitespace.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '\r') out += c;
  }
  const auto first = out.find_first_not_of(" \t\n\v\f");
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(" \t\n\v\f");
  return out.substr(first, last - first + 1);
}

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw DataError(std::string("missing field '") + field + "'");
  }
  return *it;
}

inline std::string require_string(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) throw DataError(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

inline std::int64_t require_int(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number_integer()) throw DataError(std::string("field '") + field + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::optional<std::string> optional_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + field + "' must be a string or null");
  auto s = normalize_text(it->get<std::string>());
  if (s.empty()) return std::nullopt;
  return s;
}

inline bool optional_bool(const json& j, const char* field, bool fallback) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) throw DataError(std::string("field '") + field + "' must be a boolean");
  return it->get<bool>();
}

}  // namespace detail

/// Parses raw records, validates them, and assembles a Corpus. Shared by the
/// file loader and the hosting-API crawler so both apply the same rules.
class CorpusBuilder {
 public:
  using json = nlohmann::json;

  void add_contributor(const json& record, std::string origin) {
    contributors_.push_back({record, std::move(origin), {}});
  }
  void add_pr(const json& record, std::string stem, std::string origin) {
    prs_.push_back({record, std::move(origin), std::move(stem)});
  }
  void add_comment(const json& record, std::string stem, std::string origin) {
    comments_.push_back({record, std::move(origin), std::move(stem)});
  }
  void reject(std::string origin, std::string reason) { rejections_.push_back({std::move(origin), std::move(reason)}); }
  void add_project(std::string project) { extra_projects_.insert(std::move(project)); }

  LoadResult finish() {
    std::map<std::string, Contributor> people;
    for (const auto& raw : contributors_) {
      try {
        Contributor c = parse_contributor(raw.record);
        auto [it, inserted] = people.emplace(c.login, c);
        if (!inserted && !same_contributor(it->second, c)) {
          reject(raw.origin, "conflicting duplicate contributor '" + c.login + "'");
        }
      } catch (const Error& e) {
        reject(raw.origin, e.what());
      }
    }

    std::map<PrKey, PullRequest> prs;
    std::map<std::string, std::string> stem_to_project;
    std::set<std::string> projects = extra_projects_;
    for (const auto& raw : prs_) {
      try {
        PullRequest pr = parse_pr(raw.record);
        if (!raw.stem.empty() && project_file_stem(pr.project) != raw.stem) {
          throw DataError("project '" + pr.project + "' does not match file stem '" + raw.stem + "'");
        }
        auto who = people.find(pr.author);
        if (who == people.end()) throw DataError("unknown PR author '" + pr.author + "'");
        if (!who->second.deleted && pr.created_at < who->second.account_created_at) {
          throw DataError("PR predates its author's account");
        }
        if (!prs.emplace(pr.key(), pr).second) {
          throw DataError("duplicate PR " + pr.project + "#" + std::to_string(pr.pr_id));
        }
        stem_to_project.emplace(project_file_stem(pr.project), pr.project);
        projects.insert(pr.project);
      } catch (const Error& e) {
        reject(raw.origin, e.what());
      }
    }

    std::map<std::int64_t, PRComment> comments;
    for (const auto& raw : comments_) {
      try {
        PRComment c = parse_comment(raw.record);
        auto sp = stem_to_project.find(raw.stem);
        c.project = sp != stem_to_project.end() ? sp->second : raw.stem;
        auto pr = prs.find(c.pr_key());
        if (pr == prs.end()) throw DataError("comment references missing PR #" + std::to_string(c.pr));
        auto who = people.find(c.author);
        if (who == people.end()) throw DataError("unknown comment author '" + c.author + "'");
        if (c.created_at < pr->second.created_at) throw DataError("comment predates its PR");
        if (!who->second.deleted && c.created_at < who->second.account_created_at) {
          throw DataError("comment predates its author's account");
        }
        if (!comments.emplace(c.comment_id, c).second) {
          throw DataError("duplicate comment id " + std::to_string(c.comment_id));
        }
      } catch (const Error& e) {
        reject(raw.origin, e.what());
      }
    }

    LoadResult out;
    std::vector<Contributor> people_out;
    for (auto& [_, c] : people) people_out.push_back(std::move(c));
    std::vector<PullRequest> prs_out;
    for (auto& [_, p] : prs) prs_out.push_back(std::move(p));
    std::vector<PRComment> comments_out;
    for (auto& [_, c] : comments) comments_out.push_back(std::move(c));
    out.corpus = Corpus({projects.begin(), projects.end()}, std::move(prs_out), std::move(comments_out),
                        std::move(people_out));
    out.rejections = std::move(rejections_);
    return out;
  }

  static Contributor parse_contributor(const json& j) {
    if (!j.is_object()) throw DataError("contributor record is not an object");
    Contributor c;
    c.login = detail::require_string(j, "login");
    if (c.login.empty()) throw DataError("empty login");
    c.display_name = detail::optional_string(j, "display_name");
    c.location = detail::optional_string(j, "location");
    c.deleted = detail::optional_bool(j, "deleted", false);
    // An absent profile payload means the account no longer exists.
    auto created = j.find("account_created_at");
    if (created == j.end() || created->is_null()) {
      c.deleted = true;
    } else if (created->is_string()) {
      c.account_created_at = parse_timestamp(created->get<std::string>());
    } else {
      throw DataError("field 'account_created_at' must be a timestamp string");
    }
    return c;
  }

  static PullRequest parse_pr(const json& j) {
    if (!j.is_object()) throw DataError("PR record is not an object");
    PullRequest pr;
    pr.pr_id = detail::require_int(j, "pr_id");
    pr.project = detail::require_string(j, "project");
    if (pr.project.empty()) throw DataError("empty project");
    pr.author = detail::require_string(j, "author");
    pr.description = normalize_text(detail::optional_string(j, "description").value_or(""));
    pr.created_at = parse_timestamp(detail::require_string(j, "created_at"));
    pr.reopened = detail::optional_bool(j, "reopened", false);
    if (auto ev = j.find("events"); ev != j.end() && ev->is_array()) {
      for (const auto& e : *ev) {
        if (e.is_string() && e.get<std::string>() == "reopened") pr.reopened = true;
      }
    }
    pr.state = parse_pr_state(detail::require_string(j, "state"));
    return pr;
  }

  static PRComment parse_comment(const json& j) {
    if (!j.is_object()) throw DataError("comment record is not an object");
    PRComment c;
    c.comment_id = detail::require_int(j, "comment_id");
    c.pr = detail::require_int(j, "pr");
    c.author = detail::require_string(j, "author");
    c.body = normalize_text(detail::require_string(j, "body"));
    if (c.body.empty()) throw DataError("empty comment body");
    c.created_at = parse_timestamp(detail::require_string(j, "created_at"));
    return c;
  }

 private:
  struct Raw {
    json record;
    std::string origin;
    std::string stem;
  };

  static bool same_contributor(const Contributor& a, const Contributor& b) {
    return a.login == b.login && a.display_name == b.display_name && a.location == b.location &&
           a.account_created_at == b.account_created_at && a.deleted == b.deleted;
  }

  std::vector<Raw> contributors_;
  std::vector<Raw> prs_;
  std::vector<Raw> comments_;
  std::set<std::string> extra_projects_;
  std::vector<Rejection> rejections_;
};

namespace detail {

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& file, Fn&& fn) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line, file.filename().string() + ":" + std::to_string(number));
  }
}

}  // namespace detail

/// Loads every `<stem>.{prs,comments,contributors}.ndjson` file in `dir`.
/// Malformed records land in the rejection list; an unreadable directory
/// is fatal.
inline LoadResult load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw DataError("corpus source is not a readable directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  CorpusBuilder builder;
  auto parse_into = [&](const fs::path& file, std::string_view suffix, auto add) {
    const std::string name = file.filename().string();
    const std::string stem = name.substr(0, name.size() - suffix.size());
    detail::for_each_line(file, [&](const std::string& line, std::string origin) {
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        builder.reject(std::move(origin), std::string("malformed JSON: ") + e.what());
        return;
      }
      add(record, stem, std::move(origin));
    });
  };
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (detail::ends_with(name, kContributorSuffix)) {
      parse_into(f, kContributorSuffix,
                 [&](const auto& r, const std::string&, std::string o) { builder.add_contributor(r, std::move(o)); });
    } else if (detail::ends_with(name, kPrSuffix)) {
      parse_into(f, kPrSuffix, [&](const auto& r, const std::string& s, std::string o) { builder.add_pr(r, s, std::move(o)); });
    } else if (detail::ends_with(name, kCommentSuffix)) {
      parse_into(f, kCommentSuffix,
                 [&](const auto& r, const std::string& s, std::string o) { builder.add_comment(r, s, std::move(o)); });
    }
  }
  return builder.finish();
}

inline nlohmann::json to_json(const Contributor& c) {
  nlohmann::json j;
  j["login"] = c.login;
  j["display_name"] = c.display_name ? nlohmann::json(*c.display_name) : nlohmann::json(nullptr);
  j["location"] = c.location ? nlohmann::json(*c.location) : nlohmann::json(nullptr);
  j["account_created_at"] = c.deleted ? nlohmann::json(nullptr) : nlohmann::json(format_timestamp(c.account_created_at));
  j["deleted"] = c.deleted;
  return j;
}

inline nlohmann::json to_json(const PullRequest& pr) {
  return {{"pr_id", pr.pr_id},
          {"project", pr.project},
          {"author", pr.author},
          {"description", pr.description},
          {"created_at", format_timestamp(pr.created_at)},
          {"reopened", pr.reopened},
          {"state", std::string(to_string(pr.state))}};
}

inline nlohmann::json to_json(const PRComment& c) {
  return {{"comment_id", c.comment_id},
          {"pr", c.pr},
          {"author", c.author},
          {"body", c.body},
          {"created_at", format_timestamp(c.created_at)}};
}

/// Writes the corpus in the same layout `load_corpus` reads. A contributor is
/// written to every project file where they authored a PR or comment.
inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& project : corpus.projects()) {
    const auto stem = project_file_stem(project);
    std::ofstream prs(dir / (stem + std::string(kPrSuffix)));
    std::ofstream comments(dir / (stem + std::string(kCommentSuffix)));
    std::ofstream people(dir / (stem + std::string(kContributorSuffix)));
    if (!prs || !comments || !people) throw DataError("cannot write store at " + dir.string());
    std::set<std::string> active;
    for (const auto& pr : corpus.prs()) {
      if (pr.project != project) continue;
      prs << to_json(pr).dump() << '\n';
      active.insert(pr.author);
    }
    for (const auto& c : corpus.comments()) {
      if (c.project != project) continue;
      comments << to_json(c).dump() << '\n';
      active.insert(c.author);
    }
    for (const auto& login : active) {
      if (const auto* c = corpus.find_contributor(login)) people << to_json(*c).dump() << '\n';
    }
  }
}

inline void write_rejections(const std::vector<Rejection>& rejections, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  for (const auto& r : rejections) {
    out << nlohmann::json{{"origin", r.origin}, {"reason", r.reason}}.dump() << '\n';
  }
}

}  // namespace imentor
