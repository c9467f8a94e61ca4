#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <span>
#include <vector>

#include <json.hpp>

#include "imentor/classifier/classify.hpp"
#include "imentor/core/error.hpp"
#include "imentor/core/time.hpp"
#include "imentor/ingestion/types.hpp"

namespace imentor {

enum class Direction { top_down, peer, bottom_up };
inline constexpr std::array kDirections{Direction::top_down, Direction::peer, Direction::bottom_up};

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::top_down:
      return "top-down";
    case Direction::peer:
      return "peer";
    case Direction::bottom_up:
    default:
      return "bottom-up";
  }
}

inline Direction parse_direction(std::string_view s) {
  if (s == "top-down") return Direction::top_down;
  if (s == "peer") return Direction::peer;
  if (s == "bottom-up") return Direction::bottom_up;
  throw DataError("unknown direction '" + std::string(s) + "'");
}

enum class Frame { project, global };

enum class Arity { dyad, triad, quadrad_or_more };
inline constexpr std::array kArities{Arity::dyad, Arity::triad, Arity::quadrad_or_more};

inline std::string_view to_string(Arity a) {
  switch (a) {
    case Arity::dyad:
      return "dyad";
    case Arity::triad:
      return "triad";
    case Arity::quadrad_or_more:
    default:
      return ">=quadrad";
  }
}

inline constexpr int kDefaultThresholdDays = 183;

/// Delta = mentee_first - mentor_first (positive: mentor is senior).
/// Strictly beyond +threshold is top-down, strictly below -threshold is
/// bottom-up, anything within the closed band is peer.
inline Direction classify_direction(std::chrono::seconds delta, int threshold_days = kDefaultThresholdDays) {
  const auto threshold = kSecondsPerDay * threshold_days;
  if (delta > threshold) return Direction::top_down;
  if (delta < -threshold) return Direction::bottom_up;
  return Direction::peer;
}

inline Direction classify_direction(Timestamp mentor_first, Timestamp mentee_first,
                                    int threshold_days = kDefaultThresholdDays) {
  return classify_direction(mentee_first - mentor_first, threshold_days);
}

struct ExperienceRecord {
  std::string contributor;
  std::map<std::string, Timestamp> project_first_contribution;
  Timestamp account_created_at{};
};

using ExperienceMap = std::map<std::string, ExperienceRecord, std::less<>>;

/// First contribution (PR or comment) per contributor per project, plus the
/// account-creation anchor for the platform-wide frame.
inline ExperienceMap experience(const Corpus& corpus) {
  ExperienceMap out;
  auto touch = [&](const std::string& login, const std::string& project, Timestamp t) {
    auto& rec = out[login];
    if (rec.contributor.empty()) {
      rec.contributor = login;
      if (const auto* c = corpus.find_contributor(login)) rec.account_created_at = c->account_created_at;
    }
    auto [it, inserted] = rec.project_first_contribution.emplace(project, t);
    if (!inserted && t < it->second) it->second = t;
  };
  for (const auto& pr : corpus.prs()) touch(pr.author, pr.project, pr.created_at);
  for (const auto& c : corpus.comments()) touch(c.author, c.project, c.created_at);
  return out;
}

struct MentoringInstance {
  PrKey pr;
  std::string mentee;  // PR author
  std::string mentor;  // author of the positive comment
  std::int64_t comment_id = 0;
  Direction project_direction = Direction::peer;
  Direction global_direction = Direction::peer;
  std::chrono::seconds experience_delta_project{0};
  std::chrono::seconds experience_delta_global{0};
};

/// Direction of an arbitrary commenter/PR-author pair, project frame.
inline std::optional<Direction> pair_direction(const ExperienceMap& exp, const std::string& commenter,
                                               const std::string& pr_author, const std::string& project,
                                               int threshold_days = kDefaultThresholdDays) {
  auto a = exp.find(commenter);
  auto b = exp.find(pr_author);
  if (a == exp.end() || b == exp.end()) return std::nullopt;
  auto fa = a->second.project_first_contribution.find(project);
  auto fb = b->second.project_first_contribution.find(project);
  if (fa == a->second.project_first_contribution.end() || fb == b->second.project_first_contribution.end()) {
    return std::nullopt;
  }
  return classify_direction(fa->second, fb->second, threshold_days);
}

/// One instance per positively classified comment, ordered as the corpus.
inline std::vector<MentoringInstance> build_instances(const Corpus& corpus, const Classifications& classes,
                                                      int threshold_days = kDefaultThresholdDays) {
  const auto exp = experience(corpus);
  std::vector<MentoringInstance> out;
  for (const auto& c : corpus.comments()) {
    auto cls = classes.find(c.comment_id);
    if (cls == classes.end() || !cls->second.label) continue;
    const auto* pr = corpus.find_pr(c.pr_key());
    if (pr == nullptr || pr->author == c.author) continue;
    const auto& mentor = exp.at(c.author);
    const auto& mentee = exp.at(pr->author);
    MentoringInstance m;
    m.pr = pr->key();
    m.mentee = pr->author;
    m.mentor = c.author;
    m.comment_id = c.comment_id;
    m.experience_delta_project =
        mentee.project_first_contribution.at(pr->project) - mentor.project_first_contribution.at(pr->project);
    m.experience_delta_global = mentee.account_created_at - mentor.account_created_at;
    m.project_direction = classify_direction(m.experience_delta_project, threshold_days);
    m.global_direction = classify_direction(m.experience_delta_global, threshold_days);
    out.push_back(std::move(m));
  }
  return out;
}

/// Group size on one PR: the mentee plus distinct mentors.
inline Arity arity(const PrKey& pr, std::span<const MentoringInstance> instances) {
  std::set<std::string> mentors;
  for (const auto& m : instances) {
    if (m.pr == pr) mentors.insert(m.mentor);
  }
  if (mentors.empty()) throw ArgumentError("arity: PR has no mentoring instances");
  const auto group = mentors.size() + 1;
  if (group == 2) return Arity::dyad;
  if (group == 3) return Arity::triad;
  return Arity::quadrad_or_more;
}

/// Arity of every PR that has at least one instance.
inline std::map<PrKey, Arity> arities(std::span<const MentoringInstance> instances) {
  std::map<PrKey, std::set<std::string>> mentors;
  for (const auto& m : instances) mentors[m.pr].insert(m.mentor);
  std::map<PrKey, Arity> out;
  for (const auto& [pr, set] : mentors) {
    const auto group = set.size() + 1;
    out[pr] = group == 2 ? Arity::dyad : group == 3 ? Arity::triad : Arity::quadrad_or_more;
  }
  return out;
}

struct DirectionClassStats {
  std::size_t count = 0;
  double share = 0;
  std::optional<double> mean_gap_days;
  std::optional<double> sd_gap_days;  // sample SD; needs two or more
};

struct DirectionDistribution {
  std::size_t total = 0;
  std::array<DirectionClassStats, 3> classes{};  // indexed like kDirections

  const DirectionClassStats& operator[](Direction d) const { return classes[static_cast<std::size_t>(d)]; }
};

/// Shares and |delta| statistics per direction class.
inline DirectionDistribution direction_distribution(std::span<const MentoringInstance> instances, Frame frame) {
  DirectionDistribution out;
  out.total = instances.size();
  std::array<std::vector<double>, 3> gaps;
  for (const auto& m : instances) {
    const auto d = frame == Frame::project ? m.project_direction : m.global_direction;
    const auto delta = frame == Frame::project ? m.experience_delta_project : m.experience_delta_global;
    gaps[static_cast<std::size_t>(d)].push_back(std::fabs(to_days(delta)));
  }
  for (std::size_t k = 0; k < 3; ++k) {
    auto& c = out.classes[k];
    const auto& g = gaps[k];
    c.count = g.size();
    c.share = out.total ? static_cast<double>(c.count) / static_cast<double>(out.total) : 0.0;
    if (g.empty()) continue;
    double sum = 0;
    for (double x : g) sum += x;
    const double mean = sum / static_cast<double>(g.size());
    c.mean_gap_days = mean;
    if (g.size() > 1) {
      double ss = 0;
      for (double x : g) ss += (x - mean) * (x - mean);
      c.sd_gap_days = std::sqrt(ss / static_cast<double>(g.size() - 1));
    }
  }
  return out;
}

struct ArityDistribution {
  std::size_t prs = 0;
  std::array<std::size_t, 3> counts{};  // indexed like kArities
};

inline ArityDistribution arity_distribution(std::span<const MentoringInstance> instances) {
  ArityDistribution out;
  for (const auto& [pr, a] : arities(instances)) {
    ++out.prs;
    ++out.counts[static_cast<std::size_t>(a)];
  }
  return out;
}

// ---- instance file ----

inline nlohmann::json to_json(const MentoringInstance& m) {
  return {{"pr", m.pr.pr_id},
          {"project", m.pr.project},
          {"mentee", m.mentee},
          {"mentor", m.mentor},
          {"comment", m.comment_id},
          {"project_direction", to_string(m.project_direction)},
          {"global_direction", to_string(m.global_direction)},
          {"experience_delta_project", to_days(m.experience_delta_project)},
          {"experience_delta_global", to_days(m.experience_delta_global)},
          {"experience_delta_project_seconds", m.experience_delta_project.count()},
          {"experience_delta_global_seconds", m.experience_delta_global.count()}};
}

inline void write_instances(std::span<const MentoringInstance> instances, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write instances " + file.string());
  for (const auto& m : instances) out << to_json(m).dump() << '\n';
}

inline std::vector<MentoringInstance> read_instances(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read instances " + file.string());
  std::vector<MentoringInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    MentoringInstance m;
    m.pr = {j.at("project").get<std::string>(), j.at("pr").get<std::int64_t>()};
    m.mentee = j.at("mentee").get<std::string>();
    m.mentor = j.at("mentor").get<std::string>();
    m.comment_id = j.at("comment").get<std::int64_t>();
    m.project_direction = parse_direction(j.at("project_direction").get<std::string>());
    m.global_direction = parse_direction(j.at("global_direction").get<std::string>());
    m.experience_delta_project = std::chrono::seconds(j.at("experience_delta_project_seconds").get<std::int64_t>());
    m.experience_delta_global = std::chrono::seconds(j.at("experience_delta_global_seconds").get<std::int64_t>());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace imentor
