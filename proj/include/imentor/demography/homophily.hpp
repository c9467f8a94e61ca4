#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "imentor/classifier/classify.hpp"
#include "imentor/demography/gender.hpp"
#include "imentor/ingestion/types.hpp"
#include "imentor/relations/relations.hpp"
#include "imentor/stats/outcome.hpp"

namespace imentor {

using GenderMap = std::map<std::string, Gender, std::less<>>;

inline GenderMap gender_map(std::span<const GenderRecord> records) {
  GenderMap out;
  for (const auto& r : records) out[r.contributor] = r.inferred;
  return out;
}

inline std::optional<Gender> gender_of(const GenderMap& genders, std::string_view login) {
  auto it = genders.find(login);
  if (it == genders.end()) return std::nullopt;
  return it->second;
}

struct ProjectGenderCounts {
  std::string project;
  std::size_t women = 0;
  std::size_t men = 0;
  std::size_t ungendered = 0;
};

/// Gendered head count per project over PR authors and commenters.
inline std::vector<ProjectGenderCounts> project_gender_counts(const Corpus& corpus, const GenderMap& genders) {
  std::map<std::string, std::set<std::string>> people;
  for (const auto& p : corpus.projects()) people[p];
  for (const auto& pr : corpus.prs()) people[pr.project].insert(pr.author);
  for (const auto& c : corpus.comments()) people[c.project].insert(c.author);
  std::vector<ProjectGenderCounts> out;
  for (const auto& [project, logins] : people) {
    ProjectGenderCounts row{project};
    for (const auto& login : logins) {
      const auto g = gender_of(genders, login);
      if (!g) {
        ++row.ungendered;
      } else if (*g == Gender::woman) {
        ++row.women;
      } else {
        ++row.men;
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

struct ProjectScreening {
  std::vector<std::string> retained;
  std::vector<std::pair<std::string, std::string>> excluded;  // project, reason
};

inline ProjectScreening screen_projects(const Corpus& corpus, const GenderMap& genders) {
  ProjectScreening out;
  for (const auto& row : project_gender_counts(corpus, genders)) {
    if (row.women + row.men == 0) {
      out.excluded.emplace_back(row.project, "no contributor passed the confidence cutoff");
    } else if (row.women == 0) {
      out.excluded.emplace_back(row.project, "no women contributors");
    } else {
      out.retained.push_back(row.project);
    }
  }
  return out;
}

/// Projects kept for the homophily analysis, sorted by name.
inline std::vector<std::string> exclude_ungendered_projects(const Corpus& corpus,
                                                            std::span<const GenderRecord> records) {
  return screen_projects(corpus, gender_map(records)).retained;
}

inline std::vector<MentoringInstance> restrict_to_projects(std::span<const MentoringInstance> instances,
                                                           std::span<const std::string> projects) {
  const std::set<std::string, std::less<>> keep(projects.begin(), projects.end());
  std::vector<MentoringInstance> out;
  for (const auto& m : instances) {
    if (keep.contains(m.pr.project)) out.push_back(m);
  }
  return out;
}

/// Mentor-gender -> mentee-gender counts. `dropped` tallies instances with
/// an ungendered endpoint and is not part of total().
struct PairCounts {
  std::size_t ww = 0;
  std::size_t wm = 0;
  std::size_t mw = 0;
  std::size_t mm = 0;
  std::size_t dropped = 0;

  std::size_t total() const { return ww + wm + mw + mm; }
};

inline void add_pair(PairCounts& counts, Gender mentor, Gender mentee) {
  if (mentor == Gender::woman) {
    ++(mentee == Gender::woman ? counts.ww : counts.wm);
  } else {
    ++(mentee == Gender::woman ? counts.mw : counts.mm);
  }
}

inline PairCounts pair_counts(std::span<const MentoringInstance> instances, const GenderMap& genders) {
  PairCounts out;
  for (const auto& m : instances) {
    const auto a = gender_of(genders, m.mentor);
    const auto b = gender_of(genders, m.mentee);
    if (!a || !b) {
      ++out.dropped;
      continue;
    }
    add_pair(out, *a, *b);
  }
  return out;
}

inline PairCounts pair_counts(std::span<const MentoringInstance> instances, std::span<const GenderRecord> records) {
  return pair_counts(instances, gender_map(records));
}

/// Same-gender share of gendered pairs; empty when there are none.
inline std::optional<double> homophily_rate(const PairCounts& c) {
  if (c.total() == 0) return std::nullopt;
  return static_cast<double>(c.ww + c.mm) / static_cast<double>(c.total());
}

/// Overall column followed by one column per project-frame direction.
struct PairCountsByDirection {
  PairCounts overall;
  std::array<PairCounts, 3> by_direction{};
};

inline PairCountsByDirection pair_counts_by_direction(std::span<const MentoringInstance> instances,
                                                      const GenderMap& genders) {
  PairCountsByDirection out;
  out.overall = pair_counts(instances, genders);
  for (const auto d : kDirections) {
    std::vector<MentoringInstance> subset;
    for (const auto& m : instances) {
      if (m.project_direction == d) subset.push_back(m);
    }
    out.by_direction[static_cast<std::size_t>(d)] = pair_counts(subset, genders);
  }
  return out;
}

// ---- gender summary ----

struct GenderColumn {
  std::size_t commenters = 0;
  std::size_t mentors = 0;
  std::size_t comments = 0;
  std::size_t mentoring_comments = 0;
};

struct GenderSummary {
  GenderColumn women;
  GenderColumn men;
};

/// Activity of gendered comment authors; comments by ungendered authors are
/// left out.
inline GenderSummary gender_summary(const Corpus& corpus, const Classifications& classes, const GenderMap& genders) {
  GenderSummary out;
  std::set<std::string> commenters, mentors;
  for (const auto& c : corpus.comments()) {
    const auto g = gender_of(genders, c.author);
    if (!g) continue;
    auto& col = *g == Gender::woman ? out.women : out.men;
    ++col.comments;
    if (commenters.insert(c.author).second) ++col.commenters;
    auto cls = classes.find(c.comment_id);
    if (cls != classes.end() && cls->second.label) {
      ++col.mentoring_comments;
      if (mentors.insert(c.author).second) ++col.mentors;
    }
  }
  return out;
}

// ---- proportion tests ----

/// Columns: overall, then top-down, peer, bottom-up.
using DirectionalTests = std::array<TestOutcome, 4>;

/// Mentoring share of comments by men (P1) vs women (P2). Per direction the
/// comments are those whose commenter -> PR author pair falls in that
/// project-frame direction.
inline DirectionalTests gender_proportion_tests(const Corpus& corpus, const Classifications& classes,
                                                const GenderMap& genders, const stats::TestOptions& opts,
                                                int threshold_days = kDefaultThresholdDays) {
  const auto exp = experience(corpus);
  // [column][0 men / 1 women] -> {mentoring, all}
  std::array<std::array<std::array<long long, 2>, 2>, 4> tally{};
  for (const auto& c : corpus.comments()) {
    const auto g = gender_of(genders, c.author);
    if (!g) continue;
    const std::size_t who = *g == Gender::man ? 0 : 1;
    auto cls = classes.find(c.comment_id);
    const bool mentoring = cls != classes.end() && cls->second.label;
    auto bump = [&](std::size_t col) {
      tally[col][who][1] += 1;
      if (mentoring) tally[col][who][0] += 1;
    };
    bump(0);
    const auto* pr = corpus.find_pr(c.pr_key());
    if (pr == nullptr) continue;
    if (auto d = pair_direction(exp, c.author, pr->author, c.project, threshold_days)) {
      bump(1 + static_cast<std::size_t>(*d));
    }
  }
  DirectionalTests out;
  for (std::size_t col = 0; col < 4; ++col) {
    const auto& t = tally[col];
    out[col] = guarded_z_test(t[0][0], t[0][1], t[1][0], t[1][1], opts);
  }
  return out;
}

/// P1 = m->w / (m->m + m->w) against P2 = w->m / (w->w + w->m).
inline TestOutcome cross_gender_test(const PairCounts& c, const stats::TestOptions& opts) {
  return guarded_z_test(static_cast<long long>(c.mw), static_cast<long long>(c.mm + c.mw),
                        static_cast<long long>(c.wm), static_cast<long long>(c.ww + c.wm), opts);
}

/// Same-gender share against cross-gender share of the same pairs.
inline TestOutcome homophily_test(const PairCounts& c, const stats::TestOptions& opts) {
  const auto n = static_cast<long long>(c.total());
  return guarded_z_test(static_cast<long long>(c.ww + c.mm), n, static_cast<long long>(c.wm + c.mw), n, opts);
}

inline DirectionalTests cross_gender_tests(const PairCountsByDirection& counts, const stats::TestOptions& opts) {
  DirectionalTests out;
  out[0] = cross_gender_test(counts.overall, opts);
  for (std::size_t k = 0; k < 3; ++k) out[k + 1] = cross_gender_test(counts.by_direction[k], opts);
  return out;
}

inline DirectionalTests homophily_tests(const PairCountsByDirection& counts, const stats::TestOptions& opts) {
  DirectionalTests out;
  out[0] = homophily_test(counts.overall, opts);
  for (std::size_t k = 0; k < 3; ++k) out[k + 1] = homophily_test(counts.by_direction[k], opts);
  return out;
}

}  // namespace imentor
