#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imentor/ingestion/types.hpp"

namespace imentor {

/// Drops every contribution by a deleted account and every comment written
/// by the author of the PR it sits on. PRs left without comments stay.
inline Corpus apply_exclusions(const Corpus& corpus) {
  auto is_deleted = [&](const std::string& login) {
    const auto* c = corpus.find_contributor(login);
    return c == nullptr || c->deleted;
  };

  std::vector<PullRequest> prs;
  for (const auto& pr : corpus.prs()) {
    if (!is_deleted(pr.author)) prs.push_back(pr);
  }
  std::vector<PRComment> comments;
  for (const auto& c : corpus.comments()) {
    const auto* pr = corpus.find_pr(c.pr_key());
    if (pr == nullptr || is_deleted(pr->author) || is_deleted(c.author) || c.author == pr->author) continue;
    comments.push_back(c);
  }
  std::vector<Contributor> people;
  for (const auto& c : corpus.contributors()) {
    if (!c.deleted) people.push_back(c);
  }
  return Corpus(corpus.projects(), std::move(prs), std::move(comments), std::move(people));
}

/// One row of the per-project summary table.
struct DimensionSummary {
  std::string dimension;
  double max = 0;
  double min = 0;
  double mean = 0;
  double median = 0;
};

struct ProjectFigures {
  std::string project;
  std::size_t developers = 0;
  std::size_t prs = 0;
  std::size_t comments = 0;
  std::int64_t age_weeks = 0;
};

/// Per-project raw figures. Age is the span between the project's first and
/// last recorded activity, in whole weeks.
inline std::vector<ProjectFigures> project_figures(const Corpus& corpus) {
  struct Acc {
    std::set<std::string> people;
    std::size_t prs = 0;
    std::size_t comments = 0;
    std::optional<Timestamp> first, last;
    void touch(Timestamp t) {
      if (!first || t < *first) first = t;
      if (!last || t > *last) last = t;
    }
  };
  std::map<std::string, Acc> acc;
  for (const auto& p : corpus.projects()) acc[p];
  for (const auto& pr : corpus.prs()) {
    auto& a = acc[pr.project];
    a.people.insert(pr.author);
    ++a.prs;
    a.touch(pr.created_at);
  }
  for (const auto& c : corpus.comments()) {
    auto& a = acc[c.project];
    a.people.insert(c.author);
    ++a.comments;
    a.touch(c.created_at);
  }
  std::vector<ProjectFigures> out;
  for (const auto& [name, a] : acc) {
    ProjectFigures f{name, a.people.size(), a.prs, a.comments, 0};
    if (a.first) {
      f.age_weeks = std::chrono::floor<std::chrono::weeks>(*a.last - *a.first).count();
    }
    out.push_back(f);
  }
  return out;
}

namespace detail {

inline DimensionSummary summarize(std::string name, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  DimensionSummary s{std::move(name)};
  s.min = values.front();
  s.max = values.back();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  return s;
}

}  // namespace detail

/// Max/min/mean/median over projects for developers, PRs, non-author
/// comments and age. Empty corpus yields nullopt.
inline std::optional<std::vector<DimensionSummary>> corpus_stats(const Corpus& corpus) {
  auto figures = project_figures(corpus);
  if (figures.empty() || corpus.prs().empty()) return std::nullopt;
  std::vector<double> devs, prs, comments, ages;
  for (const auto& f : figures) {
    devs.push_back(static_cast<double>(f.developers));
    prs.push_back(static_cast<double>(f.prs));
    comments.push_back(static_cast<double>(f.comments));
    ages.push_back(static_cast<double>(f.age_weeks));
  }
  return std::vector<DimensionSummary>{
      detail::summarize("Project Age (weeks)", ages),
      detail::summarize("Developers", devs),
      detail::summarize("Total Pull-request (PR)", prs),
      detail::summarize("Total PR-comments (Non-PR author)", comments),
  };
}

}  // namespace imentor
