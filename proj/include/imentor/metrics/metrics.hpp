#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imentor/ingestion/types.hpp"
#include "imentor/relations/relations.hpp"
#include "imentor/stats/outcome.hpp"

namespace imentor {

struct Prevalence {
  std::size_t prs = 0;
  std::size_t prs_with_mentoring = 0;
  std::size_t comment_authors = 0;
  std::size_t mentors = 0;
  double pr_fraction = 0;
  double mentor_fraction = 0;
  double mean_comments_per_pr = 0;
  std::optional<double> sd;  // sample SD; needs two or more PRs
};

/// Empty for a corpus without PRs. Expects exclusions to have been applied,
/// so every comment is by someone other than the PR author.
inline std::optional<Prevalence> prevalence(const Corpus& corpus, std::span<const MentoringInstance> instances) {
  if (corpus.prs().empty()) return std::nullopt;
  Prevalence p;
  p.prs = corpus.prs().size();
  std::set<PrKey> mentored;
  std::set<std::string> mentors;
  for (const auto& m : instances) {
    mentored.insert(m.pr);
    mentors.insert(m.mentor);
  }
  p.prs_with_mentoring = mentored.size();
  std::set<std::string> authors;
  for (const auto& c : corpus.comments()) authors.insert(c.author);
  p.comment_authors = authors.size();
  p.mentors = mentors.size();
  p.pr_fraction = static_cast<double>(p.prs_with_mentoring) / static_cast<double>(p.prs);
  p.mentor_fraction = p.comment_authors ? static_cast<double>(p.mentors) / static_cast<double>(p.comment_authors) : 0.0;

  std::vector<double> counts;
  counts.reserve(p.prs);
  for (const auto& pr : corpus.prs()) counts.push_back(static_cast<double>(corpus.comments_of(pr.key()).size()));
  double sum = 0;
  for (double x : counts) sum += x;
  p.mean_comments_per_pr = sum / static_cast<double>(counts.size());
  if (counts.size() > 1) {
    double ss = 0;
    for (double x : counts) ss += (x - p.mean_comments_per_pr) * (x - p.mean_comments_per_pr);
    p.sd = std::sqrt(ss / static_cast<double>(counts.size() - 1));
  }
  return p;
}

namespace detail {

inline void erase_between(std::string& s, std::string_view open, std::string_view close) {
  for (auto a = s.find(open); a != std::string::npos; a = s.find(open, a)) {
    const auto b = s.find(close, a + open.size());
    s.replace(a, b == std::string::npos ? std::string::npos : b + close.size() - a, " ");
  }
}

}  // namespace detail

/// Removes HTML comments and tags, Markdown link/image targets and
/// emphasis/heading/list markers, leaving the prose (and code) text.
inline std::string strip_markup(std::string_view text) {
  std::string s(text);
  detail::erase_between(s, "<!--", "-->");
  detail::erase_between(s, "](", ")");
  std::string out;
  out.reserve(s.size());
  bool in_tag = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (in_tag) {
      if (ch == '>') in_tag = false;
      continue;
    }
    if (ch == '<' && i + 1 < s.size() && (std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/')) {
      in_tag = true;
      out += ' ';
      continue;
    }
    switch (ch) {
      case '#': case '*': case '_': case '`': case '>': case '[': case ']': case '!': case '|': case '~':
        out += ' ';
        break;
      default:
        out += ch;
    }
  }
  return out;
}

/// Whitespace-delimited tokens that contain at least one letter or digit.
inline std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false, has_alnum = false;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (in_word && has_alnum) ++n;
      in_word = has_alnum = false;
    } else {
      in_word = true;
      has_alnum = has_alnum || std::isalnum(static_cast<unsigned char>(ch));
    }
  }
  if (in_word && has_alnum) ++n;
  return n;
}

struct WordinessSplit {
  std::vector<PrKey> prs;  // corpus order
  std::vector<std::size_t> words;
  std::vector<char> wordy;
  double median = 0;

  std::size_t wordy_count() const { return static_cast<std::size_t>(std::count(wordy.begin(), wordy.end(), 1)); }
};

/// Wordy means strictly more description words than the corpus median.
inline WordinessSplit wordiness_split(const Corpus& corpus) {
  WordinessSplit out;
  for (const auto& pr : corpus.prs()) {
    out.prs.push_back(pr.key());
    out.words.push_back(word_count(strip_markup(pr.description)));
  }
  if (out.words.empty()) return out;
  auto sorted = out.words;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  out.median = n % 2 ? static_cast<double>(sorted[n / 2])
                     : (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
  for (auto w : out.words) out.wordy.push_back(static_cast<double>(w) > out.median ? 1 : 0);
  return out;
}

struct ComplexityTest {
  std::size_t group_a = 0;  // wordy / reopened
  std::size_t group_b = 0;  // not wordy / never reopened
  double mean_a = 0;
  double mean_b = 0;
  TestOutcome outcome;
};

struct ComplexityResults {
  double median_words = 0;
  ComplexityTest wordiness;
  ComplexityTest reopened;
};

namespace detail {

inline ComplexityTest split_test(const std::vector<double>& a, const std::vector<double>& b,
                                 const stats::TestOptions& opts) {
  ComplexityTest t;
  t.group_a = a.size();
  t.group_b = b.size();
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  t.mean_a = mean(a);
  t.mean_b = mean(b);
  if (a.empty() || b.empty()) {
    t.outcome.error = "empty group";
  } else {
    t.outcome = guarded_welch(a, b, opts);
  }
  return t;
}

}  // namespace detail

/// Welch tests on per-PR mentoring-comment counts: wordy vs not, reopened vs
/// not. `opts.alpha` should already be Bonferroni-adjusted.
inline ComplexityResults complexity_tests(const Corpus& corpus, std::span<const MentoringInstance> instances,
                                          const stats::TestOptions& opts) {
  std::map<PrKey, double> mentoring;
  for (const auto& m : instances) mentoring[m.pr] += 1;
  const auto split = wordiness_split(corpus);
  std::vector<double> wordy, plain, reopened, never;
  for (std::size_t i = 0; i < corpus.prs().size(); ++i) {
    const auto& pr = corpus.prs()[i];
    auto it = mentoring.find(pr.key());
    const double n = it == mentoring.end() ? 0.0 : it->second;
    (split.wordy[i] ? wordy : plain).push_back(n);
    (pr.reopened ? reopened : never).push_back(n);
  }
  ComplexityResults out;
  out.median_words = split.median;
  out.wordiness = detail::split_test(wordy, plain, opts);
  out.reopened = detail::split_test(reopened, never, opts);
  return out;
}

}  // namespace imentor
