#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "imentor/core/error.hpp"
#include "imentor/core/time.hpp"

namespace imentor {

struct Contributor {
  std::string login;
  std::optional<std::string> display_name;
  std::optional<std::string> location;
  Timestamp account_created_at{};
  bool deleted = false;
};

enum class PrState { open, closed, merged };

inline std::string_view to_string(PrState s) {
  switch (s) {
    case PrState::open:
      return "open";
    case PrState::closed:
      return "closed";
    case PrState::merged:
    default:
      return "merged";
  }
}

inline PrState parse_pr_state(std::string_view s) {
  if (s == "open") return PrState::open;
  if (s == "closed") return PrState::closed;
  if (s == "merged") return PrState::merged;
  throw DataError("unknown PR state '" + std::string(s) + "'");
}

/// Pull requests are identified by (project, pr_id).
struct PrKey {
  std::string project;
  std::int64_t pr_id = 0;

  friend auto operator<=>(const PrKey&, const PrKey&) = default;
};

struct PullRequest {
  std::int64_t pr_id = 0;
  std::string project;
  std::string author;
  std::string description;
  Timestamp created_at{};
  bool reopened = false;
  PrState state = PrState::open;

  PrKey key() const { return {project, pr_id}; }
};

/// Comment ids are unique across the whole corpus (hosting-platform ids).
struct PRComment {
  std::int64_t comment_id = 0;
  std::string project;
  std::int64_t pr = 0;
  std::string author;
  std::string body;
  Timestamp created_at{};

  PrKey pr_key() const { return {project, pr}; }
};

/// Immutable after construction. Collections are kept sorted: projects by
/// name, PRs by (project, pr_id), comments by (project, pr, created_at,
/// comment_id), contributors by login.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<std::string> projects, std::vector<PullRequest> prs, std::vector<PRComment> comments,
         std::vector<Contributor> contributors)
      : projects_(std::move(projects)),
        prs_(std::move(prs)),
        comments_(std::move(comments)),
        contributors_(std::move(contributors)) {
    std::sort(projects_.begin(), projects_.end());
    projects_.erase(std::unique(projects_.begin(), projects_.end()), projects_.end());
    std::sort(prs_.begin(), prs_.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    std::sort(comments_.begin(), comments_.end(), [](const PRComment& a, const PRComment& b) {
      return std::tie(a.project, a.pr, a.created_at, a.comment_id) <
             std::tie(b.project, b.pr, b.created_at, b.comment_id);
    });
    std::sort(contributors_.begin(), contributors_.end(),
              [](const auto& a, const auto& b) { return a.login < b.login; });
  }

  const std::vector<std::string>& projects() const { return projects_; }
  const std::vector<PullRequest>& prs() const { return prs_; }
  const std::vector<PRComment>& comments() const { return comments_; }
  const std::vector<Contributor>& contributors() const { return contributors_; }

  bool empty() const { return prs_.empty() && comments_.empty(); }

  const PullRequest* find_pr(const PrKey& key) const {
    auto it = std::lower_bound(prs_.begin(), prs_.end(), key,
                               [](const PullRequest& pr, const PrKey& k) { return pr.key() < k; });
    return it != prs_.end() && it->key() == key ? &*it : nullptr;
  }

  const Contributor* find_contributor(std::string_view login) const {
    auto it = std::lower_bound(contributors_.begin(), contributors_.end(), login,
                               [](const Contributor& c, std::string_view l) { return c.login < l; });
    return it != contributors_.end() && it->login == login ? &*it : nullptr;
  }

  /// Comments attached to one PR, in chronological order.
  std::span<const PRComment> comments_of(const PrKey& key) const {
    auto lo = std::lower_bound(comments_.begin(), comments_.end(), key,
                               [](const PRComment& c, const PrKey& k) { return c.pr_key() < k; });
    auto hi = std::upper_bound(comments_.begin(), comments_.end(), key,
                               [](const PrKey& k, const PRComment& c) { return k < c.pr_key(); });
    return {lo, hi};
  }

 private:
  std::vector<std::string> projects_;
  std::vector<PullRequest> prs_;
  std::vector<PRComment> comments_;
  std::vector<Contributor> contributors_;
};

}  // namespace imentor
