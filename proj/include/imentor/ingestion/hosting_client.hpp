#pragma once

#include <atomic>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imentor/core/parallel.hpp"
#include "imentor/ingestion/corpus_io.hpp"
#include "imentor/ingestion/types.hpp"

namespace imentor {

/// Source of PR data from a code-hosting platform.
class HostingClient {
 public:
  virtual ~HostingClient() = default;
  virtual std::vector<PullRequest> fetch_prs(const std::string& project) = 0;
  virtual std::vector<PRComment> fetch_comments(const PullRequest& pr) = 0;
  /// nullopt when the account no longer exists.
  virtual std::optional<Contributor> fetch_profile(const std::string& login) = 0;
};

/// Offline client that serves an already-loaded corpus.
class FixtureHostingClient final : public HostingClient {
 public:
  explicit FixtureHostingClient(Corpus corpus) : corpus_(std::move(corpus)) {}

  std::vector<PullRequest> fetch_prs(const std::string& project) override {
    ++calls_;
    std::vector<PullRequest> out;
    for (const auto& pr : corpus_.prs()) {
      if (pr.project == project) out.push_back(pr);
    }
    return out;
  }

  std::vector<PRComment> fetch_comments(const PullRequest& pr) override {
    ++calls_;
    auto span = corpus_.comments_of(pr.key());
    return {span.begin(), span.end()};
  }

  std::optional<Contributor> fetch_profile(const std::string& login) override {
    ++calls_;
    const auto* c = corpus_.find_contributor(login);
    if (c == nullptr || c->deleted) return std::nullopt;
    return *c;
  }

  std::size_t calls() const { return calls_; }

 private:
  Corpus corpus_;
  std::atomic<std::size_t> calls_{0};
};

struct CrawlOptions {
  std::size_t profile_workers = 4;
};

/// Pulls the listed projects through `client` and validates the records with
/// the same rules as the file loader. Failed API calls become rejections.
inline LoadResult crawl(HostingClient& client, const std::vector<std::string>& projects, CrawlOptions options = {}) {
  CorpusBuilder builder;
  std::set<std::string> logins;
  for (const auto& project : projects) {
    builder.add_project(project);
    const auto stem = project_file_stem(project);
    std::vector<PullRequest> prs;
    try {
      prs = client.fetch_prs(project);
    } catch (const Error& e) {
      builder.reject("api:" + project, e.what());
      continue;
    }
    for (const auto& pr : prs) {
      const std::string origin = "api:" + project + "#" + std::to_string(pr.pr_id);
      builder.add_pr(to_json(pr), stem, origin);
      logins.insert(pr.author);
      try {
        for (const auto& c : client.fetch_comments(pr)) {
          builder.add_comment(to_json(c), stem, origin + "/comment/" + std::to_string(c.comment_id));
          logins.insert(c.author);
        }
      } catch (const Error& e) {
        builder.reject(origin + "/comments", e.what());
      }
    }
  }

  const std::vector<std::string> ordered(logins.begin(), logins.end());
  struct Fetched {
    std::optional<Contributor> profile;
    std::optional<std::string> error;
  };
  auto fetched = parallel_map<Fetched>(ordered.size(), options.profile_workers, [&](std::size_t i) {
    try {
      return Fetched{client.fetch_profile(ordered[i]), std::nullopt};
    } catch (const Error& e) {
      return Fetched{std::nullopt, std::string(e.what())};
    }
  });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (fetched[i].error) {
      builder.reject("api:user/" + ordered[i], *fetched[i].error);
      continue;
    }
    Contributor c = fetched[i].profile.value_or(Contributor{ordered[i], {}, {}, {}, true});
    builder.add_contributor(to_json(c), "api:user/" + ordered[i]);
  }
  return builder.finish();
}

}  // namespace imentor
