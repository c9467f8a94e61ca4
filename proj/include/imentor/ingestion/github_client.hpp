#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "imentor/core/error.hpp"
#include "imentor/core/parallel.hpp"
#include "imentor/ingestion/hosting_client.hpp"

namespace imentor {

/// Extracts the `rel="next"` target from an RFC 8288 Link header.
inline std::optional<std::string> next_page_link(const std::string& header) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    const auto open = header.find('<', pos);
    if (open == std::string::npos) break;
    const auto close = header.find('>', open);
    if (close == std::string::npos) break;
    const auto end = header.find(',', close);
    const auto params = header.substr(close + 1, end == std::string::npos ? std::string::npos : end - close - 1);
    if (params.find("rel=\"next\"") != std::string::npos) {
      return header.substr(open + 1, close - open - 1);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return std::nullopt;
}

/// "https://host:1/a/b?c=d" -> "/a/b?c=d"
inline std::string path_of(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) return url;
  const auto slash = url.find('/', scheme + 3);
  return slash == std::string::npos ? "/" : url.substr(slash);
}

struct GitHubClientOptions {
  std::string base_url = "https://api.github.com";
  std::string token_env = "GITHUB_TOKEN";
  double requests_per_second = 1.0;
  int page_size = 100;
  RetryPolicy retry{};
  /// Upper bound on a single quota-reset wait.
  std::chrono::seconds max_reset_wait{3600};
};

/// GitHub REST v3 adapter. Follows Link pagination and honors
/// X-RateLimit-Remaining / X-RateLimit-Reset. The token comes from the
/// environment and is never persisted.
class GitHubClient final : public HostingClient {
 public:
  explicit GitHubClient(GitHubClientOptions options = {}, Sleeper sleeper = real_sleeper())
      : options_(std::move(options)),
        sleeper_(std::move(sleeper)),
        limiter_(options_.requests_per_second, 1.0, sleeper_),
        http_(options_.base_url) {
    http_.set_connection_timeout(std::chrono::seconds(10));
    http_.set_read_timeout(std::chrono::seconds(30));
    if (const char* token = std::getenv(options_.token_env.c_str()); token != nullptr && *token != '\0') {
      token_ = token;
    }
  }

  std::vector<PullRequest> fetch_prs(const std::string& project) override {
    std::vector<PullRequest> out;
    for (const auto& item : get_paginated("/repos/" + project + "/pulls?state=all&per_page=" + page_size())) {
      PullRequest pr;
      pr.project = project;
      pr.pr_id = item.at("number").get<std::int64_t>();
      pr.author = login_of(item);
      pr.description = item.value("body", nlohmann::json()).is_string() ? item["body"].get<std::string>() : "";
      pr.created_at = parse_timestamp(item.at("created_at").get<std::string>());
      if (item.contains("merged_at") && !item["merged_at"].is_null()) {
        pr.state = PrState::merged;
      } else {
        pr.state = parse_pr_state(item.at("state").get<std::string>());
      }
      pr.reopened = was_reopened(project, pr.pr_id);
      out.push_back(std::move(pr));
    }
    return out;
  }

  /// Both discussion comments and inline review comments.
  std::vector<PRComment> fetch_comments(const PullRequest& pr) override {
    std::vector<PRComment> out;
    const std::string base = "/repos/" + pr.project;
    const std::string number = std::to_string(pr.pr_id);
    for (const auto& path : {base + "/issues/" + number + "/comments", base + "/pulls/" + number + "/comments"}) {
      for (const auto& item : get_paginated(path + "?per_page=" + page_size())) {
        PRComment c;
        c.project = pr.project;
        c.pr = pr.pr_id;
        c.comment_id = item.at("id").get<std::int64_t>();
        c.author = login_of(item);
        c.body = item.value("body", nlohmann::json()).is_string() ? item["body"].get<std::string>() : "";
        c.created_at = parse_timestamp(item.at("created_at").get<std::string>());
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  std::optional<Contributor> fetch_profile(const std::string& login) override {
    if (login == kGhost) return std::nullopt;
    auto res = get("/users/" + login);
    if (res.status == 404) return std::nullopt;
    const auto body = nlohmann::json::parse(res.body);
    Contributor c;
    c.login = body.at("login").get<std::string>();
    if (body.contains("name") && body["name"].is_string()) c.display_name = body["name"].get<std::string>();
    if (body.contains("location") && body["location"].is_string()) c.location = body["location"].get<std::string>();
    c.account_created_at = parse_timestamp(body.at("created_at").get<std::string>());
    return c;
  }

  std::size_t requests() const { return limiter_.granted(); }

 private:
  // GitHub renders deleted accounts as a null user.
  static constexpr const char* kGhost = "ghost";

  struct Response {
    int status = 0;
    std::string body;
    std::string link;
  };

  struct TransientError : ClientError {
    using ClientError::ClientError;
  };

  std::string page_size() const { return std::to_string(options_.page_size); }

  static std::string login_of(const nlohmann::json& item) {
    auto it = item.find("user");
    if (it == item.end() || it->is_null()) return kGhost;
    return it->at("login").get<std::string>();
  }

  bool was_reopened(const std::string& project, std::int64_t number) {
    for (const auto& ev : get_paginated("/repos/" + project + "/issues/" + std::to_string(number) +
                                        "/events?per_page=" + page_size())) {
      if (ev.value("event", std::string()) == "reopened") return true;
    }
    return false;
  }

  std::vector<nlohmann::json> get_paginated(std::string path) {
    std::vector<nlohmann::json> items;
    for (;;) {
      auto res = get(path);
      if (res.status == 404) throw DataError("not found: " + path);
      auto page = nlohmann::json::parse(res.body);
      if (!page.is_array()) throw DataError("expected a JSON array from " + path);
      for (auto& item : page) items.push_back(std::move(item));
      auto next = next_page_link(res.link);
      if (!next) break;
      path = path_of(*next);
    }
    return items;
  }

  Response get(const std::string& path) {
    try {
      return with_retries<TransientError>(options_.retry, sleeper_, [&] { return get_once(path); });
    } catch (const TransientError& e) {
      throw ClientError(e.what());
    }
  }

  Response get_once(const std::string& path) {
    limiter_.acquire();
    httplib::Headers headers{{"Accept", "application/vnd.github+json"}, {"User-Agent", "imentor"}};
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = http_.Get(path, headers);
    if (!res) throw TransientError("request failed: " + path + " (" + httplib::to_string(res.error()) + ")");

    const bool exhausted = res->get_header_value("X-RateLimit-Remaining") == "0";
    if (exhausted || res->status == 429) {
      wait_for_reset(*res);
      if (res->status == 403 || res->status == 429) throw TransientError("rate limited: " + path);
    }
    if (res->status >= 500) throw TransientError("server error " + std::to_string(res->status) + ": " + path);
    if (res->status != 200 && res->status != 404) {
      throw ClientError("HTTP " + std::to_string(res->status) + " for " + path);
    }
    return {res->status, res->body, res->get_header_value("Link")};
  }

  void wait_for_reset(const httplib::Response& res) {
    using namespace std::chrono;
    seconds wait{1};
    if (auto retry = res.get_header_value("Retry-After"); !retry.empty()) {
      wait = seconds(std::strtoll(retry.c_str(), nullptr, 10));
    } else if (auto reset = res.get_header_value("X-RateLimit-Reset"); !reset.empty()) {
      const auto reset_at = sys_seconds(seconds(std::strtoll(reset.c_str(), nullptr, 10)));
      const auto now = floor<seconds>(system_clock::now());
      wait = std::max(seconds{1}, reset_at - now + seconds{1});
    }
    wait = std::min(wait, options_.max_reset_wait);
    limiter_.block_until(Clock::now() + wait);
  }

  GitHubClientOptions options_;
  Sleeper sleeper_;
  RateLimiter limiter_;
  httplib::Client http_;
  std::string token_;
};

}  // namespace imentor
