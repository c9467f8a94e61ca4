#pragma once

// Small builders shared by the unit and acceptance tests.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "imentor/core/time.hpp"
#include "imentor/ingestion/types.hpp"

namespace testing_support {

using imentor::Contributor;
using imentor::PRComment;
using imentor::PullRequest;
using imentor::Timestamp;

inline Timestamp day(int n) {
  return Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 1 / 1}} + imentor::kSecondsPerDay * n;
}

inline Contributor person(std::string login, int created_day = -1000, std::string name = "",
                          std::string location = "") {
  Contributor c;
  c.login = std::move(login);
  if (!name.empty()) c.display_name = std::move(name);
  if (!location.empty()) c.location = std::move(location);
  c.account_created_at = day(created_day);
  return c;
}

inline PullRequest pr(std::string project, std::int64_t id, std::string author, int created_day,
                      std::string description = "change", bool reopened = false) {
  PullRequest p;
  p.project = std::move(project);
  p.pr_id = id;
  p.author = std::move(author);
  p.created_at = day(created_day);
  p.description = std::move(description);
  p.reopened = reopened;
  p.state = imentor::PrState::merged;
  return p;
}

inline PRComment comment(std::int64_t id, std::string project, std::int64_t pr_id, std::string author,
                         int created_day, std::string body = "looks fine") {
  PRComment c;
  c.comment_id = id;
  c.project = std::move(project);
  c.pr = pr_id;
  c.author = std::move(author);
  c.created_at = day(created_day);
  c.body = std::move(body);
  return c;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("imentor-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

inline std::size_t count_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
  }
  return n;
}

}  // namespace testing_support
