#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "imentor/ingestion/corpus_io.hpp"
#include "imentor/ingestion/exclusions.hpp"
#include "imentor/ingestion/github_client.hpp"
#include "imentor/ingestion/hosting_client.hpp"
#include "support.hpp"

using namespace imentor;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const fs::path kData = IMENTOR_TEST_DATA_DIR;
const fs::path kFixtureStore = fs::path(IMENTOR_FIXTURE_DIR) / "fixture" / "store";

bool same_corpus(const Corpus& a, const Corpus& b) {
  auto dump = [](const Corpus& c) {
    std::string s;
    for (const auto& p : c.projects()) s += p + "\n";
    for (const auto& p : c.prs()) s += to_json(p).dump() + "\n";
    for (const auto& m : c.comments()) s += c.find_pr(m.pr_key())->project + to_json(m).dump() + "\n";
    for (const auto& u : c.contributors()) s += to_json(u).dump() + "\n";
    return s;
  };
  return dump(a) == dump(b);
}

Corpus small_corpus() {
  return Corpus({"p"},
                {pr("p", 1, "alice", 10), pr("p", 2, "bob", 11), pr("p", 3, "carol", 12)},
                {comment(1, "p", 1, "alice", 10), comment(2, "p", 1, "bob", 11), comment(3, "p", 2, "carol", 12),
                 comment(4, "p", 3, "bob", 13), comment(5, "p", 2, "bob", 14)},
                {person("alice"), person("bob"), [] {
                   auto c = person("carol");
                   c.deleted = true;
                   return c;
                 }()});
}

}  // namespace

TEST(LoadCorpus, EmptyDirectory) {
  const auto r = load_corpus(kData / "empty_store");
  EXPECT_TRUE(r.corpus.prs().empty());
  EXPECT_TRUE(r.corpus.comments().empty());
  EXPECT_TRUE(r.rejections.empty());
}

TEST(LoadCorpus, UnreadableSourceIsFatal) {
  EXPECT_THROW(load_corpus(kData / "does_not_exist"), DataError);
}

TEST(LoadCorpus, CommentOnMissingPrIsRejected) {
  const auto r = load_corpus(kData / "missing_pr");
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_NE(r.rejections[0].reason.find("missing PR"), std::string::npos);
  EXPECT_EQ(r.rejections[0].origin, "demo__app.comments.ndjson:2");
  EXPECT_EQ(r.corpus.prs().size(), 2u);
  EXPECT_EQ(r.corpus.comments().size(), 2u);
  EXPECT_EQ(r.corpus.projects(), std::vector<std::string>{"demo/app"});
  // Offsets are normalized to UTC; date-only fields are midnight UTC.
  EXPECT_EQ(r.corpus.comments().back().created_at, parse_timestamp("2019-01-12T08:00:00Z"));
  EXPECT_EQ(r.corpus.find_contributor("bob")->account_created_at, parse_timestamp("2017-05-05T00:00:00Z"));
}

TEST(LoadCorpus, MalformedRecordsBecomeRejections) {
  const auto r = load_corpus(kData / "malformed");
  EXPECT_EQ(r.rejections.size(), 10u);
  std::set<std::int64_t> prs, comments;
  for (const auto& p : r.corpus.prs()) prs.insert(p.pr_id);
  for (const auto& c : r.corpus.comments()) comments.insert(c.comment_id);
  EXPECT_EQ(prs, (std::set<std::int64_t>{1, 5}));
  EXPECT_EQ(comments, (std::set<std::int64_t>{201, 205, 206, 207}));
  const auto* ghost = r.corpus.find_contributor("ghost");
  ASSERT_NE(ghost, nullptr);
  EXPECT_TRUE(ghost->deleted);
  EXPECT_TRUE(r.corpus.find_pr({"demo/app", 5})->reopened);
  EXPECT_FALSE(r.corpus.find_pr({"demo/app", 1})->reopened);
}

TEST(LoadCorpus, FixtureCountsMatchLineCounts) {
  const auto r = load_corpus(kFixtureStore);
  ASSERT_TRUE(r.rejections.empty());
  std::size_t pr_lines = 0, comment_lines = 0;
  std::set<std::string> logins;
  for (const auto& entry : fs::directory_iterator(kFixtureStore)) {
    const auto name = entry.path().filename().string();
    if (name.ends_with(".prs.ndjson")) pr_lines += count_lines(entry.path());
    if (name.ends_with(".comments.ndjson")) comment_lines += count_lines(entry.path());
    if (name.ends_with(".contributors.ndjson")) {
      std::ifstream in(entry.path());
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) logins.insert(nlohmann::json::parse(line).at("login").get<std::string>());
      }
    }
  }
  EXPECT_EQ(r.corpus.prs().size(), pr_lines);
  EXPECT_EQ(r.corpus.comments().size(), comment_lines);
  EXPECT_EQ(r.corpus.contributors().size(), logins.size());
}

TEST(LoadCorpus, DeterministicAndOrdered) {
  const auto a = load_corpus(kFixtureStore), b = load_corpus(kFixtureStore);
  EXPECT_TRUE(same_corpus(a.corpus, b.corpus));
  const auto& prs = a.corpus.prs();
  for (std::size_t i = 1; i < prs.size(); ++i) EXPECT_LT(prs[i - 1].key(), prs[i].key());
}

TEST(LoadCorpus, SaveLoadRoundTrip) {
  TempDir dir("roundtrip");
  const auto original = load_corpus(kFixtureStore).corpus;
  save_corpus(original, dir.path());
  const auto reloaded = load_corpus(dir.path());
  EXPECT_TRUE(reloaded.rejections.empty());
  EXPECT_TRUE(same_corpus(original, reloaded.corpus));
}

TEST(Exclusions, SelfCommentRemoved) {
  const Corpus c({"p"}, {pr("p", 1, "a", 1)}, {comment(1, "p", 1, "a", 2), comment(2, "p", 1, "b", 3)},
                 {person("a"), person("b")});
  const auto out = apply_exclusions(c);
  ASSERT_EQ(out.comments().size(), 1u);
  EXPECT_EQ(out.comments()[0].author, "b");
}

TEST(Exclusions, DeletedContributorRemovedEverywhere) {
  const auto out = apply_exclusions(small_corpus());
  for (const auto& p : out.prs()) EXPECT_NE(p.author, "carol");
  for (const auto& c : out.comments()) {
    EXPECT_NE(c.author, "carol");
    EXPECT_NE(c.pr, 3);
  }
  EXPECT_EQ(out.find_contributor("carol"), nullptr);
}

TEST(Exclusions, AgreesWithBruteForceFilter) {
  const auto corpus = load_corpus(kData / "malformed").corpus;
  const auto out = apply_exclusions(corpus);
  std::set<std::int64_t> expected;
  for (const auto& c : corpus.comments()) {
    const PullRequest* parent = nullptr;
    for (const auto& p : corpus.prs()) {
      if (p.key() == c.pr_key()) parent = &p;
    }
    bool gone = parent == nullptr || c.author == parent->author;
    for (const auto& u : corpus.contributors()) {
      if (u.deleted && (u.login == c.author || (parent && u.login == parent->author))) gone = true;
    }
    if (!gone) expected.insert(c.comment_id);
  }
  std::set<std::int64_t> got;
  for (const auto& c : out.comments()) got.insert(c.comment_id);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got, (std::set<std::int64_t>{201}));
}

TEST(Exclusions, IdempotentAndMonotone) {
  for (const auto& corpus : {small_corpus(), load_corpus(kFixtureStore).corpus, load_corpus(kData / "malformed").corpus}) {
    const auto once = apply_exclusions(corpus);
    const auto twice = apply_exclusions(once);
    EXPECT_TRUE(same_corpus(once, twice));
    EXPECT_LE(once.comments().size(), corpus.comments().size());
    EXPECT_LE(once.contributors().size(), corpus.contributors().size());
    std::size_t deleted_authored = 0;
    for (const auto& p : corpus.prs()) {
      const auto* u = corpus.find_contributor(p.author);
      deleted_authored += u == nullptr || u->deleted;
    }
    EXPECT_EQ(once.prs().size(), corpus.prs().size() - deleted_authored);
  }
}

TEST(Exclusions, PrsWithoutCommentsKept) {
  const Corpus c({"p"}, {pr("p", 1, "a", 1), pr("p", 2, "a", 1)}, {comment(1, "p", 1, "a", 2)}, {person("a")});
  const auto out = apply_exclusions(c);
  EXPECT_EQ(out.prs().size(), 2u);
  EXPECT_TRUE(out.comments().empty());
}

TEST(CorpusStats, SingleProject) {
  const Corpus c({"p"}, {pr("p", 1, "a", 1), pr("p", 2, "b", 8), pr("p", 3, "a", 15)}, {comment(1, "p", 1, "b", 2)},
                 {person("a"), person("b")});
  const auto rows = corpus_stats(c);
  ASSERT_TRUE(rows);
  const auto& prs = (*rows)[2];
  EXPECT_EQ(prs.dimension, "Total Pull-request (PR)");
  EXPECT_EQ(prs.max, 3);
  EXPECT_EQ(prs.min, 3);
  EXPECT_EQ(prs.mean, 3);
  EXPECT_EQ(prs.median, 3);
  EXPECT_EQ((*rows)[0].max, 2);  // days 1..15 span two whole weeks
}

TEST(CorpusStats, MinMaxAcrossProjects) {
  // Stand-in for projects of very different sizes: 6 vs 32 PRs.
  std::vector<PullRequest> prs;
  for (int i = 0; i < 6; ++i) prs.push_back(pr("small", i + 1, "a", i));
  for (int i = 0; i < 32; ++i) prs.push_back(pr("large", i + 1, "a", i));
  const auto rows = corpus_stats(Corpus({"small", "large"}, prs, {}, {person("a")}));
  ASSERT_TRUE(rows);
  EXPECT_EQ((*rows)[2].min, 6);
  EXPECT_EQ((*rows)[2].max, 32);
  EXPECT_EQ((*rows)[2].median, 19);
}

TEST(CorpusStats, EmptyCorpus) { EXPECT_FALSE(corpus_stats(Corpus{}).has_value()); }

TEST(CorpusStats, FixtureAgreesWithHandTally) {
  const auto corpus = apply_exclusions(load_corpus(kFixtureStore).corpus);
  const auto rows = corpus_stats(corpus);
  ASSERT_TRUE(rows);
  std::map<std::string, double> prs, comments;
  std::map<std::string, std::set<std::string>> devs;
  for (const auto& p : corpus.prs()) {
    prs[p.project] += 1;
    devs[p.project].insert(p.author);
  }
  for (const auto& c : corpus.comments()) {
    comments[c.project] += 1;
    devs[c.project].insert(c.author);
  }
  double pr_sum = 0, pr_max = 0, comment_max = 0, dev_min = 1e9;
  for (const auto& [_, n] : prs) {
    pr_sum += n;
    pr_max = std::max(pr_max, n);
  }
  for (const auto& [_, n] : comments) comment_max = std::max(comment_max, n);
  for (const auto& [_, s] : devs) dev_min = std::min(dev_min, static_cast<double>(s.size()));
  EXPECT_DOUBLE_EQ((*rows)[2].mean, pr_sum / static_cast<double>(prs.size()));
  EXPECT_DOUBLE_EQ((*rows)[2].max, pr_max);
  EXPECT_DOUBLE_EQ((*rows)[3].max, comment_max);
  EXPECT_DOUBLE_EQ((*rows)[1].min, dev_min);
}

TEST(Crawl, FixtureClientReproducesTheStore) {
  const auto original = load_corpus(kFixtureStore).corpus;
  FixtureHostingClient client(original);
  const auto crawled = crawl(client, original.projects());
  EXPECT_TRUE(crawled.rejections.empty());
  EXPECT_EQ(crawled.corpus.prs().size(), original.prs().size());
  EXPECT_EQ(crawled.corpus.comments().size(), original.comments().size());
  EXPECT_GT(client.calls(), original.prs().size());
}

TEST(GitHubPaging, NextLink) {
  EXPECT_EQ(next_page_link("<https://api.github.com/x?page=2>; rel=\"next\", <https://api.github.com/x?page=5>; "
                           "rel=\"last\""),
            "https://api.github.com/x?page=2");
  EXPECT_EQ(next_page_link("<https://a/x?page=1>; rel=\"prev\", <https://a/x?page=3>; rel=\"next\""),
            "https://a/x?page=3");
  EXPECT_FALSE(next_page_link("<https://a/x?page=1>; rel=\"first\""));
  EXPECT_FALSE(next_page_link(""));
  EXPECT_EQ(path_of("https://api.github.com/repos/a/b?page=2"), "/repos/a/b?page=2");
}

namespace {

// Minimal stand-in for the hosting API on a loopback port.
class FakeGitHub {
 public:
  FakeGitHub() {
    using nlohmann::json;
    server_.Get("/repos/o/r/pulls", [this](const httplib::Request& req, httplib::Response& res) {
      if (req.get_param_value("page") == "2") {
        res.set_content(json::array({{{"number", 2}, {"user", nullptr}, {"body", nullptr}, {"state", "closed"},
                                       {"created_at", "2020-01-03T00:00:00Z"}, {"merged_at", nullptr}}})
                            .dump(),
                        "application/json");
        return;
      }
      res.set_header("Link", "<" + base() + "/repos/o/r/pulls?state=all&per_page=100&page=2>; rel=\"next\"");
      res.set_content(json::array({{{"number", 1}, {"user", {{"login", "ann"}}}, {"body", "Add cache"},
                                     {"state", "closed"}, {"created_at", "2020-01-01T00:00:00Z"},
                                     {"merged_at", "2020-01-05T00:00:00Z"}}})
                          .dump(),
                      "application/json");
    });
    server_.Get(R"(/repos/o/r/issues/(\d+)/comments)", [this](const httplib::Request& req, httplib::Response& res) {
      if (req.matches[1] == "1" && flaky_++ == 0) {
        res.status = 502;
        return;
      }
      json items = json::array();
      if (req.matches[1] == "1") {
        items.push_back({{"id", 11}, {"user", {{"login", "ben"}}}, {"body", "Do X because Y"},
                         {"created_at", "2020-01-02T00:00:00Z"}});
      }
      res.set_content(items.dump(), "application/json");
    });
    server_.Get(R"(/repos/o/r/pulls/(\d+)/comments)", [](const httplib::Request& req, httplib::Response& res) {
      json items = json::array();
      if (req.matches[1] == "1") {
        items.push_back({{"id", 12}, {"user", {{"login", "ann"}}}, {"body", "thanks"},
                         {"created_at", "2020-01-02T01:00:00Z"}});
      }
      res.set_content(items.dump(), "application/json");
    });
    server_.Get(R"(/repos/o/r/issues/(\d+)/events)", [](const httplib::Request& req, httplib::Response& res) {
      json items = json::array({{{"event", "closed"}}});
      if (req.matches[1] == "1") items.push_back({{"event", "reopened"}});
      res.set_content(items.dump(), "application/json");
    });
    server_.Get(R"(/users/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string login = req.matches[1];
      saw_token_ = req.get_header_value("Authorization") == "Bearer test-token";
      if (login == "ben") {
        res.set_content(json{{"login", "ben"}, {"name", "Ben Ode"}, {"location", nullptr},
                             {"created_at", "2012-03-04T00:00:00Z"}}
                            .dump(),
                        "application/json");
      } else if (login == "ann") {
        res.set_content(json{{"login", "ann"}, {"name", "Ann Lee"}, {"location", "Oslo, Norway"},
                             {"created_at", "2011-03-04T00:00:00Z"}}
                            .dump(),
                        "application/json");
      } else {
        res.status = 404;
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeGitHub() {
    server_.stop();
    thread_.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }
  bool saw_token() const { return saw_token_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_{0};
  std::atomic<bool> saw_token_{false};
};

}  // namespace

TEST(GitHubClient, CrawlsThroughPaginationRetriesAndGhosts) {
  FakeGitHub fake;
  ::setenv("IMENTOR_TEST_TOKEN", "test-token", 1);
  GitHubClientOptions opts;
  opts.base_url = fake.base();
  opts.token_env = "IMENTOR_TEST_TOKEN";
  opts.requests_per_second = 0;
  opts.retry = {3, std::chrono::milliseconds(1), 2.0};
  GitHubClient client(opts, [](std::chrono::milliseconds) {});
  const auto r = crawl(client, {"o/r"});
  ::unsetenv("IMENTOR_TEST_TOKEN");

  ASSERT_TRUE(r.rejections.empty()) << r.rejections[0].origin << ": " << r.rejections[0].reason;
  ASSERT_EQ(r.corpus.prs().size(), 2u);
  const auto* first = r.corpus.find_pr({"o/r", 1});
  EXPECT_EQ(first->state, PrState::merged);
  EXPECT_TRUE(first->reopened);
  EXPECT_EQ(r.corpus.find_pr({"o/r", 2})->author, "ghost");
  EXPECT_EQ(r.corpus.comments().size(), 2u);
  EXPECT_TRUE(r.corpus.find_contributor("ghost")->deleted);
  EXPECT_EQ(*r.corpus.find_contributor("ann")->location, "Oslo, Norway");
  EXPECT_TRUE(fake.saw_token());

  const auto kept = apply_exclusions(r.corpus);
  EXPECT_EQ(kept.prs().size(), 1u);
  EXPECT_EQ(kept.comments().size(), 1u);  // ann's own comment on her PR is dropped
}
