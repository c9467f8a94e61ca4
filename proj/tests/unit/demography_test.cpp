#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <map>

#include "imentor/demography/gender.hpp"
#include "imentor/demography/homophily.hpp"
#include "imentor/demography/namsor_client.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace imentor;
using namespace testing_support;

namespace {

InferenceOptions quiet(double cutoff = 0.9) {
  InferenceOptions o;
  o.cutoff = cutoff;
  o.retry = {3, std::chrono::milliseconds(1), 2.0};
  o.workers = 2;
  o.sleeper = [](std::chrono::milliseconds) {};
  return o;
}

class FailingClient final : public GenderClient {
 public:
  std::string id() const override { return "failing"; }
  double gender_scale(const NameQuery&) override {
    ++calls;
    throw ClientError("service unavailable");
  }
  std::atomic<int> calls{0};
};

MentoringInstance instance(std::string project, std::int64_t pr_id, std::string mentee, std::string mentor,
                           Direction d = Direction::peer) {
  MentoringInstance m;
  m.pr = {std::move(project), pr_id};
  m.mentee = std::move(mentee);
  m.mentor = std::move(mentor);
  m.project_direction = d;
  return m;
}

PairCounts counts(std::size_t ww, std::size_t wm, std::size_t mw, std::size_t mm) {
  PairCounts c;
  c.ww = ww;
  c.wm = wm;
  c.mw = mw;
  c.mm = mm;
  return c;
}

}  // namespace

TEST(GenderScale, MapsToClassAndConfidence) {
  EXPECT_EQ(from_scale(0.95).gender, Gender::woman);
  EXPECT_DOUBLE_EQ(from_scale(0.95).confidence, 0.95);
  EXPECT_EQ(from_scale(-0.5).gender, Gender::man);
  EXPECT_DOUBLE_EQ(from_scale(-0.5).confidence, 0.5);
  EXPECT_THROW(from_scale(1.5), ClientError);
  EXPECT_THROW(from_scale(std::nan("")), ClientError);
}

TEST(Inference, CutoffIsStrict) {
  FixtureGenderClient client({{{"Ada L", ""}, 0.89}, {{"Bo K", ""}, -0.91}, {{"Cy D", ""}, 0.90}});
  GenderCache cache;
  const std::vector<Contributor> people{person("ada", 0, "Ada L"), person("bo", 0, "Bo K"), person("cy", 0, "Cy D")};
  const auto r = infer_genders(people, client, cache, quiet(0.9));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].contributor, "bo");
  EXPECT_EQ(r.records[0].inferred, Gender::man);
  EXPECT_EQ(r.below_cutoff, (std::vector<std::string>{"ada", "cy"}));
}

TEST(Inference, NoDisplayNameIsUnresolved) {
  FixtureGenderClient client;
  GenderCache cache;
  const std::vector<Contributor> people{person("anon")};
  const auto r = infer_genders(people, client, cache, quiet());
  ASSERT_EQ(r.unresolved.size(), 1u);
  EXPECT_EQ(r.unresolved[0].contributor, "anon");
  EXPECT_EQ(client.calls(), 0u);
}

TEST(Inference, CachedRunMakesNoCalls) {
  FixtureGenderClient client({{{"Ada L", "Lisbon"}, 0.97}, {{"Bo K", ""}, -0.99}});
  GenderCache cache;
  const std::vector<Contributor> people{person("ada", 0, "Ada L", "Lisbon"), person("bo", 0, "Bo K"),
                                        person("bo2", 0, "Bo K")};
  const auto first = infer_genders(people, client, cache, quiet());
  EXPECT_EQ(first.client_calls, 2u);  // one call per distinct (name, location)
  EXPECT_EQ(first.records.size(), 3u);
  const auto second = infer_genders(people, client, cache, quiet());
  EXPECT_EQ(second.client_calls, 0u);
  EXPECT_EQ(client.calls(), 2u);
  ASSERT_EQ(second.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(second.records[i].contributor, first.records[i].contributor);
    EXPECT_EQ(second.records[i].inferred, first.records[i].inferred);
  }
}

TEST(Inference, FailingClientIsRetriedThenUnresolved) {
  FailingClient client;
  GenderCache cache;
  const std::vector<Contributor> people{person("ada", 0, "Ada L")};
  const auto r = infer_genders(people, client, cache, quiet());
  EXPECT_EQ(client.calls.load(), 3);
  ASSERT_EQ(r.unresolved.size(), 1u);
  EXPECT_NE(r.unresolved[0].reason.find("unavailable"), std::string::npos);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(Inference, LocationSpecificEntryWins) {
  FixtureGenderClient client({{{"Sam R", ""}, -0.95}, {{"Sam R", "Rome"}, 0.96}});
  GenderCache cache;
  const std::vector<Contributor> people{person("a", 0, "Sam R", "Rome"), person("b", 0, "Sam R", "Oslo")};
  const auto r = infer_genders(people, client, cache, quiet());
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].inferred, Gender::woman);
  EXPECT_EQ(r.records[1].inferred, Gender::man);
}

TEST(GenderCache, SaveLoadRoundTrip) {
  TempDir dir("cache");
  GenderCache cache;
  cache.insert({"Ada L", "Lisbon"}, {Gender::woman, 0.973});
  cache.insert({"Bo K", ""}, {Gender::man, 0.1 + 0.2});
  cache.save(dir / "c.tsv");
  const auto back = GenderCache::load(dir / "c.tsv");
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(back.find({"Bo K", ""})->confidence, 0.1 + 0.2);
  EXPECT_EQ(back.find({"Ada L", "Lisbon"})->gender, Gender::woman);
  EXPECT_FALSE(back.find({"Ada L", ""}));
  EXPECT_EQ(GenderCache::load(dir / "missing.tsv").size(), 0u);
  spit(dir / "bad.tsv", "only\ttwo\n");
  EXPECT_THROW(GenderCache::load(dir / "bad.tsv"), DataError);
}

TEST(GenderRecords, FileRoundTrip) {
  TempDir dir("records");
  const std::vector<GenderRecord> records{{"ada", Gender::woman, 0.97, "fixture"}, {"bo", Gender::man, 0.91, "fixture"}};
  write_gender_records(records, dir / "g.tsv");
  const auto back = read_gender_records(dir / "g.tsv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].contributor, "bo");
  EXPECT_EQ(back[0].probability, 0.97);
}

TEST(Screening, MatchesBruteForce) {
  // p: men only; q: one woman; r: nobody gendered.
  const Corpus c({"p", "q", "r"},
                 {pr("p", 1, "m1", 0), pr("q", 1, "m1", 0), pr("r", 1, "x", 0)},
                 {comment(1, "p", 1, "m2", 1), comment(2, "q", 1, "w1", 1), comment(3, "r", 1, "y", 1)},
                 {person("m1"), person("m2"), person("w1"), person("x"), person("y")});
  const GenderMap g{{"m1", Gender::man}, {"m2", Gender::man}, {"w1", Gender::woman}};
  const auto s = screen_projects(c, g);
  EXPECT_EQ(s.retained, std::vector<std::string>{"q"});
  ASSERT_EQ(s.excluded.size(), 2u);
  EXPECT_EQ(s.excluded[0].first, "p");
  EXPECT_EQ(s.excluded[1].first, "r");

  std::vector<std::string> brute;
  for (const auto& project : c.projects()) {
    bool woman = false;
    for (const auto& p : c.prs()) woman |= p.project == project && g.count(p.author) && g.at(p.author) == Gender::woman;
    for (const auto& m : c.comments()) {
      woman |= m.project == project && g.count(m.author) && g.at(m.author) == Gender::woman;
    }
    if (woman) brute.push_back(project);
  }
  EXPECT_EQ(s.retained, brute);

  const std::vector<MentoringInstance> inst{instance("p", 1, "m1", "m2"), instance("q", 1, "m1", "w1")};
  const auto kept = restrict_to_projects(inst, s.retained);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].pr.project, "q");
}

TEST(PairCounts, WomanMentoringMan) {
  const GenderMap g{{"w", Gender::woman}, {"m", Gender::man}};
  const std::vector<MentoringInstance> inst{instance("p", 1, "m", "w")};
  const auto c = pair_counts(inst, g);
  EXPECT_EQ(c.ww, 0u);
  EXPECT_EQ(c.wm, 1u);
  EXPECT_EQ(c.mw, 0u);
  EXPECT_EQ(c.mm, 0u);
}

TEST(PairCounts, DroppedPlusCountedIsTotal) {
  Rng rng(8);
  const GenderMap g{{"w1", Gender::woman}, {"w2", Gender::woman}, {"m1", Gender::man}, {"m2", Gender::man}};
  const std::vector<std::string> people{"w1", "w2", "m1", "m2", "u1", "u2"};
  for (int k = 0; k < 50; ++k) {
    std::vector<MentoringInstance> inst;
    const auto n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      inst.push_back(instance("p", 1, people[rng.below(6)], people[rng.below(6)],
                              kDirections[rng.below(3)]));
    }
    const auto c = pair_counts(inst, g);
    EXPECT_EQ(c.total() + c.dropped, inst.size());
    const auto by = pair_counts_by_direction(inst, g);
    std::size_t sum = 0;
    for (const auto& d : by.by_direction) sum += d.total();
    EXPECT_EQ(sum, by.overall.total());
  }
}

TEST(Homophily, ReferenceCounts) {
  const auto rate = homophily_rate(counts(95, 295, 1353, 24887));
  ASSERT_TRUE(rate);
  EXPECT_NEAR(*rate, 0.9381, 5e-5);
}

TEST(Homophily, EdgeCases) {
  EXPECT_DOUBLE_EQ(*homophily_rate(counts(1, 0, 0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(*homophily_rate(counts(0, 1, 1, 0)), 0.0);
  EXPECT_FALSE(homophily_rate(counts(0, 0, 0, 0)));
}

TEST(Homophily, InvariantUnderGenderSwap) {
  Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    const auto c = counts(rng.below(50), rng.below(50), rng.below(50), 1 + rng.below(50));
    const auto swapped = counts(c.mm, c.mw, c.wm, c.ww);
    EXPECT_DOUBLE_EQ(*homophily_rate(c), *homophily_rate(swapped));
  }
}

TEST(CrossGender, ReferenceTopDownEstimate) {
  const auto t = cross_gender_test(counts(5, 83, 729, 12876), {stats::Tail::two_sided, 0.05 / 3});
  ASSERT_TRUE(t.result);
  EXPECT_NEAR(t.result->estimate, -0.89, 0.005);
  const auto ref = oracle::z_test(729, 729 + 12876, 83, 5 + 83);
  EXPECT_LE(oracle::rel_err(t.result->statistic, ref.z), 1e-8);
  EXPECT_LE(oracle::rel_err(t.result->estimate, ref.estimate), 1e-8);
  const auto overall = cross_gender_test(counts(95, 295, 1353, 24887), {});
  EXPECT_NEAR(overall.result->estimate, -0.70, 0.005);
}

TEST(CrossGender, EmptyGroupIsReported) {
  const auto t = cross_gender_test(counts(0, 0, 3, 4), {});
  EXPECT_FALSE(t.result);
  EXPECT_FALSE(t.error.empty());
}

TEST(HomophilyTest, SameVersusCrossShare) {
  const auto t = homophily_test(counts(95, 295, 1353, 24887), {});
  ASSERT_TRUE(t.result);
  EXPECT_NEAR(t.result->estimate, 0.9381 - 0.0619, 1e-3);
  EXPECT_LT(t.result->p_value, 1e-3);
}

TEST(GenderSummary, CountsGenderedCommentAuthors) {
  const Corpus c({"p"}, {pr("p", 1, "a", 0)},
                 {comment(1, "p", 1, "w", 1), comment(2, "p", 1, "w", 2), comment(3, "p", 1, "m", 3),
                  comment(4, "p", 1, "u", 4)},
                 {person("a"), person("w"), person("m"), person("u")});
  const GenderMap g{{"w", Gender::woman}, {"m", Gender::man}};
  const Classifications cls{{1, {0.9, true}}, {2, {0.1, false}}, {3, {0.2, false}}, {4, {0.9, true}}};
  const auto s = gender_summary(c, cls, g);
  EXPECT_EQ(s.women.comments, 2u);
  EXPECT_EQ(s.women.mentoring_comments, 1u);
  EXPECT_EQ(s.women.mentors, 1u);
  EXPECT_EQ(s.men.commenters, 1u);
  EXPECT_EQ(s.men.mentors, 0u);
}

TEST(Namsor, RequiresKeyFromEnvironment) {
  NamsorClientOptions opts;
  opts.key_env = "IMENTOR_TEST_UNSET_KEY";
  ::unsetenv("IMENTOR_TEST_UNSET_KEY");
  EXPECT_THROW(NamsorGenderClient{opts}, ArgumentError);
  EXPECT_EQ(country_code("Lisbon, Portugal"), std::optional<std::string>("PT"));
}
