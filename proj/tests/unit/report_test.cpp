#include <gtest/gtest.h>

#include <filesystem>

#include "imentor/report/pipeline.hpp"
#include "support.hpp"

using namespace imentor;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(IMENTOR_FIXTURE_DIR) / "fixture";

// Fixture tree with a small forest and one evaluated family, to keep the
// test quick; the full default configuration is exercised by acceptance.
nlohmann::json quick_config() {
  return nlohmann::json::parse(R"({
    "store": "store",
    "labels": "labels.session.ndjson",
    "classifier": {"family": "random-forest",
                   "hyperparameters": {"trees": 30, "min_samples_split": 2, "min_samples_leaf": 1},
                   "evaluate": ["naive-bayes-bernoulli"], "folds": 5},
    "genders": {"client": "fixture", "fixture": "genders.tsv", "cutoff": 0.9},
    "seeds": {"sample": 7, "train": 11}
  })");
}

std::map<std::string, std::string> bundle_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(Display, Rounding) {
  EXPECT_EQ(display(Cell::of_percent(0.93814)), "93.81%");
  EXPECT_EQ(display(Cell::of_alpha(0.05 / 3)), "0.017");
  EXPECT_EQ(display(Cell::of_p(0.0004)), "<0.001");
  EXPECT_EQ(display(Cell::of_p(0.0123)), "0.012");
  EXPECT_EQ(display(Cell::of_statistic(-0.001)), "0.00");
  EXPECT_EQ(display(Cell::of_count_share(95, 0.003567)), "95 (0.36%)");
  EXPECT_EQ(display(Cell::missing()), "NA");
}

TEST(Render, EmptyTableIsHeaderOnly) {
  const Table t("t", "Title", {"A", "B, quoted"});
  const Bundle b{"abc", 1, 2, {}, {}};
  EXPECT_EQ(render_csv(t, b), "A,\"B, quoted\",config_hash,seed_sample,seed_train\n");
  EXPECT_EQ(render_json_lines(t, b), "");
  EXPECT_NE(render_plain(t, b).find("(no rows)"), std::string::npos);
  EXPECT_THROW(render(t, b, "xml"), ArgumentError);
}

TEST(Render, RowWidthChecked) {
  Table t("t", "Title", {"A", "B"});
  EXPECT_THROW(t.add({Cell::of_count(1)}), ArgumentError);
}

TEST(Render, JsonLinesCarryProvenance) {
  Table t("t", "Title", {"Name", "Share"});
  t.add({Cell::of_text("x"), Cell::of_percent(0.5)});
  const Bundle b{"abc", 7, 11, {}, {}};
  const auto j = nlohmann::json::parse(render_json_lines(t, b));
  EXPECT_EQ(j["Share"], "50.00%");
  EXPECT_EQ(j["config_hash"], "abc");
  EXPECT_EQ(j["seed_train"], 11);
}

TEST(Config, ParseErrors) {
  EXPECT_THROW(config_from_json(nlohmann::json::object()), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"colour", 1}}), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"alpha", 1.5}}), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"alpha", "high"}}), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"formats", {"xml"}}}), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"genders", {{"client", "oracle"}}}}), ArgumentError);
  EXPECT_THROW(config_from_json({{"store", "s"}, {"classifier", {{"family", "perceptron"}}}}), ArgumentError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = config_from_json(quick_config(), "/one");
  const auto b = config_from_json(quick_config(), "/two");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  auto j = quick_config();
  j["seeds"]["train"] = 12;
  EXPECT_NE(config_hash(config_from_json(j)), config_hash(a));
  j = quick_config();
  j["workers"] = 3;
  EXPECT_EQ(config_hash(config_from_json(j)), config_hash(a));
}

TEST(Pipeline, FixtureBundleIsDeterministic) {
  TempDir dir("pipeline");
  auto cfg = config_from_json(quick_config(), kFixture);
  const auto first = run_pipeline(cfg);
  EXPECT_FALSE(first.partial());
  for (const auto& s : first.stages) EXPECT_EQ(s.status, StageStatus::ok) << s.stage << ": " << s.detail;
  write_bundle(first, dir / "a", cfg.formats);
  cfg.workers = 3;
  write_bundle(run_pipeline(cfg), dir / "b", cfg.formats);
  const auto a = bundle_files(dir / "a"), b = bundle_files(dir / "b");
  EXPECT_EQ(a.size(), first.tables.size() * 3);
  EXPECT_EQ(a, b);
  ASSERT_TRUE(first.find("pair_counts"));
  EXPECT_EQ(first.find("classifier_metrics")->rows.size(), 1u);
}

TEST(Pipeline, EmptyCorpusStillRenders) {
  TempDir dir("empty");
  fs::create_directories(dir / "store");
  spit(dir / "genders.tsv", "");
  auto j = quick_config();
  j.erase("labels");
  j["model"] = "missing.model";
  const auto cfg = config_from_json(j, dir.path());
  PipelineState st;
  const auto b = run_pipeline(cfg, &st);
  EXPECT_EQ(b.stages[0].status, StageStatus::ok);
  EXPECT_EQ(st.corpus->prs().size(), 0u);
  const auto* stats = b.find("corpus_stats");
  ASSERT_TRUE(stats);
  EXPECT_TRUE(stats->rows.empty());
  for (const auto& t : b.tables) EXPECT_NO_THROW(render_plain(t, b));
}

TEST(Pipeline, FailedStageMarksBundlePartial) {
  auto j = quick_config();
  j["labels"] = "no-such-session.ndjson";
  const auto cfg = config_from_json(j, kFixture);
  const auto b = run_pipeline(cfg);
  EXPECT_TRUE(b.partial());
  EXPECT_EQ(b.stages[0].status, StageStatus::ok);
  EXPECT_EQ(b.stages[1].stage, "classify");
  EXPECT_EQ(b.stages[1].status, StageStatus::failed);
  EXPECT_EQ(b.stages[2].status, StageStatus::skipped);
  // Demography does not depend on the classifier and still runs.
  EXPECT_EQ(b.stages[3].status, StageStatus::ok);
  const auto* pipeline = b.find("pipeline");
  ASSERT_TRUE(pipeline);
  EXPECT_EQ(pipeline->rows.size(), b.stages.size() + 1);
}
