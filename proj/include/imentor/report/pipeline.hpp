#pragma once

#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "imentor/annotation/session.hpp"
#include "imentor/classifier/classify.hpp"
#include "imentor/classifier/validation.hpp"
#include "imentor/demography/homophily.hpp"
#include "imentor/demography/namsor_client.hpp"
#include "imentor/ingestion/corpus_io.hpp"
#include "imentor/ingestion/exclusions.hpp"
#include "imentor/metrics/metrics.hpp"
#include "imentor/relations/relations.hpp"
#include "imentor/report/config.hpp"
#include "imentor/report/table.hpp"

namespace imentor {

inline constexpr const char* kColumnLabels[] = {"Overall", "Top->Down", "Peer->Peer", "Bottom->Up"};

// ---- table builders ----

inline Table pipeline_table(const std::vector<StageReport>& stages) {
  Table t{"pipeline", "Pipeline stages", {"Stage", "Status", "Detail"}};
  bool partial = false;
  for (const auto& s : stages) {
    t.add({Cell::of_text(s.stage), Cell::of_text(std::string(to_string(s.status))), Cell::of_text(s.detail)});
    partial = partial || s.status != StageStatus::ok;
  }
  t.add({Cell::of_text("bundle"), Cell::of_text(partial ? "partial" : "complete"), Cell::of_text("")});
  return t;
}

inline Table corpus_stats_table(const std::optional<std::vector<DimensionSummary>>& rows) {
  Table t{"corpus_stats", "Dataset summary over projects", {"Dimension", "Max", "Min", "Mean", "Median"}};
  if (!rows) return t;
  for (const auto& r : *rows) {
    t.add({Cell::of_text(r.dimension), Cell::of_count(static_cast<long long>(r.max)),
           Cell::of_count(static_cast<long long>(r.min)), Cell::of_real(r.mean), Cell::of_real(r.median)});
  }
  return t;
}

inline Table irr_table(const std::optional<IrrReport>& irr) {
  Table t{"irr", "Inter-rater reliability", {"Annotator A", "Annotator B", "Overlap", "Agreement", "Cohen kappa"}};
  if (!irr) return t;
  t.add({Cell::of_text(irr->annotator_a), Cell::of_text(irr->annotator_b),
         Cell::of_count(static_cast<long long>(irr->overlap)), Cell::of_percent(irr->observed_agreement),
         Cell::of_statistic(irr->kappa)});
  return t;
}

inline Table classifier_table(const std::vector<std::pair<Family, EvalMetrics>>& rows, std::size_t folds) {
  Table t{"classifier_metrics", "Classifier performance", {"Classifier", "Precision", "Recall", "F1", "AUC"}};
  for (const auto& [family, m] : rows) {
    t.add({Cell::of_text(std::string(display_name(family))), Cell::of_statistic(m.precision),
           Cell::of_statistic(m.recall), Cell::of_statistic(m.f1),
           m.auc ? Cell::of_statistic(*m.auc) : Cell::missing()});
  }
  if (!rows.empty()) t.notes.push_back(std::to_string(folds) + "-fold cross-validation means");
  return t;
}

inline Table direction_table(const std::optional<DirectionDistribution>& project,
                             const std::optional<DirectionDistribution>& global) {
  Table t{"direction_distribution",
          "Direction of implicit mentoring",
          {"Frame", "Direction", "Instances", "Share", "Mean gap (days)", "SD gap (days)"}};
  auto add = [&](const char* frame, const std::optional<DirectionDistribution>& d) {
    if (!d || d->total == 0) return;
    for (auto dir : kDirections) {
      const auto& c = (*d)[dir];
      t.add({Cell::of_text(frame), Cell::of_text(std::string(to_string(dir))),
             Cell::of_count(static_cast<long long>(c.count)), Cell::of_percent(c.share),
             c.mean_gap_days ? Cell::of_real(*c.mean_gap_days) : Cell::missing(),
             c.sd_gap_days ? Cell::of_real(*c.sd_gap_days) : Cell::missing()});
    }
  };
  add("project", project);
  add("global", global);
  return t;
}

inline Table arity_table(const std::optional<ArityDistribution>& a) {
  Table t{"arity_distribution", "Group size of implicit mentoring per PR", {"Arity", "PRs", "Share"}};
  if (!a || a->prs == 0) return t;
  for (auto k : kArities) {
    const auto n = a->counts[static_cast<std::size_t>(k)];
    t.add({Cell::of_text(std::string(to_string(k))), Cell::of_count(static_cast<long long>(n)),
           Cell::of_percent(static_cast<double>(n) / static_cast<double>(a->prs))});
  }
  return t;
}

inline Table gender_summary_table(const std::optional<GenderSummary>& s) {
  Table t{"gender_summary", "Implicit mentoring by gender", {"", "women", "men", "Total"}};
  if (!s || s->women.comments + s->men.comments == 0) return t;
  auto row = [&](const char* label, std::size_t w, std::size_t m) {
    const auto total = w + m;
    const double tw = total ? static_cast<double>(w) / static_cast<double>(total) : 0.0;
    const double tm = total ? static_cast<double>(m) / static_cast<double>(total) : 0.0;
    t.add({Cell::of_text(label), Cell::of_count_share(static_cast<long long>(w), tw),
           Cell::of_count_share(static_cast<long long>(m), tm), Cell::of_count(static_cast<long long>(total))});
  };
  row("PR-comment developers", s->women.commenters, s->men.commenters);
  row("Implicit mentors", s->women.mentors, s->men.mentors);
  row("PR-comments", s->women.comments, s->men.comments);
  row("PR-comments w/ implicit mentoring", s->women.mentoring_comments, s->men.mentoring_comments);
  return t;
}

inline Table project_screening_table(const std::vector<ProjectGenderCounts>& counts,
                                     const std::optional<ProjectScreening>& screening) {
  Table t{"project_screening",
          "Gender distribution per project",
          {"Project", "Women", "Men", "Ungendered", "Status", "Reason"}};
  if (!screening) return t;
  for (const auto& c : counts) {
    std::string status = "retained", reason;
    for (const auto& [p, why] : screening->excluded) {
      if (p == c.project) {
        status = "excluded";
        reason = why;
      }
    }
    t.add({Cell::of_text(c.project), Cell::of_count(static_cast<long long>(c.women)),
           Cell::of_count(static_cast<long long>(c.men)), Cell::of_count(static_cast<long long>(c.ungendered)),
           Cell::of_text(status), Cell::of_text(reason)});
  }
  return t;
}

inline Table pair_counts_table(const std::optional<PairCountsByDirection>& p) {
  Table t{"pair_counts", "Implicit mentoring gender pairs (mentor->mentee)",
          {"Pair", kColumnLabels[0], kColumnLabels[1], kColumnLabels[2], kColumnLabels[3]}};
  if (!p || p->overall.total() + p->overall.dropped == 0) return t;
  std::array<const PairCounts*, 4> cols{&p->overall, &p->by_direction[0], &p->by_direction[1], &p->by_direction[2]};
  auto row = [&](const char* label, std::size_t PairCounts::*field) {
    std::vector<Cell> cells{Cell::of_text(label)};
    for (const auto* c : cols) {
      const double share = c->total() ? static_cast<double>(c->*field) / static_cast<double>(c->total()) : 0.0;
      cells.push_back(Cell::of_count_share(static_cast<long long>(c->*field), share));
    }
    t.add(std::move(cells));
  };
  row("W->W", &PairCounts::ww);
  row("W->M", &PairCounts::wm);
  row("M->W", &PairCounts::mw);
  row("M->M", &PairCounts::mm);
  std::vector<Cell> total{Cell::of_text("Total")}, homophily{Cell::of_text("Homophily")},
      dropped{Cell::of_text("Dropped (ungendered endpoint)")};
  for (const auto* c : cols) {
    total.push_back(Cell::of_count(static_cast<long long>(c->total())));
    const auto h = homophily_rate(*c);
    homophily.push_back(h ? Cell::of_percent(*h) : Cell::missing());
    dropped.push_back(Cell::of_count(static_cast<long long>(c->dropped)));
  }
  t.add(std::move(total));
  t.add(std::move(homophily));
  t.add(std::move(dropped));
  return t;
}

inline Table proportion_tests_table(std::string name, std::string title, const std::optional<DirectionalTests>& tests,
                                    bool verbose, std::vector<std::string> definitions) {
  Table t{std::move(name), std::move(title), {"", kColumnLabels[0], kColumnLabels[1], kColumnLabels[2], kColumnLabels[3]}};
  if (!tests) return t;
  auto row = [&](const char* label, auto get) {
    std::vector<Cell> cells{Cell::of_text(label)};
    for (const auto& o : *tests) cells.push_back(o.result ? get(*o.result) : Cell::missing());
    t.add(std::move(cells));
  };
  row("Z-score", [](const stats::StatResult& r) { return Cell::of_statistic(r.statistic); });
  row("P-value", [](const stats::StatResult& r) { return Cell::of_p(r.p_value); });
  if (verbose) row("P-value (one-sided)", [](const stats::StatResult& r) { return Cell::of_p(r.p_one_sided); });
  row("Estimated differences", [](const stats::StatResult& r) { return Cell::of_statistic(r.estimate); });
  row("Cohen h", [](const stats::StatResult& r) { return Cell::of_statistic(r.effect_size); });
  row("Adjusted alpha", [](const stats::StatResult& r) { return Cell::of_alpha(r.alpha_adjusted); });
  row("Significant", [](const stats::StatResult& r) { return Cell::of_text(r.significant() ? "yes" : "no"); });
  t.notes = std::move(definitions);
  for (std::size_t k = 0; k < tests->size(); ++k) {
    if (!(*tests)[k].result) t.notes.push_back(std::string(kColumnLabels[k]) + ": " + (*tests)[k].error);
  }
  return t;
}

inline Table prevalence_table(const std::optional<Prevalence>& p) {
  Table t{"prevalence", "Prevalence of implicit mentoring", {"Measure", "Value"}};
  if (!p) return t;
  t.add({Cell::of_text("PRs"), Cell::of_count(static_cast<long long>(p->prs))});
  t.add({Cell::of_text("PRs with implicit mentoring"), Cell::of_count(static_cast<long long>(p->prs_with_mentoring))});
  t.add({Cell::of_text("Share of PRs with implicit mentoring"), Cell::of_percent(p->pr_fraction)});
  t.add({Cell::of_text("PR-comment authors"), Cell::of_count(static_cast<long long>(p->comment_authors))});
  t.add({Cell::of_text("Implicit mentors"), Cell::of_count(static_cast<long long>(p->mentors))});
  t.add({Cell::of_text("Share of PR-comment authors who mentor"), Cell::of_percent(p->mentor_fraction)});
  t.add({Cell::of_text("Mean PR-comments per PR"), Cell::of_real(p->mean_comments_per_pr)});
  t.add({Cell::of_text("SD PR-comments per PR"), p->sd ? Cell::of_real(*p->sd) : Cell::missing()});
  return t;
}

inline Table complexity_table(const std::optional<ComplexityResults>& c, bool verbose) {
  std::vector<std::string> cols{"Split", "n (A)", "n (B)", "Mean (A)", "Mean (B)", "t", "df",
                                "P-value", "Estimate", "Cohen d", "Adjusted alpha"};
  if (verbose) cols.push_back("P-value (one-sided)");
  Table t{"complexity_tests", "Mentoring comments per PR by complexity (Welch t-test)", cols};
  if (!c || c->wordiness.group_a + c->wordiness.group_b == 0) return t;
  auto row = [&](const char* label, const ComplexityTest& x) {
    const auto& r = x.outcome.result;
    std::vector<Cell> cells{Cell::of_text(label),
                            Cell::of_count(static_cast<long long>(x.group_a)),
                            Cell::of_count(static_cast<long long>(x.group_b)),
                            x.group_a ? Cell::of_real(x.mean_a) : Cell::missing(),
                            x.group_b ? Cell::of_real(x.mean_b) : Cell::missing(),
                            r ? Cell::of_statistic(r->statistic) : Cell::missing(),
                            r && r->df ? Cell::of_real(*r->df) : Cell::missing(),
                            r ? Cell::of_p(r->p_value) : Cell::missing(),
                            r ? Cell::of_statistic(r->estimate) : Cell::missing(),
                            r ? Cell::of_statistic(r->effect_size) : Cell::missing(),
                            r ? Cell::of_alpha(r->alpha_adjusted) : Cell::missing()};
    if (verbose) cells.push_back(r ? Cell::of_p(r->p_one_sided) : Cell::missing());
    t.add(std::move(cells));
    if (!r) t.notes.push_back(std::string(label) + ": " + x.outcome.error);
  };
  row("wordy vs less wordy", c->wordiness);
  row("reopened vs never reopened", c->reopened);
  t.notes.insert(t.notes.begin(), "wordy: description longer than the median of " +
                                      detail::fixed(c->median_words, 1) + " words");
  return t;
}

// ---- pipeline ----

/// Stands in for the HTTP client in offline mode: every cache miss fails.
class OfflineGenderClient final : public GenderClient {
 public:
  std::string id() const override { return "namsor"; }
  double gender_scale(const NameQuery&) override { throw ClientError("offline: not in cache"); }
};

/// Intermediate results, exposed for the CLI verbs that stop early.
struct PipelineState {
  std::optional<Corpus> corpus;
  std::size_t rejections = 0;
  std::optional<AnnotationSession> session;
  std::optional<TrainedModel> model;
  std::optional<Classifications> classes;
  std::optional<std::vector<MentoringInstance>> instances;
  std::optional<GenderMap> genders;
  std::optional<ProjectScreening> screening;
  std::optional<PairCountsByDirection> pairs;
  std::optional<Prevalence> prevalence;
  std::optional<ComplexityResults> complexity;
};

namespace detail {

template <typename Fn>
StageReport run_stage(const char* name, bool ready, const std::string& missing, Fn&& fn) {
  if (!ready) return {name, StageStatus::skipped, missing};
  try {
    return {name, StageStatus::ok, fn()};
  } catch (const std::exception& e) {
    return {name, StageStatus::failed, e.what()};
  }
}

}  // namespace detail

/// ingest -> classify -> relations -> demography -> metrics -> stats. A
/// failed stage is recorded and later stages run when their inputs exist.
inline Bundle run_pipeline(const Config& cfg, PipelineState* state_out = nullptr) {
  PipelineState st;
  Bundle bundle;
  bundle.config_hash = config_hash(cfg);
  bundle.seed_sample = cfg.seed_sample;
  bundle.seed_train = cfg.seed_train;
  const stats::TestOptions test_opts{stats::Tail::two_sided, stats::bonferroni(cfg.alpha, cfg.bonferroni_tests)};
  std::optional<IrrReport> irr;
  std::vector<std::pair<Family, EvalMetrics>> evaluation;
  std::optional<DirectionDistribution> dir_project, dir_global;
  std::optional<ArityDistribution> arity;
  std::vector<ProjectGenderCounts> gender_counts;
  std::optional<GenderSummary> summary;
  std::optional<DirectionalTests> gender_tests, cross_tests, homophily;

  bundle.stages.push_back(detail::run_stage("ingest", true, "", [&] {
    auto loaded = load_corpus(cfg.resolve(cfg.store));
    st.rejections = loaded.rejections.size();
    st.corpus = apply_exclusions(loaded.corpus);
    return std::to_string(st.corpus->prs().size()) + " PRs, " + std::to_string(st.corpus->comments().size()) +
           " comments after exclusions; " + std::to_string(st.rejections) + " records rejected";
  }));

  bundle.stages.push_back(detail::run_stage("classify", st.corpus.has_value(), "no corpus", [&] {
    const TrainOptions topts{cfg.workers};
    std::vector<LabeledExample> examples;
    if (cfg.labels) {
      st.session = read_session(cfg.resolve(*cfg.labels));
      if (st.session->annotators().size() >= 2) irr = inter_rater_reliability(*st.session);
      examples = export_examples(*st.session);
      for (auto f : cfg.evaluate) {
        const auto hp = f == cfg.family ? cfg.hyperparameters : nlohmann::json::object();
        evaluation.emplace_back(f, cross_validate(f, examples, hp, cfg.folds, cfg.seed_train, topts).mean);
      }
    }
    if (cfg.model) {
      st.model = load_model(cfg.resolve(*cfg.model));
    } else if (cfg.labels) {
      st.model = train(cfg.family, examples, cfg.hyperparameters, cfg.seed_train, topts);
    } else {
      throw ArgumentError("config names neither a model nor a labels session");
    }
    st.classes = classify_corpus(*st.model, *st.corpus, cfg.workers);
    std::size_t positive = 0;
    for (const auto& [id, c] : *st.classes) positive += c.label;
    return std::string(display_name(st.model->family)) + "; " + std::to_string(positive) + " of " +
           std::to_string(st.classes->size()) + " comments classified as implicit mentoring";
  }));

  bundle.stages.push_back(detail::run_stage("relations", st.classes.has_value(), "no classifications", [&] {
    st.instances = build_instances(*st.corpus, *st.classes, cfg.threshold_days);
    dir_project = direction_distribution(*st.instances, Frame::project);
    dir_global = direction_distribution(*st.instances, Frame::global);
    arity = arity_distribution(*st.instances);
    return std::to_string(st.instances->size()) + " mentoring instances on " + std::to_string(arity->prs) + " PRs";
  }));

  bundle.stages.push_back(detail::run_stage("demography", st.corpus.has_value(), "no corpus", [&] {
    std::unique_ptr<GenderClient> client;
    InferenceOptions iopts;
    iopts.cutoff = cfg.genders.cutoff;
    iopts.workers = cfg.workers;
    if (cfg.genders.client == "fixture") {
      if (!cfg.genders.fixture) throw ArgumentError("genders.fixture is required for the fixture client");
      client = std::make_unique<FixtureGenderClient>(FixtureGenderClient::from_file(cfg.resolve(*cfg.genders.fixture)));
    } else if (cfg.offline) {
      client = std::make_unique<OfflineGenderClient>();
      iopts.retry.max_attempts = 1;
    } else {
      client = std::make_unique<NamsorGenderClient>();
      iopts.requests_per_second = cfg.genders.requests_per_second;
    }
    GenderCache cache;
    if (cfg.genders.cache) cache = GenderCache::load(cfg.resolve(*cfg.genders.cache));
    const auto result = infer_genders(st.corpus->contributors(), *client, cache, iopts);
    if (cfg.genders.cache && cfg.genders.client == "http" && !cfg.offline) cache.save(cfg.resolve(*cfg.genders.cache));
    st.genders = gender_map(result.records);
    gender_counts = project_gender_counts(*st.corpus, *st.genders);
    st.screening = screen_projects(*st.corpus, *st.genders);
    std::string detail = std::to_string(result.records.size()) + " contributors gendered, " +
                         std::to_string(result.below_cutoff.size()) + " below cutoff, " +
                         std::to_string(result.unresolved.size()) + " unresolved; " +
                         std::to_string(st.screening->excluded.size()) + " projects excluded";
    if (st.classes) summary = gender_summary(*st.corpus, *st.classes, *st.genders);
    if (st.instances) {
      const auto kept = restrict_to_projects(*st.instances, st.screening->retained);
      st.pairs = pair_counts_by_direction(kept, *st.genders);
    }
    return detail;
  }));

  bundle.stages.push_back(detail::run_stage("metrics", st.instances.has_value(), "no mentoring instances", [&] {
    st.prevalence = prevalence(*st.corpus, *st.instances);
    st.complexity = complexity_tests(*st.corpus, *st.instances, test_opts);
    return std::string(st.prevalence ? "prevalence and complexity computed" : "empty corpus");
  }));

  const bool have_gender_inputs = st.genders && st.classes;
  bundle.stages.push_back(
      detail::run_stage("stats", have_gender_inputs || st.complexity, "no inputs for any test", [&] {
        std::vector<std::string> ran;
        if (have_gender_inputs) {
          gender_tests = gender_proportion_tests(*st.corpus, *st.classes, *st.genders, test_opts, cfg.threshold_days);
          ran.push_back("gender proportion tests");
        }
        if (st.pairs) {
          cross_tests = cross_gender_tests(*st.pairs, test_opts);
          homophily = homophily_tests(*st.pairs, test_opts);
          ran.push_back("cross-gender and homophily tests");
        }
        if (st.complexity) ran.push_back("complexity tests");
        std::string out;
        for (const auto& r : ran) out += (out.empty() ? "" : ", ") + r;
        return out;
      }));

  bundle.tables.push_back(pipeline_table(bundle.stages));
  bundle.tables.push_back(corpus_stats_table(st.corpus ? corpus_stats(*st.corpus) : std::nullopt));
  bundle.tables.push_back(irr_table(irr));
  bundle.tables.push_back(classifier_table(evaluation, cfg.folds));
  bundle.tables.push_back(direction_table(dir_project, dir_global));
  bundle.tables.push_back(arity_table(arity));
  bundle.tables.push_back(prevalence_table(st.prevalence));
  bundle.tables.push_back(complexity_table(st.complexity, cfg.verbose));
  bundle.tables.push_back(gender_summary_table(summary));
  bundle.tables.push_back(proportion_tests_table(
      "gender_tests", "Mentoring share of PR-comments, men vs women (two-proportion z-test)",
      summary && summary->women.comments + summary->men.comments ? gender_tests : std::nullopt, cfg.verbose,
      {"P1: PR-comments by men, mentoring/all", "P2: PR-comments by women, mentoring/all",
       "effect size is Cohen's h (arcsine difference)"}));
  bundle.tables.push_back(project_screening_table(gender_counts, st.screening));
  bundle.tables.push_back(pair_counts_table(st.pairs));
  const bool have_pairs = st.pairs && st.pairs->overall.total() > 0;
  bundle.tables.push_back(proportion_tests_table(
      "cross_gender_tests", "Cross-gender mentoring (two-proportion z-test)", have_pairs ? cross_tests : std::nullopt,
      cfg.verbose,
      {"P1: M->W / (M->M + M->W)", "P2: W->M / (W->W + W->M)", "effect size is Cohen's h (arcsine difference)"}));
  bundle.tables.push_back(proportion_tests_table(
      "homophily_tests", "Same-gender vs cross-gender mentoring (two-proportion z-test)",
      have_pairs ? homophily : std::nullopt, cfg.verbose,
      {"P1: (W->W + M->M) / Total", "P2: (W->M + M->W) / Total", "effect size is Cohen's h (arcsine difference)"}));
  if (state_out) *state_out = std::move(st);
  return bundle;
}

}  // namespace imentor
