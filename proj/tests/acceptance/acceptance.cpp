// Acceptance criteria 1-9. One PASS/FAIL line per criterion; exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "imentor/annotation/kappa.hpp"
#include "imentor/annotation/sampling.hpp"
#include "imentor/annotation/session.hpp"
#include "imentor/classifier/classify.hpp"
#include "imentor/classifier/validation.hpp"
#include "imentor/demography/homophily.hpp"
#include "imentor/relations/relations.hpp"
#include "imentor/report/table.hpp"
#include "imentor/stats/tests.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace imentor;
using namespace testing_support;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void run(int number, const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(3);
  line << (c.ok ? "PASS" : "FAIL") << " criterion " << number << ": " << name << " (" << elapsed << " s)";
  if (!c.ok) line << " -- " << c.why.str();
  std::cout << line.str() << std::endl;
  failures += c.ok ? 0 : 1;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

// ---- criterion 7 reference ----

struct MiniCorpus {
  Corpus corpus;
  Classifications classes;
};

// PR and comment times are drawn so that experience gaps frequently land
// exactly on, just inside and just outside the 183-day band.
MiniCorpus random_mini_corpus(Rng& rng) {
  static const int kOffsets[] = {0, 1, 182, 183, 184, 365, 700};
  const std::vector<std::string> people{"a", "b", "c", "d", "e"};
  std::vector<Contributor> contributors;
  for (const auto& p : people) {
    Contributor c = person(p, -static_cast<int>(rng.below(800)));
    if (rng.below(4) == 0) c.account_created_at += std::chrono::seconds(static_cast<long long>(rng.below(3)) - 1);
    contributors.push_back(c);
  }
  const std::vector<std::string> projects{"p", "q"};
  std::vector<PullRequest> prs;
  std::vector<PRComment> comments;
  Classifications classes;
  const auto n_prs = 1 + rng.below(20);
  std::int64_t next_comment = 1;
  for (std::size_t i = 0; i < n_prs; ++i) {
    const auto& project = projects[rng.below(2)];
    const int base = kOffsets[rng.below(7)] * (rng.below(2) ? 1 : -1) + 1000;
    auto p = pr(project, static_cast<std::int64_t>(i + 1), people[rng.below(people.size())], base);
    if (rng.below(5) == 0) p.created_at += std::chrono::seconds(1);
    prs.push_back(p);
    const auto n_comments = rng.below(5);
    for (std::size_t k = 0; k < n_comments; ++k) {
      const int at = base + kOffsets[rng.below(7)];
      auto c = comment(next_comment, project, p.pr_id, people[rng.below(people.size())], at);
      comments.push_back(c);
      classes[next_comment] = {0.0, rng.below(2) == 1};
      ++next_comment;
    }
  }
  return {Corpus({"p", "q"}, prs, comments, contributors), classes};
}

struct RefInstance {
  std::int64_t comment_id;
  Direction project_direction, global_direction;
};

Direction reference_direction(long long delta_seconds) {
  const long long band = 183LL * 86400;
  if (delta_seconds > band) return Direction::top_down;
  if (delta_seconds < -band) return Direction::bottom_up;
  return Direction::peer;
}

// Exhaustive scan: for every positive comment, recompute both first
// contributions from every record of the corpus.
std::vector<RefInstance> reference_instances(const MiniCorpus& m) {
  auto first_in = [&](const std::string& login, const std::string& project) {
    long long best = std::numeric_limits<long long>::max();
    for (const auto& p : m.corpus.prs()) {
      if (p.author == login && p.project == project) best = std::min<long long>(best, p.created_at.time_since_epoch().count());
    }
    for (const auto& c : m.corpus.comments()) {
      if (c.author == login && c.project == project) best = std::min<long long>(best, c.created_at.time_since_epoch().count());
    }
    return best;
  };
  auto created = [&](const std::string& login) {
    for (const auto& c : m.corpus.contributors()) {
      if (c.login == login) return static_cast<long long>(c.account_created_at.time_since_epoch().count());
    }
    throw std::logic_error("unknown contributor");
  };
  std::vector<RefInstance> out;
  for (const auto& c : m.corpus.comments()) {
    if (!m.classes.at(c.comment_id).label) continue;
    const PullRequest* target = nullptr;
    for (const auto& p : m.corpus.prs()) {
      if (p.project == c.project && p.pr_id == c.pr) target = &p;
    }
    if (target == nullptr || target->author == c.author) continue;
    out.push_back({c.comment_id, reference_direction(first_in(target->author, c.project) - first_in(c.author, c.project)),
                   reference_direction(created(target->author) - created(c.author))});
  }
  return out;
}

std::map<PrKey, Arity> reference_arities(const MiniCorpus& m) {
  std::map<PrKey, Arity> out;
  for (const auto& p : m.corpus.prs()) {
    std::vector<std::string> mentors;
    for (const auto& c : m.corpus.comments()) {
      if (c.project != p.project || c.pr != p.pr_id || c.author == p.author || !m.classes.at(c.comment_id).label) continue;
      bool seen = false;
      for (const auto& x : mentors) seen = seen || x == c.author;
      if (!seen) mentors.push_back(c.author);
    }
    if (mentors.empty()) continue;
    out[p.key()] = mentors.size() == 1 ? Arity::dyad : mentors.size() == 2 ? Arity::triad : Arity::quadrad_or_more;
  }
  return out;
}

std::string first_line(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::fixed);
  std::cout.precision(3);

  run(1, "Cochran sample size for 511314 comments is 384", [](Check& c) {
    const auto t0 = Clock::now();
    const auto n = required_sample_size(511314, 0.95, 0.05);
    const double elapsed = seconds_since(t0);
    c.expect(n == 384, "got " + std::to_string(n));
    c.expect(elapsed < 1e-3, "took " + fmt(elapsed) + " s");
  });

  run(2, "Bonferroni alpha for 3 tests displays 0.017", [](Check& c) {
    const auto shown = display(Cell::of_alpha(stats::bonferroni(0.05, 3)));
    c.expect(shown == "0.017", "displayed " + shown);
  });

  run(3, "two-proportion z-tests on the reference counts", [](Check& c) {
    const auto t0 = Clock::now();
    struct Case {
      long long x1, n1, x2, n2;
      double z, z_tol, estimate, h, h_tol;
    };
    const Case cases[] = {{27331, 95906, 390, 1036, 6.48, 0.01, -0.09, 0.19, 0.005},
                          {1353, 26240, 295, 390, 57.35, 0.05, -0.70, 1.65, 0.01}};
    for (const auto& k : cases) {
      const auto r = stats::two_prop_z_test(k.x1, k.n1, k.x2, k.n2);
      const std::string tag = std::to_string(k.x1) + "/" + std::to_string(k.n1) + ": ";
      c.expect(std::fabs(std::fabs(r.statistic) - k.z) <= k.z_tol, tag + "|z| = " + fmt(std::fabs(r.statistic)));
      c.expect(std::fabs(r.estimate - k.estimate) <= 0.005, tag + "estimate = " + fmt(r.estimate));
      c.expect(std::fabs(r.effect_size - k.h) <= k.h_tol, tag + "|h| = " + fmt(r.effect_size));
    }
    c.expect(seconds_since(t0) < 1.0, "slower than 1 s");
  });

  run(4, "homophily of pair counts (95, 295, 1353, 24887) is 93.81%", [](Check& c) {
    PairCounts p;
    p.ww = 95;
    p.wm = 295;
    p.mw = 1353;
    p.mm = 24887;
    const auto rate = homophily_rate(p);
    c.expect(rate.has_value(), "no rate");
    if (!rate) return;
    const auto shown = display(Cell::of_percent(*rate));
    c.expect(shown == "93.81%", "displayed " + shown);
    c.expect(std::fabs(*rate * 100 - 93.81) <= 0.01, "rate " + fmt(*rate));
  });

  run(5, "statistics engine agrees with the arbitrary-precision oracle on 100 fixtures", [](Check& c) {
    const auto t0 = Clock::now();
    Rng rng(20240501);
    double worst_rel = 0, worst_p = 0;
    auto rel = [&](double got, const oracle::Real& want, const std::string& what) {
      const double e = oracle::rel_err(got, want);
      worst_rel = std::max(worst_rel, e);
      c.expect(e <= 1e-8, what + " relative error " + fmt(e));
    };
    auto pabs = [&](double got, const oracle::Real& want, const std::string& what) {
      const double e = oracle::abs_err(got, want);
      worst_p = std::max(worst_p, e);
      c.expect(e <= 1e-10, what + " p-value error " + fmt(e));
    };
    for (int f = 0; f < 100; ++f) {
      const std::string tag = "fixture " + std::to_string(f) + " ";
      // Welch and Cohen's d on two normal-ish samples of differing spread.
      std::vector<double> a(2 + rng.below(60)), b(2 + rng.below(60));
      const double shift = rng.unit() * 2 - 1, spread = 0.2 + 3 * rng.unit();
      for (auto& x : a) x = 10 + (rng.unit() + rng.unit() + rng.unit() - 1.5);
      for (auto& x : b) x = 10 + shift + spread * (rng.unit() + rng.unit() + rng.unit() - 1.5);
      const auto w = stats::welch_t_test(a, b);
      const auto ow = oracle::welch(a, b);
      rel(w.statistic, ow.t, tag + "welch t");
      rel(*w.df, ow.df, tag + "welch df");
      rel(w.estimate, ow.estimate, tag + "welch estimate");
      pabs(w.p_value, ow.p_two_sided, tag + "welch");
      rel(stats::cohens_d(a, b), ow.d, tag + "cohens d");
      rel(w.effect_size, ow.d, tag + "welch effect size");

      // Two-proportion z-test, avoiding the identical-proportion case.
      const long long n1 = 5 + static_cast<long long>(rng.below(5000)), n2 = 5 + static_cast<long long>(rng.below(5000));
      long long x1 = 1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(n1 - 1)));
      long long x2 = 1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(n2 - 1)));
      if (x1 * n2 == x2 * n1) x1 = x1 == 1 ? 2 : x1 - 1;
      const auto z = stats::two_prop_z_test(x1, n1, x2, n2);
      const auto oz = oracle::z_test(x1, n1, x2, n2);
      rel(z.statistic, oz.z, tag + "z");
      rel(z.estimate, oz.estimate, tag + "z estimate");
      rel(z.effect_size, oz.h, tag + "cohens h");
      pabs(z.p_value, oz.p_two_sided, tag + "z");

      // Cohen's kappa on two correlated raters with both classes present.
      std::vector<bool> r1, r2;
      const auto n = 10 + rng.below(200);
      const double flip = 0.05 + 0.5 * rng.unit();
      for (std::size_t i = 0; i < n; ++i) {
        r1.push_back(rng.unit() < 0.4);
        r2.push_back(rng.unit() < flip ? !r1.back() : r1.back());
      }
      r1[0] = true;
      r1[1] = false;
      r2[0] = false;
      r2[1] = true;
      rel(cohens_kappa(r1, r2), oracle::kappa(r1, r2), tag + "kappa");
    }
    c.expect(seconds_since(t0) < 10.0, "slower than 10 s");
    std::cout << "  worst relative error " << std::scientific << worst_rel << ", worst p-value error " << worst_p
              << std::fixed << std::endl;
  });

  run(6, "random forest on the separable 400-comment corpus: 10-fold F1 >= 0.95, deterministic scores", [](Check& c) {
    const auto t0 = Clock::now();
    const auto examples = export_examples(read_session(fs::path(IMENTOR_FIXTURE_DIR) / "synthetic400" / "labels.session.ndjson"));
    c.expect(examples.size() == 400, "expected 400 labeled examples, got " + std::to_string(examples.size()));
    const auto hp = default_hyperparameters(Family::random_forest);
    TempDir dir("acceptance-cv");
    std::vector<std::string> files;
    double f1 = 0;
    for (std::size_t workers : {std::size_t{0}, std::size_t{1}}) {
      const auto cv = cross_validate(Family::random_forest, examples, hp, 10, 11, TrainOptions{workers});
      f1 = cv.mean.f1;
      Classifications scores;
      for (const auto& [id, s] : cv.out_of_fold) scores[id] = {s, s >= kDecisionThreshold};
      const auto file = dir / ("scores" + std::to_string(files.size()) + ".csv");
      write_scores(scores, file);
      files.push_back(slurp(file));
    }
    std::cout << "  mean F1 " << f1 << std::endl;
    c.expect(f1 >= 0.95, "F1 " + fmt(f1));
    c.expect(files[0] == files[1], "scores files differ between runs");
    c.expect(seconds_since(t0) < 120.0, "slower than 2 min");
  });

  run(7, "direction and arity match an exhaustive reference on 1000 mini-corpora", [](Check& c) {
    const auto t0 = Clock::now();
    Rng rng(777);
    std::size_t boundary_hits = 0, instances = 0;
    for (int k = 0; k < 1000 && c.ok; ++k) {
      const auto m = random_mini_corpus(rng);
      const auto got = build_instances(m.corpus, m.classes);
      const auto want = reference_instances(m);
      c.expect(got.size() == want.size(), "corpus " + std::to_string(k) + ": instance count");
      if (!c.ok) break;
      for (std::size_t i = 0; i < got.size(); ++i) {
        c.expect(got[i].comment_id == want[i].comment_id, "corpus " + std::to_string(k) + ": instance order");
        c.expect(got[i].project_direction == want[i].project_direction,
                 "corpus " + std::to_string(k) + ": project direction of comment " + std::to_string(want[i].comment_id));
        c.expect(got[i].global_direction == want[i].global_direction,
                 "corpus " + std::to_string(k) + ": global direction of comment " + std::to_string(want[i].comment_id));
        const auto gap = std::llabs(got[i].experience_delta_project.count());
        boundary_hits += gap == 183LL * 86400 || gap == 184LL * 86400 || gap == 182LL * 86400;
      }
      instances += got.size();
      const auto ref = reference_arities(m);
      c.expect(arities(got) == ref, "corpus " + std::to_string(k) + ": arity map");
      for (const auto& [key, a] : ref) c.expect(arity(key, got) == a, "corpus " + std::to_string(k) + ": arity()");
    }
    c.expect(boundary_hits > 0, "no boundary cases generated");
    std::cout << "  " << instances << " instances, " << boundary_hits << " within a day of the boundary" << std::endl;
    c.expect(seconds_since(t0) < 30.0, "slower than 30 s");
  });

  const fs::path golden = IMENTOR_GOLDEN_DIR;
  TempDir out_dir("acceptance-golden");
  run(8, "offline report for the bundled fixture reproduces the golden bundle byte-for-byte", [&](Check& c) {
    const auto t0 = Clock::now();
    const std::string cmd = std::string("\"") + IMENTOR_CLI + "\" --config fixture report --offline --out \"" +
                            (out_dir / "bundle").string() + "\" 2>\"" + (out_dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    c.expect(status == 0, "CLI exited with status " + std::to_string(status) + ": " + slurp(out_dir / "stderr.txt"));
    if (!c.ok) return;
    std::set<std::string> want, got;
    for (const auto& e : fs::directory_iterator(golden)) want.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(out_dir / "bundle")) got.insert(e.path().filename().string());
    c.expect(!want.empty(), "golden bundle is empty");
    c.expect(want == got, "file sets differ");
    for (const auto& name : want) {
      if (got.contains(name)) c.expect(slurp(golden / name) == slurp(out_dir / "bundle" / name), name + " differs");
    }
    c.expect(seconds_since(t0) < 60.0, "slower than 1 min");
  });

  run(9, "report tables carry the reference columns (corpus-dependent numbers are not reproducible at desk scale)",
      [&](Check& c) {
        const auto dir = out_dir / "bundle";
        const std::map<std::string, std::string> headers{
            {"prevalence.csv", "Measure,Value"},
            {"classifier_metrics.csv", "Classifier,Precision,Recall,F1,AUC"},
            {"arity_distribution.csv", "Arity,PRs,Share"},
            {"direction_distribution.csv", "Frame,Direction,Instances,Share,Mean gap (days),SD gap (days)"},
            {"complexity_tests.csv", "Split,n (A),n (B),Mean (A),Mean (B),t,df,P-value,Estimate,Cohen d,Adjusted alpha"},
            {"pair_counts.csv", "Pair,Overall,Top->Down,Peer->Peer,Bottom->Up"},
            {"cross_gender_tests.csv", ",Overall,Top->Down,Peer->Peer,Bottom->Up"},
            {"homophily_tests.csv", ",Overall,Top->Down,Peer->Peer,Bottom->Up"},
            {"gender_tests.csv", ",Overall,Top->Down,Peer->Peer,Bottom->Up"},
            {"corpus_stats.csv", "Dimension,Max,Min,Mean,Median"},
        };
        for (const auto& [file, cols] : headers) {
          const auto line = first_line(dir / file);
          c.expect(line.rfind(cols + ",config_hash", 0) == 0, file + " header is '" + line + "'");
        }
        std::cout << "  note: prevalence, classifier metrics, dyadic share, direction split and complexity t values "
                     "need the full multi-project crawl and its hand labels; only the table shapes are checked"
                  << std::endl;
      });

  return failures == 0 ? 0 : 1;
}
