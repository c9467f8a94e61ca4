#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imentor/annotation/sampling.hpp"
#include "imentor/annotation/session.hpp"
#include "imentor/classifier/classify.hpp"
#include "imentor/classifier/validation.hpp"
#include "imentor/demography/homophily.hpp"
#include "imentor/demography/namsor_client.hpp"
#include "imentor/ingestion/corpus_io.hpp"
#include "imentor/ingestion/exclusions.hpp"
#include "imentor/ingestion/github_client.hpp"
#include "imentor/ingestion/hosting_client.hpp"
#include "imentor/relations/relations.hpp"
#include "imentor/report/pipeline.hpp"

#ifndef IMENTOR_FIXTURE_DIR
#define IMENTOR_FIXTURE_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using namespace imentor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed_sample;
  std::optional<std::uint64_t> seed_train;
  bool offline = false;
  std::size_t workers = 0;
};

/// `fixture` (or any bare name) resolves to a bundled fixture config.
fs::path config_path(const std::string& name) {
  if (fs::exists(name)) return name;
  const char* env = std::getenv("IMENTOR_FIXTURES");
  const fs::path root = env != nullptr ? fs::path(env) : fs::path(IMENTOR_FIXTURE_DIR);
  const auto bundled = root / name / "config.json";
  if (fs::exists(bundled)) return bundled;
  throw ArgumentError("config '" + name + "' is neither a file nor a bundled fixture under " + root.string());
}

Config effective_config(const Globals& g) {
  if (g.config.empty()) throw ArgumentError("--config is required");
  auto cfg = load_config(config_path(g.config));
  if (g.seed_sample) cfg.seed_sample = *g.seed_sample;
  if (g.seed_train) cfg.seed_train = *g.seed_train;
  if (g.offline) cfg.offline = true;
  if (g.workers) cfg.workers = g.workers;
  return cfg;
}

Corpus load_store(const fs::path& dir) {
  auto loaded = load_corpus(dir);
  for (const auto& r : loaded.rejections) std::cerr << "rejected " << r.origin << ": " << r.reason << "\n";
  return apply_exclusions(loaded.corpus);
}

std::uint64_t seed_or(const std::optional<std::uint64_t>& local, const std::optional<std::uint64_t>& global) {
  if (local) return *local;
  if (global) return *global;
  return 0;
}

/// "https://github.com/owner/repo(.git)" or "owner/repo" -> "owner/repo".
std::string project_name(std::string source) {
  for (const std::string prefix : {"https://github.com/", "http://github.com/", "github.com/"}) {
    if (source.rfind(prefix, 0) == 0) source = source.substr(prefix.size());
  }
  if (source.size() > 4 && source.ends_with(".git")) source.resize(source.size() - 4);
  while (!source.empty() && source.back() == '/') source.pop_back();
  if (std::count(source.begin(), source.end(), '/') != 1) throw ArgumentError("not an owner/repo project: " + source);
  return source;
}

int print_or_write(const Bundle& bundle, const Config& cfg, const std::optional<fs::path>& out) {
  if (out) {
    for (const auto& f : write_bundle(bundle, *out, cfg.formats)) std::cerr << "wrote " << f.string() << "\n";
  } else {
    for (const auto& t : bundle.tables) std::cout << render_plain(t, bundle) << "\n";
  }
  for (const auto& s : bundle.stages) {
    if (s.status != StageStatus::ok) std::cerr << "stage " << s.stage << " " << to_string(s.status) << ": " << s.detail << "\n";
  }
  return bundle.partial() ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imentor: implicit mentoring analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the verb
  Globals g;
  app.add_option("--config", g.config, "Config file, or the name of a bundled fixture (e.g. 'fixture')");
  app.add_option("--seed-sample", g.seed_sample, "Seed for comment sampling");
  app.add_option("--seed-train", g.seed_train, "Seed for training and cross-validation");
  app.add_flag("--offline", g.offline, "Never touch the network");
  app.add_option("--workers", g.workers, "Worker threads (0 = hardware concurrency)");

  std::function<int()> action;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Crawl projects or normalize an existing store");
  std::vector<std::string> sources;
  std::string ingest_out;
  ingest->add_option("--source", sources, "Store directory, or project URL / owner/repo (repeatable)")->required();
  ingest->add_option("--out", ingest_out, "Output store directory")->required();
  ingest->callback([&] {
    action = [&] {
      LoadResult result;
      if (sources.size() == 1 && fs::is_directory(sources[0])) {
        result = load_corpus(sources[0]);
      } else {
        if (g.offline) throw ArgumentError("ingest from the hosting API needs network access (drop --offline)");
        std::vector<std::string> projects;
        for (const auto& s : sources) projects.push_back(project_name(s));
        GitHubClient client;
        result = crawl(client, projects);
      }
      save_corpus(result.corpus, ingest_out);
      write_rejections(result.rejections, fs::path(ingest_out) / "rejections.ndjson");
      std::cout << result.corpus.prs().size() << " PRs, " << result.corpus.comments().size() << " comments, "
                << result.corpus.contributors().size() << " contributors; " << result.rejections.size()
                << " records rejected\n";
      return result.rejections.empty() ? kExitOk : kExitPartial;
    };
  });

  // sample
  auto* sample = app.add_subcommand("sample", "Draw a comment sample for manual labeling");
  std::string sample_store, sample_size = "auto", sample_out;
  std::optional<std::uint64_t> sample_seed;
  double confidence = 0.95, margin = 0.05;
  sample->add_option("--store", sample_store, "Store directory")->required();
  sample->add_option("--size", sample_size, "'auto' (Cochran) or a count");
  sample->add_option("--confidence", confidence, "Confidence level for --size auto");
  sample->add_option("--margin", margin, "Margin of error for --size auto");
  sample->add_option("--seed", sample_seed, "Sampling seed (defaults to --seed-sample)");
  sample->add_option("--out", sample_out, "Session file to create")->required();
  sample->callback([&] {
    action = [&] {
      const auto corpus = load_store(sample_store);
      const auto population = static_cast<std::int64_t>(corpus.comments().size());
      std::size_t size = 0;
      if (sample_size == "auto") {
        size = static_cast<std::size_t>(required_sample_size(population, confidence, margin));
      } else {
        size = std::stoul(sample_size);
      }
      const auto session = draw_sample(corpus, size, seed_or(sample_seed, g.seed_sample));
      write_session(session, sample_out);
      std::cout << "sampled " << size << " of " << population << " comments into " << sample_out << "\n";
      return kExitOk;
    };
  });

  // label
  auto* label = app.add_subcommand("label", "Label sampled comments at the terminal");
  std::string label_session, annotator;
  label->add_option("--session", label_session, "Session file")->required();
  label->add_option("--annotator", annotator, "Annotator name")->required();
  label->callback([&] {
    action = [&] {
      const auto session = read_session(label_session);
      const auto added = run_label_loop(session, label_session, annotator, std::cin, std::cout);
      std::cout << "\n" << added << " labels added\n";
      return kExitOk;
    };
  });

  // irr
  auto* irr = app.add_subcommand("irr", "Inter-rater reliability of a session");
  std::string irr_session;
  std::optional<std::string> rater_a, rater_b;
  irr->add_option("--session", irr_session, "Session file")->required();
  irr->add_option("--a", rater_a, "First annotator");
  irr->add_option("--b", rater_b, "Second annotator");
  irr->callback([&] {
    action = [&] {
      const auto session = read_session(irr_session);
      const auto r = inter_rater_reliability(session, rater_a, rater_b);
      std::printf("annotators %s, %s\noverlap %zu\nagreement %.4f\nkappa %.4f\n", r.annotator_a.c_str(),
                  r.annotator_b.c_str(), r.overlap, r.observed_agreement, r.kappa);
      const auto merged = merge_labels(session);
      std::printf("unresolved disagreements %zu\n", merged.conflicts.size());
      for (const auto& c : merged.conflicts) std::printf("  comment %lld\n", static_cast<long long>(c.comment_id));
      return kExitOk;
    };
  });

  // train
  auto* trainc = app.add_subcommand("train", "Train a comment classifier from a labeled session");
  std::string train_labels, train_family = "rf", train_grid, train_out, train_params;
  std::optional<std::uint64_t> train_seed;
  std::size_t search_iterations = 20, folds = 10;
  trainc->add_option("--labels", train_labels, "Session file with labels")->required();
  trainc->add_option("--family", train_family, "rf | svm | nb | dt | knn");
  trainc->add_option("--search", train_grid, "Hyperparameter grid (JSON object of lists), or 'default'");
  trainc->add_option("--iterations", search_iterations, "Randomized search iterations");
  trainc->add_option("--folds", folds, "Cross-validation folds");
  trainc->add_option("--params", train_params, "Hyperparameter overrides as a JSON object");
  trainc->add_option("--seed", train_seed, "Training seed (defaults to --seed-train)");
  trainc->add_option("--out", train_out, "Model file")->required();
  trainc->callback([&] {
    action = [&] {
      const auto family = parse_family(train_family);
      const auto examples = export_examples(read_session(train_labels));
      const auto seed = seed_or(train_seed, g.seed_train);
      const TrainOptions opts{g.workers};
      Hyperparameters hp = train_params.empty() ? nlohmann::json::object() : nlohmann::json::parse(train_params);
      if (!train_grid.empty()) {
        nlohmann::json grid = default_search_grid(family);
        if (train_grid != "default") {
          std::ifstream in(train_grid);
          if (!in) throw ArgumentError("cannot read grid " + train_grid);
          grid = nlohmann::json::parse(in);
        }
        const auto search = randomized_search(family, examples, grid, search_iterations, seed, folds, opts);
        std::cout << "best cross-validated F1 " << search.best_f1 << " with " << search.best.dump() << "\n";
        for (const auto& [k, v] : search.best.items()) hp[k] = v;
      }
      const auto cv = cross_validate(family, examples, hp, folds, seed, opts);
      std::printf("%s %zu-fold: precision %.4f recall %.4f f1 %.4f auc %s\n", std::string(display_name(family)).c_str(),
                  folds, cv.mean.precision, cv.mean.recall, cv.mean.f1,
                  cv.mean.auc ? std::to_string(*cv.mean.auc).c_str() : "NA");
      save_model(train(family, examples, hp, seed, opts), train_out);
      std::cout << "model written to " << train_out << "\n";
      return kExitOk;
    };
  });

  // classify
  auto* classify = app.add_subcommand("classify", "Score every comment in a store");
  std::string classify_model, classify_store, classify_out;
  classify->add_option("--model", classify_model, "Model file")->required();
  classify->add_option("--store", classify_store, "Store directory")->required();
  classify->add_option("--out", classify_out, "Scores file (CSV)")->required();
  classify->callback([&] {
    action = [&] {
      const auto model = load_model(classify_model);
      const auto scores = classify_corpus(model, load_store(classify_store), g.workers);
      write_scores(scores, classify_out);
      std::size_t positive = 0;
      for (const auto& [id, c] : scores) positive += c.label;
      std::cout << positive << " of " << scores.size() << " comments classified as implicit mentoring\n";
      return kExitOk;
    };
  });

  // relations
  auto* relations = app.add_subcommand("relations", "Build mentoring instances with direction and arity");
  std::string rel_store, rel_scores, rel_out;
  int threshold_days = kDefaultThresholdDays;
  relations->add_option("--store", rel_store, "Store directory")->required();
  relations->add_option("--scores", rel_scores, "Scores file")->required();
  relations->add_option("--threshold-days", threshold_days, "Experience gap separating peers");
  relations->add_option("--out", rel_out, "Instances file")->required();
  relations->callback([&] {
    action = [&] {
      const auto instances = build_instances(load_store(rel_store), read_scores(rel_scores), threshold_days);
      write_instances(instances, rel_out);
      const auto arity = arity_distribution(instances);
      std::cout << instances.size() << " instances on " << arity.prs << " PRs (dyad " << arity.counts[0] << ", triad "
                << arity.counts[1] << ", quadrad+ " << arity.counts[2] << ")\n";
      return kExitOk;
    };
  });

  // genders
  auto* genders = app.add_subcommand("genders", "Infer contributor gender through a name-based client");
  std::string gen_store, gen_client = "fixture", gen_cache, gen_fixture, gen_out;
  double cutoff = kDefaultConfidenceCutoff;
  genders->add_option("--store", gen_store, "Store directory")->required();
  genders->add_option("--client", gen_client, "http | fixture")->check(CLI::IsMember({"http", "fixture"}));
  genders->add_option("--cache", gen_cache, "Cache file (name, location, class, confidence)");
  genders->add_option("--fixture", gen_fixture, "Fixture table for --client fixture");
  genders->add_option("--cutoff", cutoff, "Keep records with confidence above this");
  genders->add_option("--out", gen_out, "Gender records file");
  genders->callback([&] {
    action = [&] {
      const auto corpus = load_store(gen_store);
      std::unique_ptr<GenderClient> client;
      InferenceOptions opts;
      opts.cutoff = cutoff;
      opts.workers = g.workers;
      if (gen_client == "fixture") {
        if (gen_fixture.empty()) throw ArgumentError("--fixture is required with --client fixture");
        client = std::make_unique<FixtureGenderClient>(FixtureGenderClient::from_file(gen_fixture));
      } else if (g.offline) {
        client = std::make_unique<OfflineGenderClient>();
        opts.retry.max_attempts = 1;
      } else {
        client = std::make_unique<NamsorGenderClient>();
        opts.requests_per_second = 1.0;
      }
      GenderCache cache = gen_cache.empty() ? GenderCache{} : GenderCache::load(gen_cache);
      const auto result = infer_genders(corpus.contributors(), *client, cache, opts);
      if (!gen_cache.empty()) cache.save(gen_cache);
      if (!gen_out.empty()) write_gender_records(result.records, gen_out);
      for (const auto& u : result.unresolved) std::cerr << "unresolved " << u.contributor << ": " << u.reason << "\n";
      const auto screening = screen_projects(corpus, gender_map(result.records));
      std::cout << result.records.size() << " gendered, " << result.below_cutoff.size() << " below cutoff, "
                << result.unresolved.size() << " unresolved; " << result.client_calls << " client calls\n";
      for (const auto& [p, why] : screening.excluded) std::cout << "excluded project " << p << ": " << why << "\n";
      return kExitOk;
    };
  });

  // analyze / report
  auto* analyze = app.add_subcommand("analyze", "Run the pipeline and print every table");
  analyze->callback([&] {
    action = [&] {
      const auto cfg = effective_config(g);
      return print_or_write(run_pipeline(cfg), cfg, std::nullopt);
    };
  });
  auto* report = app.add_subcommand("report", "Run the pipeline and write the report bundle");
  std::string report_out = "report";
  std::vector<std::string> formats;
  report->add_option("--out", report_out, "Output directory");
  report->add_option("--format", formats, "plain | csv | json-lines (repeatable; default: config)");
  report->callback([&] {
    action = [&] {
      auto cfg = effective_config(g);
      if (!formats.empty()) {
        cfg.formats.clear();
        for (const auto& f : formats) cfg.formats.push_back(parse_format(f));
      }
      return print_or_write(run_pipeline(cfg), cfg, fs::path(report_out));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }
  try {
    return action ? action() : kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}
