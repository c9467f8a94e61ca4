#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "imentor/annotation/session.hpp"
#include "imentor/classifier/features.hpp"
#include "imentor/classifier/tree.hpp"
#include "imentor/core/error.hpp"
#include "imentor/core/parallel.hpp"
#include "imentor/core/random.hpp"

namespace imentor {

enum class Family { random_forest, support_vector, naive_bayes_bernoulli, decision_tree, k_neighbors };

inline constexpr Family kAllFamilies[] = {Family::random_forest, Family::support_vector, Family::naive_bayes_bernoulli,
                                          Family::decision_tree, Family::k_neighbors};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::random_forest:
      return "random-forest";
    case Family::support_vector:
      return "support-vector";
    case Family::naive_bayes_bernoulli:
      return "naive-bayes-bernoulli";
    case Family::decision_tree:
      return "decision-tree";
    case Family::k_neighbors:
    default:
      return "k-neighbors";
  }
}

inline std::string_view display_name(Family f) {
  switch (f) {
    case Family::random_forest:
      return "RandomForest";
    case Family::support_vector:
      return "Support Vector Machine";
    case Family::naive_bayes_bernoulli:
      return "NaiveBayes";
    case Family::decision_tree:
      return "DecisionTree";
    case Family::k_neighbors:
    default:
      return "K-neighbors";
  }
}

inline Family parse_family(std::string_view s) {
  if (s == "random-forest" || s == "rf") return Family::random_forest;
  if (s == "support-vector" || s == "svm") return Family::support_vector;
  if (s == "naive-bayes-bernoulli" || s == "nb") return Family::naive_bayes_bernoulli;
  if (s == "decision-tree" || s == "dt") return Family::decision_tree;
  if (s == "k-neighbors" || s == "knn") return Family::k_neighbors;
  throw ArgumentError("unknown classifier family '" + std::string(s) + "'");
}

using Hyperparameters = nlohmann::json;  // object: name -> number | string | bool

/// Defaults per family. The forest's values are the tuned ones reported for
/// this task; the others are conventional starting points.
inline Hyperparameters default_hyperparameters(Family f) {
  switch (f) {
    case Family::random_forest:
      return {{"trees", 2800},          {"max_depth", 73}, {"min_samples_split", 20},
              {"min_samples_leaf", 2},  {"bootstrap", true}, {"max_features", "sqrt"}};
    case Family::decision_tree:
      return {{"max_depth", 0}, {"min_samples_split", 2}, {"min_samples_leaf", 1}, {"max_features", "all"}};
    case Family::support_vector:
      return {{"C", 1.0}, {"epochs", 20}};
    case Family::naive_bayes_bernoulli:
      return {{"alpha", 1.0}};
    case Family::k_neighbors:
    default:
      return {{"k", 5}, {"weights", "uniform"}};
  }
}

/// Search spaces used when no grid file is supplied.
inline nlohmann::json default_search_grid(Family f) {
  switch (f) {
    case Family::random_forest:
      return {{"trees", {100, 400, 1000, 2800}},  {"max_depth", {10, 30, 73, 0}},
              {"min_samples_split", {2, 5, 10, 20}}, {"min_samples_leaf", {1, 2, 4}},
              {"bootstrap", {true, false}},        {"max_features", {"sqrt", "log2"}}};
    case Family::decision_tree:
      return {{"max_depth", {5, 10, 30, 0}}, {"min_samples_split", {2, 5, 10, 20}}, {"min_samples_leaf", {1, 2, 4}}};
    case Family::support_vector:
      return {{"C", {0.01, 0.1, 1.0, 10.0, 100.0}}, {"epochs", {10, 20, 50}}};
    case Family::naive_bayes_bernoulli:
      return {{"alpha", {0.01, 0.1, 0.5, 1.0, 2.0}}};
    case Family::k_neighbors:
    default:
      return {{"k", {1, 3, 5, 7, 11, 15}}, {"weights", {"uniform", "distance"}}};
  }
}

/// Defaults overlaid with `overrides`; rejects unknown names and wrong types.
inline Hyperparameters resolve_hyperparameters(Family f, const Hyperparameters& overrides) {
  auto out = default_hyperparameters(f);
  if (overrides.is_null()) return out;
  if (!overrides.is_object()) throw ArgumentError("hyperparameters must be an object");
  for (const auto& [name, value] : overrides.items()) {
    auto it = out.find(name);
    if (it == out.end()) {
      throw ArgumentError("unknown hyperparameter '" + name + "' for " + std::string(to_string(f)));
    }
    const bool ok = (it->is_number() && value.is_number()) || (it->is_boolean() && value.is_boolean()) ||
                    (it->is_string() && (value.is_string() || value.is_number()));
    if (!ok) throw ArgumentError("hyperparameter '" + name + "' has the wrong type");
    *it = value;
  }
  return out;
}

namespace detail {

inline std::size_t resolve_max_features(const nlohmann::json& v, std::size_t features) {
  if (v.is_number()) {
    const double x = v.get<double>();
    if (x <= 0) throw ArgumentError("max_features must be positive");
    if (x < 1.0) return std::max<std::size_t>(1, static_cast<std::size_t>(x * static_cast<double>(features)));
    return std::max<std::size_t>(1, static_cast<std::size_t>(x));
  }
  const auto s = v.get<std::string>();
  if (s == "sqrt" || s == "auto") {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features))));
  }
  if (s == "log2") {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(std::max<double>(1.0, static_cast<double>(features)))));
  }
  if (s == "all") return 0;
  throw ArgumentError("unknown max_features '" + s + "'");
}

inline std::size_t non_negative(const nlohmann::json& hp, const char* name) {
  const double v = hp.at(name).get<double>();
  if (v < 0) throw ArgumentError(std::string(name) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

inline TreeParams tree_params(const Hyperparameters& hp, std::size_t features) {
  TreeParams p;
  p.max_depth = static_cast<int>(non_negative(hp, "max_depth"));
  p.min_samples_split = std::max<std::size_t>(2, non_negative(hp, "min_samples_split"));
  p.min_samples_leaf = std::max<std::size_t>(1, non_negative(hp, "min_samples_leaf"));
  p.max_features = resolve_max_features(hp.at("max_features"), features);
  return p;
}

}  // namespace detail

// ---- fitted states ----

struct ForestState {
  std::vector<DecisionTree> trees;

  /// Fraction of trees voting positive.
  double score(const FeatureVector& x) const {
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.predict_fraction(x) > 0.5f;
    return trees.empty() ? 0.0 : static_cast<double>(votes) / static_cast<double>(trees.size());
  }
};

struct TreeState {
  DecisionTree tree;
  double score(const FeatureVector& x) const { return tree.predict_fraction(x); }
};

/// Bernoulli naive Bayes on binarized (present/absent) features.
struct NaiveBayesState {
  double log_prior_pos = 0, log_prior_neg = 0;
  std::vector<double> log_p_pos, log_p_neg;      // log P(x_f = 1 | class)
  std::vector<double> log_q_pos, log_q_neg;      // log P(x_f = 0 | class)
  double base_pos = 0, base_neg = 0;             // sum of log_q over all features

  double score(const FeatureVector& x) const {
    double lp = log_prior_pos + base_pos;
    double ln = log_prior_neg + base_neg;
    for (const auto& [f, w] : x.entries) {
      if (w <= 0) continue;
      lp += log_p_pos[f] - log_q_pos[f];
      ln += log_p_neg[f] - log_q_neg[f];
    }
    const double m = std::max(lp, ln);
    const double ep = std::exp(lp - m);
    const double en = std::exp(ln - m);
    return ep / (ep + en);
  }
};

/// Linear SVM (hinge loss) fitted with Pegasos; scores are sigmoid(margin).
struct SvmState {
  std::vector<double> weights;
  double bias = 0;

  double margin(const FeatureVector& x) const {
    double m = bias;
    for (const auto& [f, w] : x.entries) m += weights[f] * w;
    return m;
  }
  double score(const FeatureVector& x) const { return 1.0 / (1.0 + std::exp(-margin(x))); }
};

/// k nearest neighbours by cosine similarity (vectors are L2-normalized).
struct KnnState {
  std::size_t k = 5;
  bool distance_weighted = false;
  std::vector<FeatureVector> points;
  std::vector<char> labels;

  double score(const FeatureVector& x) const {
    std::vector<std::pair<double, std::size_t>> sims;
    sims.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) sims.emplace_back(dot(x, points[i]), i);
    const std::size_t kk = std::min(k, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(kk), sims.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    double pos = 0, total = 0;
    for (std::size_t i = 0; i < kk; ++i) {
      // cosine distance = 1 - similarity
      const double w = distance_weighted ? 1.0 / std::max(1e-9, 1.0 - sims[i].first) : 1.0;
      total += w;
      if (labels[sims[i].second]) pos += w;
    }
    return total > 0 ? pos / total : 0.0;
  }
};

using FittedState = std::variant<ForestState, SvmState, NaiveBayesState, TreeState, KnnState>;

/// A fitted classifier together with the vocabulary it was trained on.
struct TrainedModel {
  Family family = Family::random_forest;
  Hyperparameters hyperparameters;
  Vocabulary vocabulary;
  std::uint64_t seed = 0;
  FittedState fitted;

  double score(const FeatureVector& x) const {
    return std::visit([&](const auto& s) { return s.score(x); }, fitted);
  }
  double score_text(std::string_view body) const { return score(featurize(body, vocabulary)); }
};

struct TrainOptions {
  std::size_t workers = 0;  // 0: hardware concurrency
};

/// Input order does not matter: examples are put in a canonical order first.
inline std::vector<const LabeledExample*> canonical_order(std::span<const LabeledExample> examples) {
  std::vector<const LabeledExample*> out;
  for (const auto& e : examples) out.push_back(&e);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::make_tuple(a->comment_id(), std::cref(a->text()), a->label()) <
           std::make_tuple(b->comment_id(), std::cref(b->text()), b->label());
  });
  return out;
}

namespace detail {

inline ForestState fit_forest(const TrainingMatrix& data, const Hyperparameters& hp, std::uint64_t seed,
                              const TrainOptions& opts) {
  const auto trees = hp.at("trees").get<long long>();
  if (trees < 1) throw ArgumentError("trees must be >= 1");
  const auto params = tree_params(hp, data.features());
  const bool bootstrap = hp.at("bootstrap").get<bool>();
  ForestState state;
  state.trees = parallel_map<DecisionTree>(static_cast<std::size_t>(trees), opts.workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::uint32_t> sample(data.rows());
    if (bootstrap) {
      for (auto& s : sample) s = static_cast<std::uint32_t>(rng.below(data.rows()));
    } else {
      std::iota(sample.begin(), sample.end(), std::uint32_t{0});
    }
    return DecisionTree::fit(data, std::move(sample), params, rng.next());
  });
  return state;
}

inline NaiveBayesState fit_naive_bayes(std::span<const FeatureVector> xs, std::span<const char> ys,
                                       std::size_t features, const Hyperparameters& hp) {
  const double alpha = hp.at("alpha").get<double>();
  if (alpha <= 0) throw ArgumentError("alpha must be > 0");
  std::vector<double> count_pos(features, 0), count_neg(features, 0);
  double n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto& counts = ys[i] ? count_pos : count_neg;
    (ys[i] ? n_pos : n_neg) += 1;
    for (const auto& [f, w] : xs[i].entries) {
      if (w > 0) counts[f] += 1;
    }
  }
  NaiveBayesState s;
  const double n = n_pos + n_neg;
  s.log_prior_pos = std::log(n_pos / n);
  s.log_prior_neg = std::log(n_neg / n);
  s.log_p_pos.resize(features);
  s.log_p_neg.resize(features);
  s.log_q_pos.resize(features);
  s.log_q_neg.resize(features);
  for (std::size_t f = 0; f < features; ++f) {
    const double pp = (count_pos[f] + alpha) / (n_pos + 2 * alpha);
    const double pn = (count_neg[f] + alpha) / (n_neg + 2 * alpha);
    s.log_p_pos[f] = std::log(pp);
    s.log_q_pos[f] = std::log1p(-pp);
    s.log_p_neg[f] = std::log(pn);
    s.log_q_neg[f] = std::log1p(-pn);
    s.base_pos += s.log_q_pos[f];
    s.base_neg += s.log_q_neg[f];
  }
  return s;
}

inline SvmState fit_svm(std::span<const FeatureVector> xs, std::span<const char> ys, std::size_t features,
                        const Hyperparameters& hp, std::uint64_t seed) {
  const double c = hp.at("C").get<double>();
  const auto epochs = hp.at("epochs").get<long long>();
  if (c <= 0) throw ArgumentError("C must be > 0");
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  const std::size_t n = xs.size();
  const double lambda = 1.0 / (c * static_cast<double>(n));
  // w = scale * v, so the shrink step is O(1).
  std::vector<double> v(features + 1, 0.0);
  double scale = 1.0;
  Rng rng(seed);
  const auto steps = static_cast<std::size_t>(epochs) * n;
  for (std::size_t t = 1; t <= steps; ++t) {
    const auto i = rng.below(n);
    const double y = ys[i] ? 1.0 : -1.0;
    double margin = v[features];
    for (const auto& [f, w] : xs[i].entries) margin += v[f] * w;
    margin *= scale;
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    scale *= 1.0 - eta * lambda;
    if (scale < 1e-9 || t == 1) {
      if (scale == 0.0) scale = 1e-300;
      for (auto& x : v) x *= scale;
      scale = 1.0;
    }
    if (y * margin < 1.0) {
      const double step = eta * y / scale;
      for (const auto& [f, w] : xs[i].entries) v[f] += step * w;
      v[features] += step;
    }
  }
  SvmState s;
  s.weights.resize(features);
  for (std::size_t f = 0; f < features; ++f) s.weights[f] = v[f] * scale;
  s.bias = v[features] * scale;
  return s;
}

}  // namespace detail

/// Fits one classifier family on labeled comments.
inline TrainedModel train(Family family, std::span<const LabeledExample> examples, const Hyperparameters& overrides,
                          std::uint64_t seed, TrainOptions opts = {}) {
  const auto ordered = canonical_order(examples);
  std::size_t positives = 0;
  for (const auto* e : ordered) positives += e->label();
  if (ordered.empty() || positives == 0 || positives == ordered.size()) {
    throw TrainingError("training data must contain both classes");
  }

  TrainedModel model;
  model.family = family;
  model.hyperparameters = resolve_hyperparameters(family, overrides);
  model.seed = seed;
  std::vector<std::string> texts;
  for (const auto* e : ordered) texts.push_back(e->text());
  model.vocabulary = fit_vocabulary(texts);

  std::vector<FeatureVector> xs;
  std::vector<char> ys;
  for (const auto* e : ordered) {
    xs.push_back(featurize(e->text(), model.vocabulary));
    ys.push_back(e->label() ? 1 : 0);
  }
  const auto& hp = model.hyperparameters;
  const std::size_t nf = model.vocabulary.size();

  switch (family) {
    case Family::random_forest: {
      const TrainingMatrix data(xs, nf, ys);
      model.fitted = detail::fit_forest(data, hp, seed, opts);
      break;
    }
    case Family::decision_tree: {
      const TrainingMatrix data(xs, nf, ys);
      std::vector<std::uint32_t> all(data.rows());
      std::iota(all.begin(), all.end(), std::uint32_t{0});
      model.fitted = TreeState{DecisionTree::fit(data, std::move(all), detail::tree_params(hp, nf), seed)};
      break;
    }
    case Family::naive_bayes_bernoulli:
      model.fitted = detail::fit_naive_bayes(xs, ys, nf, hp);
      break;
    case Family::support_vector:
      model.fitted = detail::fit_svm(xs, ys, nf, hp, seed);
      break;
    case Family::k_neighbors: {
      KnnState s;
      const auto k = hp.at("k").get<long long>();
      if (k < 1) throw ArgumentError("k must be >= 1");
      s.k = static_cast<std::size_t>(k);
      const auto weights = hp.at("weights").get<std::string>();
      if (weights != "uniform" && weights != "distance") throw ArgumentError("weights must be uniform or distance");
      s.distance_weighted = weights == "distance";
      s.points = std::move(xs);
      s.labels = std::move(ys);
      model.fitted = std::move(s);
      break;
    }
  }
  return model;
}

// ---- model file ----

inline constexpr std::string_view kModelFormat = "imentor-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline nlohmann::json tree_json(const DecisionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes()) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction});
  }
  return nodes;
}

inline DecisionTree tree_from(const nlohmann::json& j) {
  std::vector<DecisionTree::Node> nodes;
  for (const auto& n : j) {
    nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<float>(), n.at(2).get<std::int32_t>(),
                     n.at(3).get<std::int32_t>(), n.at(4).get<float>()});
  }
  if (nodes.empty()) throw DataError("model file: empty tree");
  for (const auto& n : nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= nodes.size() ||
                           static_cast<std::size_t>(n.right) >= nodes.size())) {
      throw DataError("model file: tree child index out of range");
    }
  }
  return DecisionTree(std::move(nodes));
}

inline std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json fitted = std::visit(
      [](const auto& s) -> nlohmann::json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ForestState>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : s.trees) trees.push_back(detail::tree_json(t));
          return {{"trees", trees}};
        } else if constexpr (std::is_same_v<S, TreeState>) {
          return {{"tree", detail::tree_json(s.tree)}};
        } else if constexpr (std::is_same_v<S, NaiveBayesState>) {
          return {{"log_prior_pos", s.log_prior_pos}, {"log_prior_neg", s.log_prior_neg},
                  {"log_p_pos", s.log_p_pos},         {"log_p_neg", s.log_p_neg},
                  {"log_q_pos", s.log_q_pos},         {"log_q_neg", s.log_q_neg},
                  {"base_pos", s.base_pos},           {"base_neg", s.base_neg}};
        } else if constexpr (std::is_same_v<S, SvmState>) {
          return {{"weights", s.weights}, {"bias", s.bias}};
        } else {
          nlohmann::json points = nlohmann::json::array();
          for (const auto& p : s.points) {
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& [f, w] : p.entries) entries.push_back({f, w});
            points.push_back(entries);
          }
          std::vector<int> labels(s.labels.begin(), s.labels.end());
          return {{"k", s.k}, {"distance_weighted", s.distance_weighted}, {"points", points}, {"labels", labels}};
        }
      },
      m.fitted);
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"family", to_string(m.family)},
          {"hyperparameters", m.hyperparameters},
          {"seed", m.seed},
          {"vocabulary", {{"terms", m.vocabulary.terms}, {"idf", m.vocabulary.idf}, {"tag", detail::hex(m.vocabulary.tag)}}},
          {"fitted", fitted}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("not a model file");
    if (j.at("version").get<int>() != kModelVersion) {
      throw DataError("unsupported model version " + std::to_string(j.at("version").get<int>()));
    }
    TrainedModel m;
    m.family = parse_family(j.at("family").get<std::string>());
    m.hyperparameters = j.at("hyperparameters");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.vocabulary.terms = j.at("vocabulary").at("terms").get<std::vector<std::string>>();
    m.vocabulary.idf = j.at("vocabulary").at("idf").get<std::vector<double>>();
    if (m.vocabulary.terms.size() != m.vocabulary.idf.size()) throw DataError("model file: vocabulary size mismatch");
    if (!std::is_sorted(m.vocabulary.terms.begin(), m.vocabulary.terms.end())) {
      throw DataError("model file: vocabulary not sorted");
    }
    m.vocabulary.tag = Vocabulary::compute_tag(m.vocabulary.terms);
    if (detail::hex(m.vocabulary.tag) != j.at("vocabulary").at("tag").get<std::string>()) {
      throw DataError("model file: vocabulary tag mismatch");
    }
    const auto& f = j.at("fitted");
    const std::size_t nf = m.vocabulary.size();
    switch (m.family) {
      case Family::random_forest: {
        ForestState s;
        for (const auto& t : f.at("trees")) s.trees.push_back(detail::tree_from(t));
        m.fitted = std::move(s);
        break;
      }
      case Family::decision_tree:
        m.fitted = TreeState{detail::tree_from(f.at("tree"))};
        break;
      case Family::naive_bayes_bernoulli: {
        NaiveBayesState s;
        s.log_prior_pos = f.at("log_prior_pos");
        s.log_prior_neg = f.at("log_prior_neg");
        s.log_p_pos = f.at("log_p_pos").get<std::vector<double>>();
        s.log_p_neg = f.at("log_p_neg").get<std::vector<double>>();
        s.log_q_pos = f.at("log_q_pos").get<std::vector<double>>();
        s.log_q_neg = f.at("log_q_neg").get<std::vector<double>>();
        s.base_pos = f.at("base_pos");
        s.base_neg = f.at("base_neg");
        if (s.log_p_pos.size() != nf || s.log_p_neg.size() != nf) throw DataError("model file: NB size mismatch");
        m.fitted = std::move(s);
        break;
      }
      case Family::support_vector: {
        SvmState s;
        s.weights = f.at("weights").get<std::vector<double>>();
        s.bias = f.at("bias");
        if (s.weights.size() != nf) throw DataError("model file: SVM size mismatch");
        m.fitted = std::move(s);
        break;
      }
      case Family::k_neighbors: {
        KnnState s;
        s.k = f.at("k");
        s.distance_weighted = f.at("distance_weighted");
        for (const auto& p : f.at("points")) {
          FeatureVector fv;
          fv.vocabulary_tag = m.vocabulary.tag;
          for (const auto& e : p) fv.entries.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<double>());
          s.points.push_back(std::move(fv));
        }
        for (int l : f.at("labels").get<std::vector<int>>()) s.labels.push_back(static_cast<char>(l != 0));
        m.fitted = std::move(s);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write model " + file.string());
  out << to_json(m).dump() << '\n';
}

inline TrainedModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read model " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file is not valid JSON: " + std::string(e.what()));
  }
  return model_from_json(j);
}

}  // namespace imentor
