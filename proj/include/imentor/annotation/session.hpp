#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "imentor/annotation/kappa.hpp"
#include "imentor/annotation/sampling.hpp"
#include "imentor/core/error.hpp"
#include "imentor/ingestion/corpus_io.hpp"

namespace imentor {

/// Rulebook categories of mentoring action.
enum class RuleTag : std::uint8_t { instruction = 1, suggestion = 2, fix_mechanism = 4 };

class RuleTags {
 public:
  RuleTags() = default;
  RuleTags(std::initializer_list<RuleTag> tags) {
    for (auto t : tags) add(t);
  }

  void add(RuleTag t) { bits_ |= static_cast<std::uint8_t>(t); }
  bool has(RuleTag t) const { return (bits_ & static_cast<std::uint8_t>(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  friend bool operator==(RuleTags, RuleTags) = default;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    if (has(RuleTag::instruction)) out.emplace_back("instruction");
    if (has(RuleTag::suggestion)) out.emplace_back("suggestion");
    if (has(RuleTag::fix_mechanism)) out.emplace_back("fix-mechanism");
    return out;
  }

  static RuleTag parse_one(std::string_view name) {
    if (name == "instruction") return RuleTag::instruction;
    if (name == "suggestion") return RuleTag::suggestion;
    if (name == "fix-mechanism") return RuleTag::fix_mechanism;
    throw ArgumentError("unknown rule tag '" + std::string(name) + "'");
  }

 private:
  std::uint8_t bits_ = 0;
};

/// A comment with its binary implicit-mentoring label. A positive label
/// requires an explanation plus at least one rulebook action.
class LabeledExample {
 public:
  LabeledExample(std::int64_t comment_id, std::string text, bool label, std::string annotator, RuleTags tags,
                 bool has_explanation)
      : comment_id_(comment_id),
        text_(std::move(text)),
        label_(label),
        annotator_(std::move(annotator)),
        tags_(tags),
        has_explanation_(has_explanation) {
    if (label_ && (!has_explanation_ || tags_.empty())) {
      throw ArgumentError("positive label needs an explanation and at least one rule tag (comment " +
                          std::to_string(comment_id_) + ")");
    }
  }

  std::int64_t comment_id() const { return comment_id_; }
  const std::string& text() const { return text_; }
  bool label() const { return label_; }
  const std::string& annotator() const { return annotator_; }
  RuleTags rule_tags() const { return tags_; }
  bool has_explanation() const { return has_explanation_; }

 private:
  std::int64_t comment_id_;
  std::string text_;
  bool label_;
  std::string annotator_;
  RuleTags tags_;
  bool has_explanation_;
};

struct SampleItem {
  std::int64_t comment_id = 0;
  std::string project;
  std::int64_t pr = 0;
  std::string body;
};

struct LabelEntry {
  std::int64_t comment_id = 0;
  std::string annotator;
  bool label = false;
  RuleTags tags;
  bool has_explanation = false;
};

/// Explicit adjudication of a disagreement.
struct Resolution {
  std::int64_t comment_id = 0;
  std::string resolver;
  bool label = false;
  RuleTags tags;
  bool has_explanation = false;
};

struct AnnotationSession {
  std::uint64_t seed = 0;
  std::size_t population = 0;
  std::vector<SampleItem> sample;
  std::vector<LabelEntry> labels;  // append order; a later entry by the same annotator supersedes
  std::vector<Resolution> resolutions;

  std::vector<std::string> annotators() const {
    std::set<std::string> s;
    for (const auto& l : labels) s.insert(l.annotator);
    return {s.begin(), s.end()};
  }

  std::map<std::int64_t, LabelEntry> labels_by(const std::string& annotator) const {
    std::map<std::int64_t, LabelEntry> out;
    for (const auto& l : labels) {
      if (l.annotator == annotator) out[l.comment_id] = l;
    }
    return out;
  }
};

/// Uniform sample without replacement of `size` comments, reproducible from
/// (corpus, size, seed).
inline AnnotationSession draw_sample(const Corpus& corpus, std::size_t size, std::uint64_t seed) {
  const auto& comments = corpus.comments();
  if (size > comments.size()) {
    throw ArgumentError("sample size " + std::to_string(size) + " exceeds the " + std::to_string(comments.size()) +
                        " available comments");
  }
  AnnotationSession s;
  s.seed = seed;
  s.population = comments.size();
  for (auto i : sample_indices(comments.size(), size, seed)) {
    const auto& c = comments[i];
    s.sample.push_back({c.comment_id, c.project, c.pr, c.body});
  }
  return s;
}

// ---- session file: one JSON object per line, label entries appended ----

namespace detail {

inline nlohmann::json tags_json(RuleTags tags) { return tags.names(); }

inline RuleTags tags_from(const nlohmann::json& j) {
  RuleTags t;
  if (j.is_array()) {
    for (const auto& n : j) t.add(RuleTags::parse_one(n.get<std::string>()));
  }
  return t;
}

}  // namespace detail

inline nlohmann::json to_json(const LabelEntry& e) {
  return {{"type", "label"},           {"comment_id", e.comment_id}, {"annotator", e.annotator}, {"label", e.label},
          {"rule_tags", detail::tags_json(e.tags)}, {"has_explanation", e.has_explanation}};
}

inline nlohmann::json to_json(const Resolution& r) {
  return {{"type", "resolution"}, {"comment_id", r.comment_id}, {"resolver", r.resolver}, {"label", r.label},
          {"rule_tags", detail::tags_json(r.tags)}, {"has_explanation", r.has_explanation}};
}

inline void write_session(const AnnotationSession& s, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write session " + file.string());
  out << nlohmann::json{{"type", "session"}, {"seed", s.seed}, {"population", s.population}, {"size", s.sample.size()}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < s.sample.size(); ++i) {
    const auto& it = s.sample[i];
    out << nlohmann::json{{"type", "sample"},   {"index", i},      {"comment_id", it.comment_id},
                          {"project", it.project}, {"pr", it.pr}, {"body", it.body}}
               .dump()
        << '\n';
  }
  for (const auto& l : s.labels) out << to_json(l).dump() << '\n';
  for (const auto& r : s.resolutions) out << to_json(r).dump() << '\n';
}

template <typename Entry>
void append_entry(const std::filesystem::path& file, const Entry& entry) {
  std::ofstream out(file, std::ios::app);
  if (!out) throw DataError("cannot append to session " + file.string());
  out << to_json(entry).dump() << '\n';
}

inline AnnotationSession read_session(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read session " + file.string());
  AnnotationSession s;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "session") {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.population = j.value("population", std::size_t{0});
        header = true;
      } else if (type == "sample") {
        s.sample.push_back({j.at("comment_id").get<std::int64_t>(), j.value("project", std::string()),
                            j.value("pr", std::int64_t{0}), j.at("body").get<std::string>()});
      } else if (type == "label") {
        LabelEntry e{j.at("comment_id").get<std::int64_t>(), j.at("annotator").get<std::string>(),
                     j.at("label").get<bool>(), detail::tags_from(j.value("rule_tags", nlohmann::json())),
                     j.value("has_explanation", false)};
        // Validates the rulebook invariant.
        LabeledExample(e.comment_id, {}, e.label, e.annotator, e.tags, e.has_explanation);
        s.labels.push_back(std::move(e));
      } else if (type == "resolution") {
        Resolution r{j.at("comment_id").get<std::int64_t>(), j.value("resolver", std::string()),
                     j.at("label").get<bool>(), detail::tags_from(j.value("rule_tags", nlohmann::json())),
                     j.value("has_explanation", false)};
        LabeledExample(r.comment_id, {}, r.label, r.resolver, r.tags, r.has_explanation);
        s.resolutions.push_back(std::move(r));
      } else {
        throw DataError("unknown entry type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file.filename().string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(file.filename().string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  if (!header) throw DataError("session file has no header line: " + file.string());
  return s;
}

// ---- merging annotators ----

struct Conflict {
  std::int64_t comment_id = 0;
  std::map<std::string, bool> labels;  // annotator -> label
};

struct MergeResult {
  std::vector<LabeledExample> examples;  // in sample order
  std::vector<Conflict> conflicts;       // in sample order
  std::vector<std::int64_t> unlabeled;
};

/// Combines all annotators' latest labels. Agreement (or a single label)
/// yields an example; disagreement without a resolution is a conflict.
inline MergeResult merge_labels(const AnnotationSession& s) {
  std::map<std::string, std::map<std::int64_t, LabelEntry>> by;
  for (const auto& a : s.annotators()) by[a] = s.labels_by(a);
  std::map<std::int64_t, Resolution> resolved;
  for (const auto& r : s.resolutions) resolved[r.comment_id] = r;

  MergeResult out;
  std::set<std::int64_t> seen;
  for (const auto& item : s.sample) {
    if (!seen.insert(item.comment_id).second) continue;
    if (auto r = resolved.find(item.comment_id); r != resolved.end()) {
      const auto& res = r->second;
      out.examples.emplace_back(item.comment_id, item.body, res.label, "resolved:" + res.resolver, res.tags,
                                res.has_explanation);
      continue;
    }
    std::vector<const LabelEntry*> entries;
    for (const auto& [annotator, labels] : by) {
      if (auto it = labels.find(item.comment_id); it != labels.end()) entries.push_back(&it->second);
    }
    if (entries.empty()) {
      out.unlabeled.push_back(item.comment_id);
      continue;
    }
    const bool first = entries.front()->label;
    const bool agree = std::all_of(entries.begin(), entries.end(), [&](const auto* e) { return e->label == first; });
    if (!agree) {
      Conflict c{item.comment_id, {}};
      for (const auto* e : entries) c.labels[e->annotator] = e->label;
      out.conflicts.push_back(std::move(c));
      continue;
    }
    const auto* e = entries.front();
    out.examples.emplace_back(item.comment_id, item.body, e->label, e->annotator, e->tags, e->has_explanation);
  }
  return out;
}

/// Training examples; refuses while any disagreement is unresolved.
inline std::vector<LabeledExample> export_examples(const AnnotationSession& s) {
  auto merged = merge_labels(s);
  if (!merged.conflicts.empty()) {
    throw DataError(std::to_string(merged.conflicts.size()) +
                    " unresolved annotator disagreement(s); add resolution entries before exporting");
  }
  return std::move(merged.examples);
}

struct IrrReport {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t overlap = 0;
  double observed_agreement = 0;
  double kappa = 0;
  std::vector<std::int64_t> disagreements;
};

/// Inter-rater reliability between two annotators over the comments both
/// labeled. Defaults to the first two annotators in name order.
inline IrrReport inter_rater_reliability(const AnnotationSession& s, std::optional<std::string> a = std::nullopt,
                                         std::optional<std::string> b = std::nullopt) {
  const auto names = s.annotators();
  if (!a || !b) {
    if (names.size() < 2) throw ArgumentError("IRR needs labels from two annotators");
    a = names[0];
    b = names[1];
  }
  const auto la = s.labels_by(*a);
  const auto lb = s.labels_by(*b);
  IrrReport r;
  r.annotator_a = *a;
  r.annotator_b = *b;
  std::vector<bool> va, vb;
  for (const auto& item : s.sample) {
    auto x = la.find(item.comment_id);
    auto y = lb.find(item.comment_id);
    if (x == la.end() || y == lb.end()) continue;
    va.push_back(x->second.label);
    vb.push_back(y->second.label);
    if (x->second.label != y->second.label) r.disagreements.push_back(item.comment_id);
  }
  r.overlap = va.size();
  if (r.overlap == 0) throw ArgumentError("annotators " + *a + " and " + *b + " share no labeled comments");
  r.observed_agreement = 1.0 - static_cast<double>(r.disagreements.size()) / static_cast<double>(r.overlap);
  r.kappa = cohens_kappa(va, vb);
  return r;
}

/// Interactive labeling prompt. Skips comments this annotator already
/// labeled; every answer is appended to `file` immediately. Returns the
/// number of new labels. Input: y / n / s(kip) / q(uit).
inline std::size_t run_label_loop(const AnnotationSession& s, const std::filesystem::path& file,
                                  const std::string& annotator, std::istream& in, std::ostream& out,
                                  std::size_t from = 0, std::size_t to = SIZE_MAX) {
  const auto done = s.labels_by(annotator);
  std::size_t added = 0;
  auto ask = [&](const std::string& prompt) -> std::optional<std::string> {
    out << prompt << std::flush;
    std::string answer;
    if (!std::getline(in, answer)) return std::nullopt;
    return normalize_text(answer);
  };
  auto parse_tags = [](const std::string& text) {
    RuleTags t;
    for (char c : text) {
      if (c == 'i') t.add(RuleTag::instruction);
      if (c == 's') t.add(RuleTag::suggestion);
      if (c == 'f') t.add(RuleTag::fix_mechanism);
    }
    return t;
  };

  for (std::size_t i = from; i < s.sample.size() && i < to; ++i) {
    const auto& item = s.sample[i];
    if (done.count(item.comment_id)) continue;
    out << "\n[" << (i + 1) << "/" << s.sample.size() << "] comment " << item.comment_id << " (" << item.project
        << " #" << item.pr << ")\n"
        << item.body << "\n";
    for (;;) {
      auto verdict = ask("implicit mentoring? [y]es [n]o [s]kip [q]uit: ");
      if (!verdict || *verdict == "q") return added;
      if (*verdict == "s") break;
      if (*verdict != "y" && *verdict != "n") continue;
      auto tags = ask("rule tags [i]nstruction [s]uggestion [f]ix-mechanism (letters, blank for none): ");
      if (!tags) return added;
      auto expl = ask("contains an explanation? [y/n]: ");
      if (!expl) return added;
      LabelEntry e{item.comment_id, annotator, *verdict == "y", parse_tags(*tags), *expl == "y"};
      try {
        LabeledExample(e.comment_id, item.body, e.label, e.annotator, e.tags, e.has_explanation);
      } catch (const ArgumentError& err) {
        out << "rejected: " << err.what() << "\n";
        continue;
      }
      append_entry(file, e);
      ++added;
      break;
    }
  }
  return added;
}

}  // namespace imentor
