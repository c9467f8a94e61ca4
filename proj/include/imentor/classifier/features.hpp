#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "imentor/core/random.hpp"

namespace imentor {

inline constexpr std::string_view kCodeToken = "__code__";
inline constexpr std::string_view kUrlToken = "__url__";

/// Lowercases and collapses fenced/inline code and URLs into placeholder tokens.
inline std::string normalize_comment(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  auto starts = [&](std::string_view p) { return body.substr(i, p.size()) == p; };
  while (i < body.size()) {
    if (starts("```")) {
      const auto end = body.find("```", i + 3);
      i = end == std::string_view::npos ? body.size() : end + 3;
      out.append(" ").append(kCodeToken).append(" ");
    } else if (body[i] == '`') {
      const auto end = body.find('`', i + 1);
      i = end == std::string_view::npos ? body.size() : end + 1;
      out.append(" ").append(kCodeToken).append(" ");
    } else if (starts("http://") || starts("https://") || starts("www.")) {
      while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != ')' &&
             body[i] != ']' && body[i] != '>') {
        ++i;
      }
      out.append(" ").append(kUrlToken).append(" ");
    } else {
      const auto c = static_cast<unsigned char>(body[i]);
      out += c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
      ++i;
    }
  }
  return out;
}

/// Word tokens of length >= 2. Word characters are ASCII alphanumerics,
/// underscore, and any non-ASCII byte (keeps UTF-8 words intact).
inline std::vector<std::string> tokenize(std::string_view body) {
  const auto text = normalize_comment(body);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '_' || c >= 0x80) {
      current += ch;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

/// Sparse tf-idf vector, entries sorted by term index.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint64_t vocabulary_tag = 0;

  double at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
  }
  bool empty() const { return entries.empty(); }
};

/// Terms frozen at fit time with idf = ln(N / df).
struct Vocabulary {
  std::vector<std::string> terms;  // sorted
  std::vector<double> idf;
  std::uint64_t tag = 0;

  std::size_t size() const { return terms.size(); }

  std::optional<std::uint32_t> index_of(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term) return std::nullopt;
    return static_cast<std::uint32_t>(it - terms.begin());
  }

  static std::uint64_t compute_tag(const std::vector<std::string>& terms) {
    std::string joined;
    for (const auto& t : terms) joined.append(t).push_back('\n');
    return fnv1a(joined);
  }
};

template <typename Texts>
Vocabulary fit_vocabulary(const Texts& texts) {
  std::map<std::string, std::size_t> df;
  std::size_t docs = 0;
  for (const auto& text : texts) {
    ++docs;
    auto tokens = tokenize(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }
  Vocabulary v;
  for (const auto& [term, count] : df) {
    v.terms.push_back(term);
    v.idf.push_back(std::log(static_cast<double>(docs) / static_cast<double>(count)));
  }
  v.tag = Vocabulary::compute_tag(v.terms);
  return v;
}

/// tf-idf with raw term counts, L2-normalized. Out-of-vocabulary terms and
/// zero-idf terms contribute nothing.
inline FeatureVector featurize(std::string_view body, const Vocabulary& vocabulary) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokenize(body)) {
    if (auto idx = vocabulary.index_of(t)) counts[*idx] += 1.0;
  }
  FeatureVector fv;
  fv.vocabulary_tag = vocabulary.tag;
  double norm = 0;
  for (const auto& [idx, count] : counts) {
    const double w = count * vocabulary.idf[idx];
    if (w > 0) {
      fv.entries.emplace_back(idx, w);
      norm += w * w;
    }
  }
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& e : fv.entries) e.second /= norm;
  }
  return fv;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

}  // namespace imentor
