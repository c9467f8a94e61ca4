#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "imentor/classifier/model.hpp"
#include "imentor/core/parallel.hpp"
#include "imentor/ingestion/types.hpp"

namespace imentor {

struct Classification {
  double score = 0;
  bool label = false;
};

using Classifications = std::map<std::int64_t, Classification>;

inline constexpr double kDecisionThreshold = 0.5;

/// Scores every comment in the corpus; label = score >= 0.5.
inline Classifications classify_corpus(const TrainedModel& model, const Corpus& corpus, std::size_t workers = 0) {
  const auto& comments = corpus.comments();
  auto scores = parallel_map<double>(comments.size(), workers,
                                     [&](std::size_t i) { return model.score_text(comments[i].body); });
  Classifications out;
  for (std::size_t i = 0; i < comments.size(); ++i) {
    out[comments[i].comment_id] = {scores[i], scores[i] >= kDecisionThreshold};
  }
  return out;
}

/// Scores file: `comment_id,score,label` CSV with a header line.
inline void write_scores(const Classifications& scores, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write scores " + file.string());
  out << "comment_id,score,label\n";
  char buf[64];
  for (const auto& [id, c] : scores) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%d\n", static_cast<long long>(id), c.score, c.label ? 1 : 0);
    out << buf;
  }
}

inline Classifications read_scores(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read scores " + file.string());
  Classifications out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 || line.empty()) continue;
    long long id = 0;
    double score = 0;
    int label = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%d", &id, &score, &label) != 3) {
      throw DataError(file.filename().string() + ":" + std::to_string(number) + ": malformed score line");
    }
    out[id] = {score, label != 0};
  }
  return out;
}

}  // namespace imentor
