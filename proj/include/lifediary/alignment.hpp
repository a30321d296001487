#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lifediary/errors.hpp"
#include "lifediary/fs.hpp"

namespace lifediary {

/// Precomputed appearance vectors for the salient regions of one image.
struct RegionSet {
  std::string image_id;
  std::vector<std::vector<double>> region_vectors;
};

/// Word-embedding table for sentence-image matching. Vectors are ingested
/// as data; tokens without a vector are dropped from scoring.
class AlignmentModel {
 public:
  AlignmentModel() = default;

  explicit AlignmentModel(std::unordered_map<std::string, std::vector<double>> word_vectors)
      : word_vectors_(std::move(word_vectors)) {
    for (const auto& [token, vec] : word_vectors_) {
      if (dim_ == 0) dim_ = static_cast<int>(vec.size());
      if (static_cast<int>(vec.size()) != dim_) {
        throw InvalidConfigError("word vector for '" + token +
                                 "' has inconsistent dimension");
      }
    }
  }

  /// Loads a plain-text table: one record per line, token followed by D
  /// decimal floats. Dimension is fixed by the first record.
  static AlignmentModel load(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::unordered_map<std::string, std::vector<double>> table;
    std::string line;
    int lineno = 0;
    int dim = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      std::istringstream row(line);
      std::string token;
      row >> token;
      std::vector<double> vec;
      double v;
      while (row >> v) vec.push_back(v);
      if (token.empty() || vec.empty()) {
        throw ParseError(path, lineno, "expected 'token v1 v2 ...'");
      }
      if (dim == 0) dim = static_cast<int>(vec.size());
      if (static_cast<int>(vec.size()) != dim) {
        throw ParseError(path, lineno, "vector dimension changed mid-file");
      }
      if (!table.emplace(token, std::move(vec)).second) {
        throw ParseError(path, lineno, "duplicate token '" + token + "'");
      }
    }
    return AlignmentModel(std::move(table));
  }

  int dimension() const { return dim_; }
  std::size_t size() const { return word_vectors_.size(); }

  const std::vector<double>* find(const std::string& token) const {
    auto it = word_vectors_.find(token);
    return it == word_vectors_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::string, std::vector<double>> word_vectors_;
  int dim_ = 0;
};

struct AlignOutcome {
  double score = 0.0;
  bool any_word_embedded = false;  // false means the sentence scored as 0 by fiat
};

/// Sentence-image compatibility: the sum over image regions of the largest
/// inner product between the region vector and any word vector of the
/// sentence. Out-of-vocabulary words are dropped; a sentence with no
/// embeddable word scores 0 and the outcome flags it.
inline AlignOutcome align_score_detail(const std::vector<std::string>& sentence,
                                       const RegionSet& regions, const AlignmentModel& model) {
  if (regions.region_vectors.empty()) {
    throw InvalidInputError("region set for image '" + regions.image_id + "' is empty");
  }
  std::vector<const std::vector<double>*> words;
  words.reserve(sentence.size());
  for (const auto& token : sentence) {
    if (const auto* vec = model.find(token)) words.push_back(vec);
  }
  if (words.empty()) return {0.0, false};

  const std::size_t dim = words.front()->size();
  double total = 0.0;
  for (const auto& region : regions.region_vectors) {
    if (region.size() != dim) {
      throw InvalidInputError("region vector dimension " + std::to_string(region.size()) +
                              " does not match word vector dimension " + std::to_string(dim));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto* word : words) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += region[i] * (*word)[i];
      best = std::max(best, dot);
    }
    total += best;
  }
  return {total, true};
}

inline double align_score(const std::vector<std::string>& sentence, const RegionSet& regions,
                          const AlignmentModel& model) {
  return align_score_detail(sentence, regions, model).score;
}

/// Unary cost for joint inference: negated alignment score, so lower is
/// better and the chain objective is a minimization throughout.
inline double unary_cost(const std::vector<std::string>& sentence, const RegionSet& regions,
                         const AlignmentModel& model) {
  return -align_score(sentence, regions, model);
}

}  // namespace lifediary
