#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lifediary/decoder.hpp"
#include "lifediary/errors.hpp"

namespace lifediary {

struct JointConfig {
  double beta = 1.0;  // pairwise change penalty; 0 decouples the chain

  void validate() const {
    if (!(beta >= 0.0)) throw InvalidConfigError("beta must be >= 0");
  }
};

/// One chain labeling problem: K images in stream order, a shared candidate
/// set, and a K x |C| matrix of unary costs.
struct EnergyInstance {
  std::vector<std::string> image_ids;
  std::vector<std::string> timestamps;  // empty, or one per image
  CandidateSet candidates;
  std::vector<std::vector<double>> unary;

  int image_count() const { return static_cast<int>(unary.size()); }
  int candidate_count() const { return unary.empty() ? 0 : static_cast<int>(unary[0].size()); }

  void validate() const {
    if (unary.empty()) throw InvalidInputError("energy instance has no images");
    const std::size_t c = unary[0].size();
    if (c == 0) throw InvalidInputError("energy instance has no candidates");
    for (const auto& row : unary) {
      if (row.size() != c) throw InvalidInputError("unary matrix rows have unequal lengths");
      for (double v : row) {
        if (!std::isfinite(v)) throw InvalidInputError("unary costs must be finite");
      }
    }
    if (!image_ids.empty() && image_ids.size() != unary.size()) {
      throw InvalidInputError("image id list does not match unary matrix height");
    }
    if (!timestamps.empty() && timestamps.size() != unary.size()) {
      throw InvalidInputError("timestamp list does not match unary matrix height");
    }
    if (!candidates.empty() && static_cast<std::size_t>(candidates.size()) != c) {
      throw InvalidInputError("candidate set does not match unary matrix width");
    }
  }

  void check_labeling(const std::vector<int>& labeling) const {
    if (static_cast<int>(labeling.size()) != image_count()) {
      throw InvalidInputError("labeling length does not match image count");
    }
    for (int v : labeling) {
      if (v < 0 || v >= candidate_count()) {
        throw InvalidInputError("labeling index " + std::to_string(v) + " out of range");
      }
    }
  }
};

/// Total chain energy of a labeling: sum of unary costs plus beta per
/// adjacent label change. Accumulated right-to-left, the exact order of the
/// dynamic program below, so optimal energies compare bit-for-bit.
inline double energy(const EnergyInstance& instance, const std::vector<int>& labeling,
                     double beta) {
  instance.validate();
  instance.check_labeling(labeling);
  const int k = instance.image_count();
  double acc = instance.unary[k - 1][labeling[k - 1]];
  for (int i = k - 2; i >= 0; --i) {
    if (labeling[i] != labeling[i + 1]) acc += beta;
    acc += instance.unary[i][labeling[i]];
  }
  return acc;
}

struct ViterbiResult {
  std::vector<int> labeling;
  double energy = 0.0;
};

/// Exact minimization of the chain energy. The change penalty is constant
/// across label pairs, so each state's best successor is either itself or
/// the globally cheapest successor plus beta; the backward sweep is
/// O(K*|C|) instead of the O(K*|C|^2) full transition scan. Ties prefer the
/// lower candidate index, resolved left to right.
inline ViterbiResult viterbi_joint(const EnergyInstance& instance, double beta) {
  instance.validate();
  JointConfig{beta}.validate();
  const int k = instance.image_count();
  const int c = instance.candidate_count();

  // cost_to_go[i][s]: cheapest energy of the suffix i..K-1 with image i
  // labeled s.
  std::vector<std::vector<double>> cost_to_go(static_cast<std::size_t>(k),
                                              std::vector<double>(static_cast<std::size_t>(c)));
  for (int s = 0; s < c; ++s) cost_to_go[k - 1][s] = instance.unary[k - 1][s];
  for (int i = k - 2; i >= 0; --i) {
    const auto& next = cost_to_go[i + 1];
    double global_min = next[0];
    for (int s = 1; s < c; ++s) global_min = std::min(global_min, next[s]);
    const double switch_cost = global_min + beta;
    for (int s = 0; s < c; ++s) {
      cost_to_go[i][s] = instance.unary[i][s] + std::min(next[s], switch_cost);
    }
  }

  ViterbiResult result;
  result.labeling.resize(static_cast<std::size_t>(k));
  int best = 0;
  for (int s = 1; s < c; ++s) {
    if (cost_to_go[0][s] < cost_to_go[0][best]) best = s;
  }
  result.labeling[0] = best;
  result.energy = cost_to_go[0][best];
  for (int i = 1; i < k; ++i) {
    const int prev = result.labeling[i - 1];
    int chosen = 0;
    double chosen_cost = cost_to_go[i][0];
    if (0 != prev) chosen_cost += beta;
    for (int s = 1; s < c; ++s) {
      double cost = cost_to_go[i][s];
      if (s != prev) cost += beta;
      if (cost < chosen_cost) {
        chosen = s;
        chosen_cost = cost;
      }
    }
    result.labeling[i] = chosen;
  }
  return result;
}

/// Maximal run of consecutive images assigned the same sentence.
struct DiarySegment {
  int start_index = 0;
  int end_index = 0;  // inclusive
  int candidate_index = 0;
  std::vector<std::string> sentence;
  std::string text;
  std::vector<std::string> image_ids;
  std::string start_timestamp;
  std::string end_timestamp;
};

/// Run-length grouping of a labeling into diary segments; concatenating the
/// segments reproduces the labeling exactly.
inline std::vector<DiarySegment> group_segments(const EnergyInstance& instance,
                                                const std::vector<int>& labeling) {
  instance.validate();
  instance.check_labeling(labeling);
  const int k = instance.image_count();
  std::vector<DiarySegment> segments;
  int start = 0;
  for (int i = 1; i <= k; ++i) {
    if (i < k && labeling[i] == labeling[start]) continue;
    DiarySegment seg;
    seg.start_index = start;
    seg.end_index = i - 1;
    seg.candidate_index = labeling[start];
    if (!instance.candidates.empty()) {
      const auto& cand = instance.candidates.at(seg.candidate_index);
      seg.sentence = cand.tokens;
      seg.text = cand.text;
    }
    for (int j = start; j < i; ++j) {
      if (!instance.image_ids.empty()) seg.image_ids.push_back(instance.image_ids[j]);
    }
    if (!instance.timestamps.empty()) {
      seg.start_timestamp = instance.timestamps[start];
      seg.end_timestamp = instance.timestamps[i - 1];
    }
    segments.push_back(std::move(seg));
    start = i;
  }
  return segments;
}

}  // namespace lifediary
