#pragma once

// Brute-force reference implementations used only by tests. These stay
// independent of the library code paths they check: the decoder oracle
// enumerates every decodable sentence, and the chain oracles run the plain
// quadratic recurrence or full labeling enumeration.

#include <cmath>
#include <vector>

#include "lifediary/decoder.hpp"
#include "lifediary/joint.hpp"
#include "lifediary/predictor.hpp"

namespace oracle {

// Every sentence the decoder can emit: the stop token may appear only in
// final position; sentences shorter than max_len must end with it, and
// sentences of exactly max_len may omit it (forced termination).
inline std::vector<std::vector<int>> enumerate_sentences(const lifediary::Vocabulary& vocab,
                                                         int max_len) {
  std::vector<std::vector<int>> out;
  std::vector<int> content;
  for (int k = 0; k < vocab.size(); ++k) {
    if (k != vocab.start_id() && k != vocab.stop_id()) content.push_back(k);
  }
  // Grow prefixes of content tokens; each prefix can either stop now or, at
  // full length, be cut without a stop token.
  std::vector<std::vector<int>> prefixes{{}};
  for (int len = 0; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& p : prefixes) {
      if (static_cast<int>(p.size()) < max_len) {
        auto stopped = p;
        stopped.push_back(vocab.stop_id());
        out.push_back(std::move(stopped));
        for (int k : content) {
          auto longer = p;
          longer.push_back(k);
          next.push_back(std::move(longer));
        }
      } else {
        out.push_back(p);  // forced cut, no stop token
      }
    }
    prefixes = std::move(next);
  }
  return out;
}

// Cumulative log-softmax of a token sequence under the raw model.
inline double sentence_log_score(const lifediary::Predictor& predictor,
                                 const std::vector<double>& feature,
                                 const std::vector<int>& tokens) {
  std::vector<int> prefix;
  double total = 0.0;
  for (int tok : tokens) {
    std::vector<double> act = predictor.activations(feature, prefix);
    double mx = act[0];
    for (double a : act) mx = std::max(mx, a);
    double sum = 0.0;
    for (double a : act) sum += std::exp(a - mx);
    total += act[tok] - (mx + std::log(sum));
    prefix.push_back(tok);
  }
  return total;
}

inline double sentence_biased_score(const lifediary::Predictor& predictor,
                                    const std::vector<double>& feature,
                                    const std::vector<int>& tokens,
                                    const lifediary::BiasTable& bias) {
  double total = sentence_log_score(predictor, feature, tokens);
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    total += bias.at(static_cast<int>(p), tokens[p]);
  }
  return total;
}

// Highest-scoring sentence by exhaustive enumeration, with the decoder's
// tie-break (lexicographically smaller token sequence wins).
inline std::vector<int> exhaustive_argmax(const lifediary::Predictor& predictor,
                                          const std::vector<double>& feature, int max_len,
                                          const lifediary::BiasTable& bias) {
  std::vector<int> best;
  double best_score = 0.0;
  bool first = true;
  for (const auto& sentence :
       enumerate_sentences(predictor.vocabulary(), max_len)) {
    double score = sentence_biased_score(predictor, feature, sentence, bias);
    if (first || score > best_score || (score == best_score && sentence < best)) {
      best = sentence;
      best_score = score;
      first = false;
    }
  }
  return best;
}

// Chain energy accumulated right-to-left, mirroring the documented order.
inline double chain_energy(const std::vector<std::vector<double>>& unary,
                           const std::vector<int>& labeling, double beta) {
  const int k = static_cast<int>(unary.size());
  double acc = unary[k - 1][labeling[k - 1]];
  for (int i = k - 2; i >= 0; --i) {
    if (labeling[i] != labeling[i + 1]) acc += beta;
    acc += unary[i][labeling[i]];
  }
  return acc;
}

// Minimum energy over all |C|^K labelings.
inline double enumerate_min_energy(const std::vector<std::vector<double>>& unary, double beta) {
  const int k = static_cast<int>(unary.size());
  const int c = static_cast<int>(unary[0].size());
  std::vector<int> labeling(k, 0);
  double best = chain_energy(unary, labeling, beta);
  while (true) {
    int i = k - 1;
    while (i >= 0 && labeling[i] == c - 1) labeling[i--] = 0;
    if (i < 0) break;
    ++labeling[i];
    best = std::min(best, chain_energy(unary, labeling, beta));
  }
  return best;
}

// Plain quadratic Viterbi: full transition scan per state, no structure
// exploited. Selection mirrors the documented tie-break (lower candidate
// index, left to right).
inline lifediary::ViterbiResult naive_viterbi(const std::vector<std::vector<double>>& unary,
                                              double beta) {
  const int k = static_cast<int>(unary.size());
  const int c = static_cast<int>(unary[0].size());
  std::vector<std::vector<double>> cost_to_go(k, std::vector<double>(c));
  for (int s = 0; s < c; ++s) cost_to_go[k - 1][s] = unary[k - 1][s];
  for (int i = k - 2; i >= 0; --i) {
    for (int s = 0; s < c; ++s) {
      double best = 0.0;
      for (int t = 0; t < c; ++t) {
        double cost = cost_to_go[i + 1][t];
        if (t != s) cost += beta;
        if (t == 0 || cost < best) best = cost;
      }
      cost_to_go[i][s] = unary[i][s] + best;
    }
  }
  lifediary::ViterbiResult result;
  result.labeling.resize(k);
  int best = 0;
  for (int s = 1; s < c; ++s) {
    if (cost_to_go[0][s] < cost_to_go[0][best]) best = s;
  }
  result.labeling[0] = best;
  result.energy = cost_to_go[0][best];
  for (int i = 1; i < k; ++i) {
    int chosen = 0;
    double chosen_cost = 0.0;
    for (int s = 0; s < c; ++s) {
      double cost = cost_to_go[i][s];
      if (s != result.labeling[i - 1]) cost += beta;
      if (s == 0 || cost < chosen_cost) {
        chosen = s;
        chosen_cost = cost;
      }
    }
    result.labeling[i] = chosen;
  }
  return result;
}

inline int transition_count(const std::vector<int>& labeling) {
  int n = 0;
  for (std::size_t i = 1; i < labeling.size(); ++i) {
    if (labeling[i] != labeling[i - 1]) ++n;
  }
  return n;
}

}  // namespace oracle
