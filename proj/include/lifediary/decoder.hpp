#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lifediary/errors.hpp"
#include "lifediary/predictor.hpp"
#include "lifediary/tokenize.hpp"
#include "lifediary/vocabulary.hpp"

namespace lifediary {

struct DecoderConfig {
  int beam_size = 5;
  int rounds = 3;
  double diversity_penalty = 2.0;  // subtracted per prior-round occurrence, activation units
  int max_len = 20;

  int candidates_per_image() const { return beam_size * rounds; }

  void validate(const Vocabulary& vocab) const {
    if (vocab.empty()) throw InvalidConfigError("decoder requires a non-empty vocabulary");
    if (beam_size < 1) throw InvalidConfigError("beam_size must be >= 1");
    if (rounds < 1) throw InvalidConfigError("rounds must be >= 1");
    if (max_len < 1) throw InvalidConfigError("max_len must be >= 1");
    if (diversity_penalty < 0.0) throw InvalidConfigError("diversity_penalty must be >= 0");
  }
};

/// One candidate caption. `tokens` holds vocabulary ids, never the start
/// token; a stop token may appear only in final position (absent when the
/// hypothesis was cut at max_len). `log_score` is the cumulative
/// log-softmax of the chosen tokens under the raw model — diversity bias
/// never leaks into it — so it is directly comparable across rounds.
struct CaptionHypothesis {
  std::vector<int> tokens;
  double log_score = 0.0;
  int round = 1;
};

/// Additive per-(position, token) adjustment applied to the per-step
/// log-softmax during beam search. Positions cover 0..max_len-1 and default
/// to zero. A bias of b on (p, k) shifts the biased score of every
/// hypothesis whose position-p token is k by exactly b and leaves all other
/// hypotheses untouched; because softmax differences at a step depend only
/// on activation differences, this realizes the same preference shift as
/// adding b to token k's activation before the softmax.
class BiasTable {
 public:
  BiasTable(int max_len, int vocab_size)
      : vocab_size_(vocab_size),
        values_(static_cast<std::size_t>(max_len) * static_cast<std::size_t>(vocab_size), 0.0) {}

  double at(int position, int token) const {
    return values_[static_cast<std::size_t>(position) * vocab_size_ + token];
  }

  void add(int position, int token, double delta) {
    values_[static_cast<std::size_t>(position) * vocab_size_ + token] += delta;
  }

 private:
  std::size_t vocab_size_;
  std::vector<double> values_;
};

namespace detail {

inline std::vector<double> log_softmax(const std::vector<double>& activations) {
  double mx = activations[0];
  for (double a : activations) mx = std::max(mx, a);
  double sum = 0.0;
  for (double a : activations) sum += std::exp(a - mx);
  double lse = mx + std::log(sum);
  std::vector<double> out(activations.size());
  for (std::size_t i = 0; i < activations.size(); ++i) out[i] = activations[i] - lse;
  return out;
}

struct BeamEntry {
  std::vector<int> tokens;
  double biased = 0.0;  // cumulative log-softmax + bias, drives the search
  double raw = 0.0;     // cumulative log-softmax, reported
};

// Deterministic ranking: higher biased score first; ties prefer the
// lexicographically smaller token sequence (which also prefers shorter).
inline bool beam_order(const BeamEntry& a, const BeamEntry& b) {
  if (a.biased != b.biased) return a.biased > b.biased;
  return a.tokens < b.tokens;
}

}  // namespace detail

/// Breadth-limited best-first decoding. At every step each surviving
/// partial hypothesis is expanded over the whole vocabulary (minus the
/// start token) and the expansions are ranked by biased score. Walking that
/// ranking, the best `beam_size` partials form the next beam; completed
/// expansions (stop token) encountered along the way retire to a separate
/// pool without consuming beam slots, and everything ranked below the last
/// kept partial is pruned. The search ends at max_len (partials still alive
/// are force-terminated into the pool), or as soon as `beam_size`
/// hypotheses are complete and no surviving partial scores above the pool's
/// beam_size-th entry — per-step scores are non-positive whenever the bias
/// is, so such partials can never catch up. Returns the pool's best
/// `beam_size` hypotheses by biased score.
inline std::vector<CaptionHypothesis> beam_search(const Predictor& predictor,
                                                  const std::vector<double>& image_feature,
                                                  const DecoderConfig& config,
                                                  const BiasTable& bias) {
  const Vocabulary& vocab = predictor.vocabulary();
  config.validate(vocab);

  const int b = config.beam_size;
  const int vocab_size = vocab.size();
  std::vector<detail::BeamEntry> beam(1);
  std::vector<detail::BeamEntry> done;

  for (int pos = 0; pos < config.max_len && !beam.empty(); ++pos) {
    if (static_cast<int>(done.size()) >= b) {
      std::sort(done.begin(), done.end(), detail::beam_order);
      if (beam.front().biased < done[static_cast<std::size_t>(b) - 1].biased) break;
    }
    std::vector<detail::BeamEntry> expansions;
    expansions.reserve(beam.size() * static_cast<std::size_t>(vocab_size));
    for (const auto& entry : beam) {
      std::vector<double> act = predictor.activations(image_feature, entry.tokens);
      if (static_cast<int>(act.size()) != vocab_size) {
        throw InvalidInputError("predictor returned " + std::to_string(act.size()) +
                                " activations for a vocabulary of " +
                                std::to_string(vocab_size));
      }
      std::vector<double> logp = detail::log_softmax(act);
      for (int k = 0; k < vocab_size; ++k) {
        if (k == vocab.start_id()) continue;
        detail::BeamEntry next;
        next.tokens = entry.tokens;
        next.tokens.push_back(k);
        next.raw = entry.raw + logp[k];
        next.biased = entry.biased + logp[k] + bias.at(pos, k);
        expansions.push_back(std::move(next));
      }
    }
    std::sort(expansions.begin(), expansions.end(), detail::beam_order);

    std::vector<detail::BeamEntry> next_beam;
    for (auto& e : expansions) {
      if (static_cast<int>(next_beam.size()) >= b) break;
      if (e.tokens.back() == vocab.stop_id()) {
        done.push_back(std::move(e));
      } else {
        next_beam.push_back(std::move(e));
      }
    }
    beam = std::move(next_beam);
  }

  // Partials alive at max_len are kept as-is; partials dropped by an early
  // stop (pool already full) are not.
  for (auto& e : beam) {
    if (static_cast<int>(e.tokens.size()) == config.max_len) done.push_back(std::move(e));
  }

  std::sort(done.begin(), done.end(), detail::beam_order);
  if (static_cast<int>(done.size()) > b) done.resize(static_cast<std::size_t>(b));

  std::vector<CaptionHypothesis> result;
  result.reserve(done.size());
  for (auto& e : done) {
    result.push_back(CaptionHypothesis{std::move(e.tokens), e.raw, 1});
  }
  return result;
}

/// Multi-round diverse decoding. Round 1 is plain beam search; every later
/// round penalizes each (position, token) pair by diversity_penalty times
/// the number of earlier rounds whose kept hypotheses used that token at
/// that position. Output concatenates the rounds, each hypothesis tagged
/// with its 1-based round of origin; length is beam_size * rounds whenever
/// the model admits that many sentences.
inline std::vector<CaptionHypothesis> diverse_m_best(const Predictor& predictor,
                                                     const std::vector<double>& image_feature,
                                                     const DecoderConfig& config) {
  const Vocabulary& vocab = predictor.vocabulary();
  config.validate(vocab);

  BiasTable bias(config.max_len, vocab.size());
  std::vector<CaptionHypothesis> all;
  for (int round = 1; round <= config.rounds; ++round) {
    std::vector<CaptionHypothesis> hyps = beam_search(predictor, image_feature, config, bias);
    std::set<std::pair<int, int>> used;  // (position, token) pairs of this round
    for (auto& h : hyps) {
      h.round = round;
      for (std::size_t p = 0; p < h.tokens.size(); ++p) {
        used.insert({static_cast<int>(p), h.tokens[p]});
      }
      all.push_back(std::move(h));
    }
    for (const auto& [p, k] : used) {
      bias.add(p, k, -config.diversity_penalty);
    }
  }
  return all;
}

/// One pooled candidate sentence with the images that produced it.
/// `sources` maps image id to the sentence's model log-score at that image,
/// in first-seen order.
struct PooledCandidate {
  std::vector<std::string> tokens;  // surface tokens, stop marker stripped
  std::string text;                 // tokens joined with single spaces
  std::vector<std::pair<std::string, double>> sources;

  double source_log_score(const std::string& image_id, double fallback) const {
    for (const auto& [id, score] : sources) {
      if (id == image_id) return score;
    }
    return fallback;
  }
};

/// Deduplicated union of candidate sentences across a stream, in first-seen
/// order. Identity is surface text after canonical tokenization.
class CandidateSet {
 public:
  int size() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }
  const std::vector<PooledCandidate>& items() const { return items_; }
  const PooledCandidate& at(int i) const { return items_.at(static_cast<std::size_t>(i)); }

  int index_of(const std::string& text) const {
    auto it = index_.find(text);
    return it == index_.end() ? -1 : it->second;
  }

  /// Inserts (or merges into) the candidate identified by `tokens`,
  /// recording `image_id` as a source. A sentence reappearing for the same
  /// image keeps its best (largest) log-score.
  void add(std::vector<std::string> tokens, const std::string& image_id, double log_score) {
    std::string text = join_tokens(tokens);
    auto [it, inserted] = index_.emplace(text, static_cast<int>(items_.size()));
    if (inserted) {
      items_.push_back(PooledCandidate{std::move(tokens), std::move(text), {{image_id, log_score}}});
      return;
    }
    auto& sources = items_[static_cast<std::size_t>(it->second)].sources;
    for (auto& [id, score] : sources) {
      if (id == image_id) {
        score = std::max(score, log_score);
        return;
      }
    }
    sources.emplace_back(image_id, log_score);
  }

 private:
  std::vector<PooledCandidate> items_;
  std::unordered_map<std::string, int> index_;
};

inline std::vector<std::string> surface_tokens(const CaptionHypothesis& hyp,
                                               const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(hyp.tokens.size());
  for (int id : hyp.tokens) {
    if (id == vocab.stop_id()) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

/// Pools per-image candidate captions into one deduplicated set; |C| is at
/// most candidates-per-image times the stream length, with equality exactly
/// when no sentence repeats.
inline CandidateSet pool_candidates(
    const std::vector<std::pair<std::string, std::vector<CaptionHypothesis>>>& per_image,
    const Vocabulary& vocab) {
  CandidateSet set;
  for (const auto& [image_id, hyps] : per_image) {
    for (const auto& h : hyps) {
      set.add(canonical_tokens(join_tokens(surface_tokens(h, vocab))), image_id, h.log_score);
    }
  }
  return set;
}

/// Text-based variant used when candidates arrive as plain sentences (e.g.
/// exported from an external captioner).
inline CandidateSet pool_candidate_texts(
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>&
        per_image) {
  CandidateSet set;
  for (const auto& [image_id, sentences] : per_image) {
    for (const auto& [text, log_score] : sentences) {
      set.add(canonical_tokens(text), image_id, log_score);
    }
  }
  return set;
}

}  // namespace lifediary
