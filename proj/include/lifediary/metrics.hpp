#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lifediary/errors.hpp"
#include "lifediary/stemmer.hpp"
#include "lifediary/tokenize.hpp"

namespace lifediary {

/// One generated sentence with its ground-truth reference sentences, all
/// canonically tokenized.
struct EvalPair {
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;

  static EvalPair from_text(const std::string& candidate_text,
                            const std::vector<std::string>& reference_texts) {
    EvalPair pair;
    pair.candidate = canonical_tokens(candidate_text);
    for (const auto& ref : reference_texts) pair.references.push_back(canonical_tokens(ref));
    return pair;
  }
};

namespace detail {

inline void require_nonempty(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw UndefinedScoreError("metric undefined on an empty corpus");
  for (const auto& p : pairs) {
    if (p.references.empty()) {
      throw UndefinedScoreError("every evaluated sentence needs at least one reference");
    }
  }
}

using Ngram = std::vector<std::string>;

inline std::map<Ngram, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::map<Ngram, int> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)] += 1;
  }
  return counts;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

enum class BleuMode { Corpus, SentenceAverage };

/// BLEU-n: geometric mean of the modified (clipped) 1..n-gram precisions,
/// times the brevity penalty exp(min(0, 1 - r/c)). Corpus mode pools the
/// n-gram counts over all pairs before taking precisions; r takes, per
/// pair, the reference length closest to the candidate's (ties toward the
/// shorter reference).
inline double bleu_n(const std::vector<EvalPair>& pairs, int n,
                     BleuMode mode = BleuMode::Corpus) {
  if (n < 1 || n > 4) throw InvalidConfigError("BLEU order must be in 1..4");
  detail::require_nonempty(pairs);

  if (mode == BleuMode::SentenceAverage) {
    double total = 0.0;
    for (const auto& p : pairs) {
      total += bleu_n({p}, n, BleuMode::Corpus);
    }
    return total / static_cast<double>(pairs.size());
  }

  std::vector<long long> clipped(static_cast<std::size_t>(n), 0);
  std::vector<long long> totals(static_cast<std::size_t>(n), 0);
  long long candidate_len = 0;
  long long reference_len = 0;

  for (const auto& p : pairs) {
    candidate_len += static_cast<long long>(p.candidate.size());
    // Closest reference length; ties prefer the shorter reference.
    std::size_t best_ref = p.references[0].size();
    for (const auto& ref : p.references) {
      auto dist = [&](std::size_t len) {
        return std::llabs(static_cast<long long>(len) -
                          static_cast<long long>(p.candidate.size()));
      };
      if (dist(ref.size()) < dist(best_ref) ||
          (dist(ref.size()) == dist(best_ref) && ref.size() < best_ref)) {
        best_ref = ref.size();
      }
    }
    reference_len += static_cast<long long>(best_ref);

    for (int k = 1; k <= n; ++k) {
      auto cand_counts = detail::ngram_counts(p.candidate, k);
      std::map<detail::Ngram, int> max_ref_counts;
      for (const auto& ref : p.references) {
        for (const auto& [gram, count] : detail::ngram_counts(ref, k)) {
          auto& cap = max_ref_counts[gram];
          cap = std::max(cap, count);
        }
      }
      for (const auto& [gram, count] : cand_counts) {
        totals[k - 1] += count;
        auto it = max_ref_counts.find(gram);
        if (it != max_ref_counts.end()) clipped[k - 1] += std::min(count, it->second);
      }
    }
  }

  double log_precision_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    if (totals[k - 1] == 0 || clipped[k - 1] == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(clipped[k - 1]) /
                                  static_cast<double>(totals[k - 1]));
  }
  double brevity = 1.0;
  if (candidate_len < reference_len) {
    brevity = std::exp(1.0 - static_cast<double>(reference_len) /
                                 static_cast<double>(candidate_len));
  }
  return brevity * std::exp(log_precision_sum / static_cast<double>(n));
}

/// CIDEr: for each n in 1..4, the cosine similarity between TF-IDF n-gram
/// vectors of candidate and reference, averaged over references; the pair
/// score is the mean over n scaled by 10, and the corpus score the mean
/// over pairs. Document frequency counts, over the reference corpus, the
/// pairs whose references contain the n-gram; the weight of an n-gram is
/// its raw count times log(N / max(1, df)), so an n-gram present in every
/// reference document carries zero weight.
inline double cider(const std::vector<EvalPair>& pairs) {
  detail::require_nonempty(pairs);
  constexpr int kMaxOrder = 4;
  const double num_docs = static_cast<double>(pairs.size());

  std::array<std::map<detail::Ngram, int>, kMaxOrder> df;
  for (const auto& p : pairs) {
    for (int k = 1; k <= kMaxOrder; ++k) {
      std::set<detail::Ngram> seen;
      for (const auto& ref : p.references) {
        for (const auto& [gram, count] : detail::ngram_counts(ref, k)) seen.insert(gram);
      }
      for (const auto& gram : seen) df[k - 1][gram] += 1;
    }
  }

  auto tfidf = [&](const std::vector<std::string>& tokens, int k) {
    std::map<detail::Ngram, double> vec;
    for (const auto& [gram, count] : detail::ngram_counts(tokens, k)) {
      auto it = df[k - 1].find(gram);
      double doc_freq = it == df[k - 1].end() ? 0.0 : static_cast<double>(it->second);
      vec[gram] = static_cast<double>(count) * std::log(num_docs / std::max(1.0, doc_freq));
    }
    return vec;
  };
  auto cosine = [](const std::map<detail::Ngram, double>& a,
                   const std::map<detail::Ngram, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [gram, w] : a) {
      na += w * w;
      auto it = b.find(gram);
      if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [gram, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  double corpus = 0.0;
  for (const auto& p : pairs) {
    double pair_score = 0.0;
    for (int k = 1; k <= kMaxOrder; ++k) {
      auto cand_vec = tfidf(p.candidate, k);
      double sim = 0.0;
      for (const auto& ref : p.references) {
        sim += cosine(cand_vec, tfidf(ref, k));
      }
      pair_score += sim / static_cast<double>(p.references.size());
    }
    corpus += 10.0 * pair_score / static_cast<double>(kMaxOrder);
  }
  return corpus / num_docs;
}

struct MeteorOptions {
  bool use_stem = true;
  // Optional synonym table (token -> synonyms); the synonym stage is
  // skipped when empty.
  std::map<std::string, std::set<std::string>> synonyms;
};

namespace detail {

// Staged unigram alignment: exact matches first, then stems, then
// synonyms. Within a stage each unmatched candidate token takes the
// leftmost unmatched matching reference position.
inline std::vector<std::pair<int, int>> meteor_alignment(
    const std::vector<std::string>& cand, const std::vector<std::string>& ref,
    const MeteorOptions& opts) {
  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);

  auto run_stage = [&](auto&& matches) {
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cand_to_ref[i] >= 0) continue;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (ref_used[j]) continue;
        if (matches(cand[i], ref[j])) {
          cand_to_ref[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  };

  run_stage([](const std::string& a, const std::string& b) { return a == b; });
  if (opts.use_stem) {
    run_stage([](const std::string& a, const std::string& b) {
      return porter_stem(a) == porter_stem(b);
    });
  }
  if (!opts.synonyms.empty()) {
    auto synonymous = [&](const std::string& a, const std::string& b) {
      auto it = opts.synonyms.find(a);
      if (it != opts.synonyms.end() && it->second.count(b)) return true;
      it = opts.synonyms.find(b);
      return it != opts.synonyms.end() && it->second.count(a) > 0;
    };
    run_stage(synonymous);
  }

  std::vector<std::pair<int, int>> alignment;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] >= 0) alignment.emplace_back(static_cast<int>(i), cand_to_ref[i]);
  }
  return alignment;
}

inline double meteor_single(const std::vector<std::string>& cand,
                            const std::vector<std::string>& ref, const MeteorOptions& opts) {
  if (cand.empty() || ref.empty()) return 0.0;
  auto alignment = meteor_alignment(cand, ref, opts);
  const double m = static_cast<double>(alignment.size());
  if (m == 0.0) return 0.0;

  double precision = m / static_cast<double>(cand.size());
  double recall = m / static_cast<double>(ref.size());
  double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);

  // Chunks: maximal runs that are contiguous in both sentences.
  int chunks = 0;
  for (std::size_t i = 0; i < alignment.size(); ++i) {
    if (i == 0 || alignment[i].first != alignment[i - 1].first + 1 ||
        alignment[i].second != alignment[i - 1].second + 1) {
      ++chunks;
    }
  }
  double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);
  return fmean * (1.0 - penalty);
}

}  // namespace detail

/// METEOR with the classic constants: harmonic mean weighted 9:1 toward
/// recall, fragmentation penalty 0.5*(chunks/matches)^3. Per pair the best
/// reference counts; the corpus score is the mean over pairs.
inline double meteor(const std::vector<EvalPair>& pairs, const MeteorOptions& opts = {}) {
  detail::require_nonempty(pairs);
  double total = 0.0;
  for (const auto& p : pairs) {
    double best = 0.0;
    for (const auto& ref : p.references) {
      best = std::max(best, detail::meteor_single(p.candidate, ref, opts));
    }
    total += best;
  }
  return total / static_cast<double>(pairs.size());
}

/// ROUGE-L: F-measure of LCS-based precision and recall with recall weight
/// w = 1.2; per pair the best reference counts, and the corpus score is the
/// mean over pairs.
inline double rouge_l(const std::vector<EvalPair>& pairs) {
  detail::require_nonempty(pairs);
  constexpr double w = 1.2;
  constexpr double w2 = w * w;
  double total = 0.0;
  for (const auto& p : pairs) {
    double best = 0.0;
    for (const auto& ref : p.references) {
      if (p.candidate.empty() || ref.empty()) continue;
      double lcs = static_cast<double>(detail::lcs_length(p.candidate, ref));
      double recall = lcs / static_cast<double>(ref.size());
      double precision = lcs / static_cast<double>(p.candidate.size());
      if (recall + w2 * precision > 0.0) {
        best = std::max(best, (1.0 + w2) * recall * precision / (recall + w2 * precision));
      }
    }
    total += best;
  }
  return total / static_cast<double>(pairs.size());
}

/// The full scorecard: BLEU-1..4, CIDEr, METEOR, ROUGE-L and their
/// arithmetic mean.
struct EvalReport {
  double bleu1 = 0.0, bleu2 = 0.0, bleu3 = 0.0, bleu4 = 0.0;
  double cider = 0.0, meteor = 0.0, rouge_l = 0.0;
  double mean = 0.0;

  std::array<double, 7> scores() const {
    return {bleu1, bleu2, bleu3, bleu4, cider, meteor, rouge_l};
  }

  static EvalReport from_scores(const std::array<double, 7>& s) {
    EvalReport r;
    r.bleu1 = s[0];
    r.bleu2 = s[1];
    r.bleu3 = s[2];
    r.bleu4 = s[3];
    r.cider = s[4];
    r.meteor = s[5];
    r.rouge_l = s[6];
    r.mean = seven_score_mean(s);
    return r;
  }

  static double seven_score_mean(const std::array<double, 7>& s) {
    return (s[0] + s[1] + s[2] + s[3] + s[4] + s[5] + s[6]) / 7.0;
  }
};

inline EvalReport summarize(const std::vector<EvalPair>& pairs, const MeteorOptions& opts = {}) {
  detail::require_nonempty(pairs);
  return EvalReport::from_scores({bleu_n(pairs, 1), bleu_n(pairs, 2), bleu_n(pairs, 3),
                                  bleu_n(pairs, 4), cider(pairs), meteor(pairs, opts),
                                  rouge_l(pairs)});
}

}  // namespace lifediary
