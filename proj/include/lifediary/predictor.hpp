#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lifediary/errors.hpp"
#include "lifediary/fs.hpp"
#include "lifediary/vocabulary.hpp"

namespace lifediary {

/// Next-word model driving caption generation. Implementations must be
/// deterministic and safe to share read-only across concurrent decodes.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  /// Pre-softmax activation for every vocabulary token, given the image
  /// feature and the decoded prefix (token ids, most recent last; empty at
  /// the first step). Must return exactly vocabulary().size() values.
  virtual std::vector<double> activations(const std::vector<double>& image_feature,
                                          const std::vector<int>& prefix) const = 0;
};

/// Deterministic table-driven predictor: images are assigned to the nearest
/// centroid, and each (cluster, previous token) pair maps to a row of
/// activations. Rows absent from the table fall back to a constant row.
class ToyPredictor : public Predictor {
 public:
  ToyPredictor(Vocabulary vocab, std::vector<std::vector<double>> centroids,
               double default_activation = 0.0)
      : vocab_(std::move(vocab)),
        centroids_(std::move(centroids)),
        default_activation_(default_activation) {}

  const Vocabulary& vocabulary() const override { return vocab_; }

  void set_row(int cluster, int prev_token_id, std::vector<double> row) {
    if (static_cast<int>(row.size()) != vocab_.size()) {
      throw InvalidConfigError("activation row length must equal vocabulary size");
    }
    table_[{cluster, prev_token_id}] = std::move(row);
  }

  /// Nearest centroid by squared Euclidean distance; lower index wins ties.
  /// With no centroids every image belongs to cluster 0.
  int cluster_of(const std::vector<double>& feature) const {
    if (centroids_.empty()) return 0;
    int best = 0;
    double best_d2 = squared_distance(centroids_[0], feature);
    for (std::size_t i = 1; i < centroids_.size(); ++i) {
      double d2 = squared_distance(centroids_[i], feature);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  std::vector<double> activations(const std::vector<double>& image_feature,
                                  const std::vector<int>& prefix) const override {
    int prev = prefix.empty() ? vocab_.start_id() : prefix.back();
    auto it = table_.find({cluster_of(image_feature), prev});
    if (it == table_.end()) {
      return std::vector<double>(static_cast<std::size_t>(vocab_.size()), default_activation_);
    }
    return it->second;
  }

  /// Loads the JSON model file. Schema (docs/formats.md):
  ///   {
  ///     "vocabulary": ["<s>", "</s>", ...],
  ///     "centroids": [[...], ...],
  ///     "default_activation": 0.0,
  ///     "bigrams": {"<cluster>": {"<prev token>": [|V| floats], ...}, ...}
  ///   }
  static ToyPredictor load(const std::string& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    try {
      Vocabulary vocab(doc.at("vocabulary").get<std::vector<std::string>>());
      std::vector<std::vector<double>> centroids;
      if (doc.contains("centroids")) {
        centroids = doc.at("centroids").get<std::vector<std::vector<double>>>();
      }
      double dflt = doc.value("default_activation", 0.0);
      ToyPredictor p(std::move(vocab), std::move(centroids), dflt);
      if (doc.contains("bigrams")) {
        for (const auto& [cluster_key, rows] : doc.at("bigrams").items()) {
          int cluster = std::stoi(cluster_key);
          for (const auto& [prev_token, row] : rows.items()) {
            int prev = p.vocab_.id(prev_token);
            if (prev < 0) {
              throw ParseError(path + ": bigram table references unknown token '" +
                               prev_token + "'");
            }
            p.set_row(cluster, prev, row.get<std::vector<double>>());
          }
        }
      }
      return p;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
  }

 private:
  static double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
      throw InvalidInputError("image feature dimension does not match centroids");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = a[i] - b[i];
      d2 += d * d;
    }
    return d2;
  }

  Vocabulary vocab_;
  std::vector<std::vector<double>> centroids_;
  double default_activation_ = 0.0;
  std::map<std::pair<int, int>, std::vector<double>> table_;
};

}  // namespace lifediary
