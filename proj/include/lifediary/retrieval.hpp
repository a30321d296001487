#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifediary/errors.hpp"
#include "lifediary/fs.hpp"
#include "lifediary/stemmer.hpp"
#include "lifediary/tokenize.hpp"

namespace lifediary {

enum class SensitivityLabel { NotSensitive, SensitivePlace, Display };

inline const char* to_string(SensitivityLabel label) {
  switch (label) {
    case SensitivityLabel::NotSensitive: return "not_sensitive";
    case SensitivityLabel::SensitivePlace: return "place";
    case SensitivityLabel::Display: return "display";
  }
  return "not_sensitive";
}

inline SensitivityLabel sensitivity_from_string(const std::string& s) {
  if (s == "not_sensitive") return SensitivityLabel::NotSensitive;
  if (s == "place") return SensitivityLabel::SensitivePlace;
  if (s == "display") return SensitivityLabel::Display;
  throw ParseError("unknown sensitivity label '" + s +
                   "' (expected not_sensitive|place|display)");
}

struct KeywordConfig {
  enum class MatchMode { ExactToken, StemToken };

  std::vector<std::string> place_keywords{"toilet", "bathroom", "locker", "lavatory",
                                          "washroom"};
  std::vector<std::string> display_keywords{"computer", "laptop", "iphone", "smartphone",
                                            "screen"};
  int captions_per_image = 5;
  MatchMode match_mode = MatchMode::ExactToken;

  void validate() const {
    if (captions_per_image < 1) throw InvalidConfigError("captions_per_image must be >= 1");
    std::set<std::string> place;
    for (const auto& k : place_keywords) place.insert(normalize(k));
    for (const auto& k : display_keywords) {
      if (place.count(normalize(k))) {
        throw InvalidConfigError("keyword '" + k + "' appears in both keyword sets");
      }
    }
  }

  std::string normalize(const std::string& token) const {
    std::string t = to_lower_ascii(token);
    return match_mode == MatchMode::StemToken ? porter_stem(t) : t;
  }

  /// Loads a JSON keyword config; every field is optional and defaults to
  /// the values above. Malformed content raises InvalidConfigError.
  static KeywordConfig load(const std::string& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfigError(path + ": " + e.what());
    }
    return from_json(doc, path);
  }

  static KeywordConfig from_json(const nlohmann::json& doc, const std::string& context) {
    KeywordConfig config;
    try {
      if (doc.contains("place_keywords")) {
        config.place_keywords = doc.at("place_keywords").get<std::vector<std::string>>();
      }
      if (doc.contains("display_keywords")) {
        config.display_keywords = doc.at("display_keywords").get<std::vector<std::string>>();
      }
      config.captions_per_image = doc.value("captions_per_image", 5);
      std::string mode = doc.value("match_mode", "exact");
      if (mode == "exact") {
        config.match_mode = MatchMode::ExactToken;
      } else if (mode == "stem") {
        config.match_mode = MatchMode::StemToken;
      } else {
        throw InvalidConfigError(context + ": match_mode must be 'exact' or 'stem'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfigError(context + ": " + e.what());
    }
    config.validate();
    return config;
  }
};

struct Classification {
  SensitivityLabel label = SensitivityLabel::NotSensitive;
  double confidence = 0.0;
  std::vector<std::string> matched_keywords;
};

namespace detail {

inline bool caption_matches(const std::vector<std::string>& caption,
                            const std::vector<std::string>& keywords,
                            const KeywordConfig& config,
                            std::set<std::string>* matched) {
  bool any = false;
  for (const auto& keyword : keywords) {
    std::string target = config.normalize(keyword);
    for (const auto& token : caption) {
      if (config.normalize(token) == target) {
        any = true;
        if (matched) matched->insert(to_lower_ascii(keyword));
        break;
      }
    }
  }
  return any;
}

}  // namespace detail

/// Keyword rule over an image's top captions: any place keyword in any
/// caption marks the image SensitivePlace; otherwise any display keyword
/// marks it Display; otherwise NotSensitive. Matching is case-insensitive
/// and whole-token ("screensaver" never matches "screen"); stem mode
/// compares stems instead. Confidence is the fraction of the configured
/// caption budget whose captions contain a winning-class keyword, and 0
/// for NotSensitive.
inline Classification classify_image(const std::vector<std::vector<std::string>>& captions,
                                     const KeywordConfig& config) {
  config.validate();
  Classification result;
  if (captions.empty()) return result;

  std::set<std::string> place_matched, display_matched;
  int place_hits = 0, display_hits = 0;
  for (const auto& caption : captions) {
    if (detail::caption_matches(caption, config.place_keywords, config, &place_matched)) {
      ++place_hits;
    }
    if (detail::caption_matches(caption, config.display_keywords, config, &display_matched)) {
      ++display_hits;
    }
  }

  // Place takes precedence when both keyword classes appear.
  if (place_hits > 0) {
    result.label = SensitivityLabel::SensitivePlace;
    result.confidence = static_cast<double>(place_hits) /
                        static_cast<double>(config.captions_per_image);
    result.matched_keywords.assign(place_matched.begin(), place_matched.end());
  } else if (display_hits > 0) {
    result.label = SensitivityLabel::Display;
    result.confidence = static_cast<double>(display_hits) /
                        static_cast<double>(config.captions_per_image);
    result.matched_keywords.assign(display_matched.begin(), display_matched.end());
  }
  return result;
}

/// Alternative confidence: the best caller-supplied caption score (already
/// normalized into [0,1]) among captions that matched the winning class.
inline Classification classify_image_scored(
    const std::vector<std::vector<std::string>>& captions,
    const std::vector<double>& caption_scores, const KeywordConfig& config) {
  if (captions.size() != caption_scores.size()) {
    throw InvalidInputError("caption_scores must parallel captions");
  }
  Classification result = classify_image(captions, config);
  if (result.label == SensitivityLabel::NotSensitive) return result;

  const auto& keywords = result.label == SensitivityLabel::SensitivePlace
                             ? config.place_keywords
                             : config.display_keywords;
  double best = 0.0;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    if (detail::caption_matches(captions[i], keywords, config, nullptr)) {
      best = std::max(best, caption_scores[i]);
    }
  }
  result.confidence = best;
  return result;
}

enum class ConfusionMode { ThreeWay, TwoWay };

/// Row-normalized confusion matrix: entry (r, c) is the fraction of
/// actual-class-r items predicted as class c. Rows for classes with no
/// actual examples are flagged undefined rather than silently zeroed.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> rows;
  std::vector<bool> row_defined;
  std::vector<int> row_counts;
};

inline ConfusionMatrix confusion_matrix(
    const std::vector<std::pair<SensitivityLabel, SensitivityLabel>>& actual_predicted,
    ConfusionMode mode) {
  if (actual_predicted.empty()) {
    throw InvalidInputError("confusion matrix requires at least one prediction");
  }
  auto index_of = [&](SensitivityLabel label) {
    if (mode == ConfusionMode::TwoWay) {
      return label == SensitivityLabel::NotSensitive ? 0 : 1;
    }
    switch (label) {
      case SensitivityLabel::NotSensitive: return 0;
      case SensitivityLabel::SensitivePlace: return 1;
      case SensitivityLabel::Display: return 2;
    }
    return 0;
  };

  ConfusionMatrix m;
  m.class_names = mode == ConfusionMode::TwoWay
                      ? std::vector<std::string>{"not_sensitive", "sensitive"}
                      : std::vector<std::string>{"not_sensitive", "place", "display"};
  const std::size_t n = m.class_names.size();
  std::vector<std::vector<int>> counts(n, std::vector<int>(n, 0));
  for (const auto& [actual, predicted] : actual_predicted) {
    counts[index_of(actual)][index_of(predicted)] += 1;
  }
  for (std::size_t r = 0; r < n; ++r) {
    int total = 0;
    for (int v : counts[r]) total += v;
    m.row_counts.push_back(total);
    m.row_defined.push_back(total > 0);
    std::vector<double> row(n, 0.0);
    if (total > 0) {
      for (std::size_t c = 0; c < n; ++c) {
        row[c] = static_cast<double>(counts[r][c]) / static_cast<double>(total);
      }
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Precision-recall sweep over the distinct confidence values, descending;
/// an item is predicted positive when its confidence reaches the
/// threshold. Recall is non-decreasing along the sweep.
inline std::vector<PrPoint> pr_curve(const std::vector<std::pair<bool, double>>& scored) {
  if (scored.empty()) throw InvalidInputError("pr_curve requires at least one scored item");
  int positives = 0;
  for (const auto& [actual, confidence] : scored) {
    if (confidence < 0.0 || confidence > 1.0) {
      throw InvalidInputError("confidences must lie in [0, 1]");
    }
    if (actual) ++positives;
  }
  if (positives == 0) {
    throw UndefinedScoreError("recall undefined: no positive items in the ground truth");
  }

  std::set<double, std::greater<double>> thresholds;
  for (const auto& [actual, confidence] : scored) thresholds.insert(confidence);

  std::vector<PrPoint> curve;
  for (double t : thresholds) {
    int tp = 0, fp = 0;
    for (const auto& [actual, confidence] : scored) {
      if (confidence >= t) (actual ? tp : fp) += 1;
    }
    PrPoint point;
    point.threshold = t;
    point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    point.recall = static_cast<double>(tp) / static_cast<double>(positives);
    curve.push_back(point);
  }
  return curve;
}

}  // namespace lifediary
