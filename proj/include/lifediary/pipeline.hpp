#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lifediary/alignment.hpp"
#include "lifediary/decoder.hpp"
#include "lifediary/errors.hpp"
#include "lifediary/io.hpp"
#include "lifediary/joint.hpp"
#include "lifediary/metrics.hpp"
#include "lifediary/predictor.hpp"
#include "lifediary/retrieval.hpp"

namespace lifediary {

/// Seconds since the Unix epoch for an ISO-8601 timestamp of the form
/// YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+hh:mm|-hh:mm]. Fractional seconds are
/// accepted and ignored; a missing zone designator is read as UTC.
inline std::int64_t parse_iso8601(const std::string& s) {
  int year, month, day, hour, minute, second;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%*1[Tt ]%2d:%2d:%2d%n", &year, &month, &day, &hour,
                  &minute, &second, &consumed) != 6) {
    throw ParseError("bad timestamp '" + s + "' (expected YYYY-MM-DDTHH:MM:SS)");
  }
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  int offset_seconds = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh, om;
      if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2) {
        throw ParseError("bad timezone offset in '" + s + "'");
      }
      offset_seconds = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
      pos += 6;
    }
  }
  if (pos != s.size()) throw ParseError("trailing characters in timestamp '" + s + "'");
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60) {
    throw ParseError("timestamp field out of range in '" + s + "'");
  }
  // Days since 1970-01-01 from a civil date (Gregorian, proleptic).
  std::int64_t y = year - (month <= 2 ? 1 : 0);
  std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  std::int64_t yoe = y - era * 400;
  std::int64_t doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  std::int64_t days = era * 146097 + doe - 719468;
  return days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds;
}

struct PrecomputedCandidate {
  std::string text;
  double log_score = 0.0;
};

/// One lifelog photo as it arrives from the manifest. Every record needs
/// either decode inputs (feature + regions) or precomputed candidates.
struct ImageRecord {
  std::string image_id;
  std::string timestamp;
  std::int64_t timestamp_epoch = 0;
  std::vector<double> feature;
  std::vector<std::vector<double>> regions;
  std::vector<PrecomputedCandidate> precomputed;

  bool has_regions() const { return !regions.empty(); }
  bool has_feature() const { return !feature.empty(); }
  bool has_precomputed() const { return !precomputed.empty(); }
};

struct StreamManifest {
  std::string stream_id;
  std::vector<ImageRecord> records;
};

/// Reads a JSON-lines manifest. A first line without "image_id" is an
/// optional stream header ({"stream_id": ...}); every other line is one
/// ImageRecord. Records are re-sorted by timestamp (stable), duplicate ids
/// and records with neither decode inputs nor candidates are rejected.
inline StreamManifest load_manifest(const std::string& path) {
  std::istringstream in(read_text_file(path));
  StreamManifest manifest;
  manifest.stream_id = std::filesystem::path(path).stem().string();

  std::string line;
  int lineno = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
    if (!rec.contains("image_id")) {
      if (lineno == 1) {
        manifest.stream_id = rec.value("stream_id", manifest.stream_id);
        continue;
      }
      throw ParseError(path, lineno, "record is missing image_id");
    }
    ImageRecord image;
    try {
      image.image_id = rec.at("image_id").get<std::string>();
      image.timestamp = rec.at("timestamp").get<std::string>();
      if (rec.contains("feature")) image.feature = rec.at("feature").get<std::vector<double>>();
      if (rec.contains("regions")) {
        image.regions = rec.at("regions").get<std::vector<std::vector<double>>>();
      }
      if (rec.contains("candidates")) {
        for (const auto& c : rec.at("candidates")) {
          image.precomputed.push_back(PrecomputedCandidate{c.at("text").get<std::string>(),
                                                           c.at("log_score").get<double>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
    try {
      image.timestamp_epoch = parse_iso8601(image.timestamp);
    } catch (const ParseError& e) {
      throw ParseError(path, lineno, e.what());
    }
    if (!seen_ids.insert(image.image_id).second) {
      throw ParseError(path, lineno, "duplicate image_id '" + image.image_id + "'");
    }
    bool decodable = image.has_feature() && image.has_regions();
    if (!decodable && !image.has_precomputed()) {
      throw ParseError(path, lineno,
                       "record '" + image.image_id +
                           "' needs feature+regions or precomputed candidates");
    }
    manifest.records.push_back(std::move(image));
  }
  if (manifest.records.empty()) throw ParseError(path + ": manifest contains no records");
  std::stable_sort(manifest.records.begin(), manifest.records.end(),
                   [](const ImageRecord& a, const ImageRecord& b) {
                     return a.timestamp_epoch < b.timestamp_epoch;
                   });
  return manifest;
}

struct PipelineConfig {
  DecoderConfig decoder;
  JointConfig joint;
  KeywordConfig keywords;
  std::string vocabulary_path;
  std::string predictor_path;
  std::string word_vectors_path;
  std::string output_dir = "out";
  // Unary cost charged to an image (without region vectors) for candidates
  // it did not itself produce; stands in for +infinity.
  double foreign_candidate_cost = 1e9;
  // Optional chain windowing: Viterbi runs over blocks of this many images
  // (0 = whole stream). The pooled candidate set stays shared.
  int window = 0;
  std::optional<std::string> references_path;
  std::optional<std::string> labels_path;

  void validate() const {
    joint.validate();
    keywords.validate();
    if (window < 0) throw InvalidConfigError("window must be >= 0");
  }

  /// Reads the JSON config; all model files it names must exist (checked
  /// here, before any work starts).
  static PipelineConfig load(const std::string& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    PipelineConfig config;
    try {
      if (doc.contains("decoder")) {
        const auto& d = doc.at("decoder");
        config.decoder.beam_size = d.value("beam_size", config.decoder.beam_size);
        config.decoder.rounds = d.value("rounds", config.decoder.rounds);
        config.decoder.diversity_penalty =
            d.value("diversity_penalty", config.decoder.diversity_penalty);
        config.decoder.max_len = d.value("max_len", config.decoder.max_len);
      }
      if (doc.contains("joint")) {
        config.joint.beta = doc.at("joint").value("beta", config.joint.beta);
        config.window = doc.at("joint").value("window", config.window);
      }
      if (doc.contains("keywords")) {
        config.keywords = KeywordConfig::from_json(doc.at("keywords"), path);
      }
      config.vocabulary_path = doc.value("vocabulary", "");
      config.predictor_path = doc.value("predictor", "");
      config.word_vectors_path = doc.value("word_vectors", "");
      config.output_dir = doc.value("output_dir", config.output_dir);
      config.foreign_candidate_cost =
          doc.value("foreign_candidate_cost", config.foreign_candidate_cost);
      if (doc.contains("references")) config.references_path = doc.at("references");
      if (doc.contains("labels")) config.labels_path = doc.at("labels");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    config.validate();
    return config;
  }
};

struct ImageRetrieval {
  std::string image_id;
  Classification classification;
};

struct RetrievalResult {
  std::vector<ImageRetrieval> per_image;
  std::optional<ConfusionMatrix> confusion_3way;
  std::optional<ConfusionMatrix> confusion_2way;
  std::vector<PrPoint> pr_points;
};

struct PipelineResult {
  std::vector<DiarySegment> segments;
  RetrievalResult retrieval;
  std::optional<EvalReport> report;
  EnergyInstance instance;
  ViterbiResult viterbi;
  std::vector<ImageCandidates> candidates_by_image;
};

namespace detail {

inline EnergyInstance build_energy_instance(const StreamManifest& manifest,
                                            const std::vector<ImageCandidates>& per_image,
                                            const CandidateSet& pooled,
                                            const AlignmentModel& model,
                                            double foreign_candidate_cost) {
  EnergyInstance instance;
  instance.candidates = pooled;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const ImageRecord& record = manifest.records[i];
    instance.image_ids.push_back(record.image_id);
    instance.timestamps.push_back(record.timestamp);
    std::vector<double> row(static_cast<std::size_t>(pooled.size()));
    if (record.has_regions()) {
      RegionSet regions{record.image_id, record.regions};
      for (int c = 0; c < pooled.size(); ++c) {
        row[static_cast<std::size_t>(c)] = unary_cost(pooled.at(c).tokens, regions, model);
      }
    } else {
      // No regions: fall back to the model log-scores this image reported
      // for its own candidates; foreign candidates get the surrogate cost.
      for (int c = 0; c < pooled.size(); ++c) {
        double log_score =
            pooled.at(c).source_log_score(record.image_id, -foreign_candidate_cost);
        row[static_cast<std::size_t>(c)] = -log_score;
      }
    }
    instance.unary.push_back(std::move(row));
  }
  return instance;
}

inline ViterbiResult run_windowed_viterbi(const EnergyInstance& instance, double beta,
                                          int window) {
  const int k = instance.image_count();
  if (window <= 0 || window >= k) return viterbi_joint(instance, beta);
  ViterbiResult combined;
  for (int start = 0; start < k; start += window) {
    int end = std::min(start + window, k);
    EnergyInstance block;
    block.candidates = instance.candidates;
    for (int i = start; i < end; ++i) {
      block.image_ids.push_back(instance.image_ids[i]);
      block.timestamps.push_back(instance.timestamps[i]);
      block.unary.push_back(instance.unary[i]);
    }
    ViterbiResult r = viterbi_joint(block, beta);
    combined.labeling.insert(combined.labeling.end(), r.labeling.begin(), r.labeling.end());
    combined.energy += r.energy;
  }
  return combined;
}

/// Top captions of one image by model log-score (ties toward the earlier
/// candidate), canonically tokenized for keyword matching.
inline std::vector<std::vector<std::string>> top_captions(const ImageCandidates& image,
                                                          int limit) {
  std::vector<std::size_t> order(image.candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return image.candidates[a].log_score > image.candidates[b].log_score;
  });
  std::vector<std::vector<std::string>> captions;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < limit; ++i) {
    captions.push_back(canonical_tokens(image.candidates[order[i]].text));
  }
  return captions;
}

}  // namespace detail

/// Pools a stream's per-image candidate lists and prices every candidate at
/// every image from the reported log-scores alone: a candidate costs
/// -log_score at images that produced it and `foreign_candidate_cost`
/// elsewhere. This is the region-free route used when candidates arrive
/// from an external captioner.
inline EnergyInstance instance_from_candidates(const std::vector<ImageCandidates>& per_image,
                                               double foreign_candidate_cost) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> pool_input;
  for (const auto& image : per_image) {
    std::vector<std::pair<std::string, double>> sentences;
    for (const auto& c : image.candidates) sentences.emplace_back(c.text, c.log_score);
    pool_input.emplace_back(image.image_id, std::move(sentences));
  }
  EnergyInstance instance;
  instance.candidates = pool_candidate_texts(pool_input);
  for (const auto& image : per_image) {
    instance.image_ids.push_back(image.image_id);
    instance.timestamps.push_back(image.timestamp);
    std::vector<double> row(static_cast<std::size_t>(instance.candidates.size()));
    for (int c = 0; c < instance.candidates.size(); ++c) {
      double log_score = instance.candidates.at(c).source_log_score(image.image_id,
                                                                    -foreign_candidate_cost);
      row[static_cast<std::size_t>(c)] = -log_score;
    }
    instance.unary.push_back(std::move(row));
  }
  return instance;
}

/// Alignment-backed instance: images with region vectors are priced by
/// negated alignment score against the shared pooled set; images without
/// them fall back to the log-score pricing above.
inline EnergyInstance instance_from_manifest(const StreamManifest& manifest,
                                             const std::vector<ImageCandidates>& per_image,
                                             const AlignmentModel& model,
                                             double foreign_candidate_cost) {
  if (manifest.records.size() != per_image.size()) {
    throw InvalidInputError("candidates do not cover the manifest image-for-image");
  }
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    if (manifest.records[i].image_id != per_image[i].image_id) {
      throw InvalidInputError("candidate record order does not match the manifest (image '" +
                              per_image[i].image_id + "')");
    }
  }
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> pool_input;
  for (const auto& image : per_image) {
    std::vector<std::pair<std::string, double>> sentences;
    for (const auto& c : image.candidates) sentences.emplace_back(c.text, c.log_score);
    pool_input.emplace_back(image.image_id, std::move(sentences));
  }
  return detail::build_energy_instance(manifest, per_image, pool_candidate_texts(pool_input),
                                       model, foreign_candidate_cost);
}

/// Per-image sensitive-content classification over the top captions, plus
/// confusion matrices and a PR sweep when ground-truth labels are given.
inline RetrievalResult run_retrieval(const std::vector<ImageCandidates>& per_image,
                                     const KeywordConfig& keywords,
                                     const std::map<std::string, SensitivityLabel>* labels) {
  RetrievalResult result;
  for (const auto& image : per_image) {
    Classification c =
        classify_image(detail::top_captions(image, keywords.captions_per_image), keywords);
    result.per_image.push_back(ImageRetrieval{image.image_id, c});
  }
  if (labels != nullptr) {
    std::vector<std::pair<SensitivityLabel, SensitivityLabel>> pairs;
    std::vector<std::pair<bool, double>> scored;
    for (const auto& r : result.per_image) {
      auto it = labels->find(r.image_id);
      if (it == labels->end()) {
        throw InvalidInputError("no ground-truth label for image '" + r.image_id + "'");
      }
      pairs.emplace_back(it->second, r.classification.label);
      scored.emplace_back(it->second != SensitivityLabel::NotSensitive,
                          r.classification.confidence);
    }
    result.confusion_3way = confusion_matrix(pairs, ConfusionMode::ThreeWay);
    result.confusion_2way = confusion_matrix(pairs, ConfusionMode::TwoWay);
    result.pr_points = pr_curve(scored);
  }
  return result;
}

/// The whole flow: decode (or accept) candidates per image, pool them,
/// build the unary cost matrix, minimize the chain energy, group diary
/// segments, classify sensitive images, optionally score against
/// references. Outputs are staged into `stager`; nothing touches disk here.
inline PipelineResult run_pipeline_staged(const StreamManifest& manifest,
                                          const PipelineConfig& config, OutputStager& stager) {
  config.validate();
  if (manifest.records.empty()) throw InvalidInputError("manifest contains no records");

  // Fail fast: resolve every referenced file before doing any work.
  AlignmentModel model;
  bool any_regions = false;
  bool any_decode = false;
  for (const auto& record : manifest.records) {
    if (record.has_regions()) any_regions = true;
    if (!record.has_precomputed()) any_decode = true;
  }
  if (any_regions) {
    if (config.word_vectors_path.empty()) {
      throw InvalidConfigError("manifest has region vectors but no word_vectors file is set");
    }
    model = AlignmentModel::load(config.word_vectors_path);
  }
  std::unique_ptr<ToyPredictor> predictor;
  if (any_decode) {
    if (config.predictor_path.empty()) {
      throw InvalidConfigError("manifest requires decoding but no predictor file is set");
    }
    predictor = std::make_unique<ToyPredictor>(ToyPredictor::load(config.predictor_path));
    if (!config.vocabulary_path.empty()) {
      Vocabulary vocab = Vocabulary::load(config.vocabulary_path);
      if (!(vocab == predictor->vocabulary())) {
        throw InvalidConfigError("vocabulary file does not match the predictor's vocabulary");
      }
    }
  }
  std::map<std::string, std::vector<std::string>> references;
  if (config.references_path) references = read_references_file(*config.references_path);
  std::map<std::string, SensitivityLabel> labels;
  if (config.labels_path) labels = read_labels_file(*config.labels_path);

  // Candidate generation.
  PipelineResult result;
  for (const auto& record : manifest.records) {
    ImageCandidates image;
    image.image_id = record.image_id;
    image.timestamp = record.timestamp;
    if (record.has_precomputed()) {
      for (const auto& c : record.precomputed) {
        image.candidates.push_back(CandidateRecord{c.text, c.log_score, 0});
      }
    } else {
      for (const auto& h : diverse_m_best(*predictor, record.feature, config.decoder)) {
        image.candidates.push_back(
            CandidateRecord{join_tokens(surface_tokens(h, predictor->vocabulary())),
                            h.log_score, h.round});
      }
    }
    result.candidates_by_image.push_back(std::move(image));
  }

  // Pool, score, smooth, group.
  result.instance = instance_from_manifest(manifest, result.candidates_by_image, model,
                                           config.foreign_candidate_cost);
  result.viterbi =
      detail::run_windowed_viterbi(result.instance, config.joint.beta, config.window);
  result.segments = group_segments(result.instance, result.viterbi.labeling);

  // Retrieval over each image's own top captions.
  result.retrieval = run_retrieval(result.candidates_by_image, config.keywords,
                                   config.labels_path ? &labels : nullptr);

  // Optional evaluation of the selected sentences.
  if (config.references_path) {
    std::vector<EvalPair> pairs;
    std::vector<std::string> missing;
    for (int i = 0; i < result.instance.image_count(); ++i) {
      const std::string& id = result.instance.image_ids[i];
      auto it = references.find(id);
      if (it == references.end() || it->second.empty()) {
        missing.push_back(id);
        continue;
      }
      pairs.push_back(EvalPair::from_text(
          result.instance.candidates.at(result.viterbi.labeling[i]).text, it->second));
    }
    if (!missing.empty()) {
      std::string ids;
      for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
      throw InvalidInputError("images without references: " + ids);
    }
    result.report = summarize(pairs);
  }

  // Stage outputs.
  stager.add("candidates.jsonl", write_candidates_file(result.candidates_by_image));
  stager.add("labeling.json",
             write_labeling_json(result.instance, result.viterbi, config.joint.beta));
  stager.add("diary.txt", write_diary_text(result.segments));
  stager.add("diary.jsonl", write_segments_jsonl(result.segments));
  {
    std::string lines;
    for (const auto& r : result.retrieval.per_image) {
      nlohmann::json rec;
      rec["image_id"] = r.image_id;
      rec["label"] = to_string(r.classification.label);
      rec["confidence"] = r.classification.confidence;
      rec["matched_keywords"] = r.classification.matched_keywords;
      lines += rec.dump();
      lines += '\n';
    }
    stager.add("retrieval.jsonl", lines);
  }
  if (result.retrieval.confusion_3way) {
    stager.add("confusion_3way.txt", write_confusion_text(*result.retrieval.confusion_3way));
    stager.add("confusion_3way.json", write_confusion_json(*result.retrieval.confusion_3way));
    stager.add("confusion_2way.txt", write_confusion_text(*result.retrieval.confusion_2way));
    stager.add("confusion_2way.json", write_confusion_json(*result.retrieval.confusion_2way));
    stager.add("pr_curve.csv", write_pr_csv(result.retrieval.pr_points));
  }
  if (result.report) {
    stager.add("report.json", write_report_json(*result.report));
    stager.add("report.txt", write_report_text(*result.report));
  }
  return result;
}

/// Convenience wrapper: stage and commit to config.output_dir. A run that
/// throws writes nothing.
inline PipelineResult run_pipeline(const StreamManifest& manifest,
                                   const PipelineConfig& config) {
  OutputStager stager;
  PipelineResult result = run_pipeline_staged(manifest, config, stager);
  stager.commit(config.output_dir);
  return result;
}

}  // namespace lifediary
