// Command-line surface for the lifediary pipeline. Each stage is exposed
// separately so runs are scriptable and reproducible:
//
//   decode    manifest -> per-image diverse candidate captions
//   score     manifest + candidates -> unary cost matrix (CSV + sidecar)
//   smooth    candidates or cost matrix -> labeling, energy, segments
//   diary     manifest + config -> full pipeline outputs
//   evaluate  selected sentences + references -> seven-score report
//   retrieve  candidates (+ keywords, labels) -> confusions and PR curve
//
// Exit codes: 0 success, 2 missing input file, 64 bad flag or config,
// 65 malformed or inconsistent data, 70 internal error. Errors go to
// stderr; data goes to files only.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lifediary/lifediary.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMissingFile = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

using lifediary::OutputStager;

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw lifediary::MissingFileError("file not found: " + path);
  }
}

// Stages outputs (twice under --seed-free, comparing byte-for-byte) and
// commits them in one atomic step.
void produce_outputs(bool seed_free, const std::string& output_dir,
                     const std::function<void(OutputStager&)>& stage) {
  OutputStager first;
  stage(first);
  if (seed_free) {
    OutputStager second;
    stage(second);
    if (!first.identical_to(second)) {
      throw std::runtime_error("determinism check failed: two identical runs disagreed");
    }
  }
  first.commit(output_dir);
}

struct CommonFlags {
  std::string output_dir = "out";
  bool seed_free = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--output-dir", output_dir, "Directory for output files");
    cmd->add_flag("--seed-free", seed_free,
                  "Run the computation twice and fail unless outputs are byte-identical");
  }
};

std::vector<lifediary::ImageCandidates> decode_stream(
    const lifediary::StreamManifest& manifest, const lifediary::ToyPredictor& predictor,
    const lifediary::DecoderConfig& config) {
  std::vector<lifediary::ImageCandidates> images;
  for (const auto& record : manifest.records) {
    lifediary::ImageCandidates image;
    image.image_id = record.image_id;
    image.timestamp = record.timestamp;
    if (record.has_precomputed()) {
      // Externally captioned records pass through unchanged.
      for (const auto& c : record.precomputed) {
        image.candidates.push_back(lifediary::CandidateRecord{c.text, c.log_score, 0});
      }
    } else {
      for (const auto& h : lifediary::diverse_m_best(predictor, record.feature, config)) {
        image.candidates.push_back(lifediary::CandidateRecord{
            lifediary::join_tokens(lifediary::surface_tokens(h, predictor.vocabulary())),
            h.log_score, h.round});
      }
    }
    images.push_back(std::move(image));
  }
  return images;
}

int cmd_decode(const std::string& manifest_path, const std::string& vocab_path,
               const std::string& predictor_path, const lifediary::DecoderConfig& config,
               const CommonFlags& common) {
  require_file(manifest_path);
  require_file(predictor_path);
  lifediary::StreamManifest manifest = lifediary::load_manifest(manifest_path);
  lifediary::ToyPredictor predictor = lifediary::ToyPredictor::load(predictor_path);
  if (!vocab_path.empty()) {
    require_file(vocab_path);
    if (!(lifediary::Vocabulary::load(vocab_path) == predictor.vocabulary())) {
      throw lifediary::InvalidConfigError(
          "vocabulary file does not match the predictor's vocabulary");
    }
  }
  produce_outputs(common.seed_free, common.output_dir, [&](OutputStager& stager) {
    stager.add("candidates.jsonl",
               lifediary::write_candidates_file(decode_stream(manifest, predictor, config)));
  });
  return kExitOk;
}

int cmd_score(const std::string& manifest_path, const std::string& candidates_path,
              const std::string& word_vectors_path, double foreign_cost,
              const CommonFlags& common) {
  require_file(manifest_path);
  require_file(candidates_path);
  require_file(word_vectors_path);
  lifediary::StreamManifest manifest = lifediary::load_manifest(manifest_path);
  auto candidates = lifediary::read_candidates_file(candidates_path);
  lifediary::AlignmentModel model = lifediary::AlignmentModel::load(word_vectors_path);
  lifediary::EnergyInstance instance =
      lifediary::instance_from_manifest(manifest, candidates, model, foreign_cost);
  produce_outputs(common.seed_free, common.output_dir, [&](OutputStager& stager) {
    stager.add("cost_matrix.csv", lifediary::write_cost_matrix_csv(instance));
    stager.add("candidate_list.txt", lifediary::write_candidate_list(instance.candidates));
  });
  return kExitOk;
}

int cmd_smooth(const std::string& candidates_path, const std::string& matrix_path,
               const std::string& candidate_list_path, double beta, double foreign_cost,
               const CommonFlags& common) {
  const bool candidate_route = !candidates_path.empty();
  const bool matrix_route = !matrix_path.empty() || !candidate_list_path.empty();
  if (candidate_route == matrix_route) {
    throw lifediary::InvalidConfigError(
        "smooth needs either --candidates or --cost-matrix with --candidate-list");
  }
  if (matrix_route && (matrix_path.empty() || candidate_list_path.empty())) {
    throw lifediary::InvalidConfigError(
        "--cost-matrix and --candidate-list must be given together");
  }

  lifediary::EnergyInstance instance;
  if (candidate_route) {
    require_file(candidates_path);
    instance = lifediary::instance_from_candidates(
        lifediary::read_candidates_file(candidates_path), foreign_cost);
  } else {
    require_file(matrix_path);
    require_file(candidate_list_path);
    instance = lifediary::read_cost_matrix_csv(matrix_path, candidate_list_path);
  }
  lifediary::ViterbiResult result = lifediary::viterbi_joint(instance, beta);
  auto segments = lifediary::group_segments(instance, result.labeling);
  produce_outputs(common.seed_free, common.output_dir, [&](OutputStager& stager) {
    stager.add("labeling.json", lifediary::write_labeling_json(instance, result, beta));
    stager.add("segments.jsonl", lifediary::write_segments_jsonl(segments));
  });
  return kExitOk;
}

int cmd_diary(const std::string& config_path, const std::string& manifest_path,
              std::optional<double> beta_override, const std::string& references_path,
              const std::string& labels_path, const std::string& output_dir_flag,
              bool seed_free) {
  require_file(config_path);
  require_file(manifest_path);
  lifediary::PipelineConfig config = lifediary::PipelineConfig::load(config_path);
  if (beta_override) config.joint.beta = *beta_override;
  if (!references_path.empty()) config.references_path = references_path;
  if (!labels_path.empty()) config.labels_path = labels_path;
  if (!output_dir_flag.empty()) config.output_dir = output_dir_flag;
  config.validate();
  for (const std::string* path : {&config.vocabulary_path, &config.predictor_path,
                                  &config.word_vectors_path}) {
    if (!path->empty()) require_file(*path);
  }
  if (config.references_path) require_file(*config.references_path);
  if (config.labels_path) require_file(*config.labels_path);

  lifediary::StreamManifest manifest = lifediary::load_manifest(manifest_path);
  produce_outputs(seed_free, config.output_dir, [&](OutputStager& stager) {
    lifediary::run_pipeline_staged(manifest, config, stager);
  });
  return kExitOk;
}

int cmd_evaluate(const std::string& candidates_path, const std::string& references_path,
                 const std::string& scores_row, const CommonFlags& common) {
  lifediary::EvalReport report;
  if (!scores_row.empty()) {
    // Aggregate-only mode: seven comma-separated scores in, mean out.
    std::array<double, 7> scores{};
    std::istringstream in(scores_row);
    std::string field;
    std::size_t i = 0;
    while (std::getline(in, field, ',')) {
      if (i >= scores.size()) break;
      try {
        scores[i++] = std::stod(field);
      } catch (const std::exception&) {
        throw lifediary::InvalidConfigError("--scores expects decimal values");
      }
    }
    if (i != scores.size() || std::getline(in, field, ',')) {
      throw lifediary::InvalidConfigError("--scores expects exactly 7 comma-separated values");
    }
    report = lifediary::EvalReport::from_scores(scores);
  } else {
    require_file(candidates_path);
    require_file(references_path);
    auto candidates = lifediary::read_candidates_file(candidates_path);
    auto references = lifediary::read_references_file(references_path);

    std::vector<lifediary::EvalPair> pairs;
    std::vector<std::string> missing;
    for (const auto& image : candidates) {
      auto it = references.find(image.image_id);
      if (it == references.end() || it->second.empty()) {
        missing.push_back(image.image_id);
        continue;
      }
      // Highest-scoring candidate per image; selected-sentence files
      // simply carry one candidate.
      const lifediary::CandidateRecord* best = nullptr;
      for (const auto& c : image.candidates) {
        if (best == nullptr || c.log_score > best->log_score) best = &c;
      }
      if (best == nullptr) {
        missing.push_back(image.image_id);
        continue;
      }
      pairs.push_back(lifediary::EvalPair::from_text(best->text, it->second));
    }
    if (!missing.empty()) {
      std::string ids;
      for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
      throw lifediary::InvalidInputError("images without references: " + ids);
    }
    report = lifediary::summarize(pairs);
  }
  produce_outputs(common.seed_free, common.output_dir, [&](OutputStager& stager) {
    stager.add("report.json", lifediary::write_report_json(report));
    stager.add("report.txt", lifediary::write_report_text(report));
  });
  return kExitOk;
}

int cmd_retrieve(const std::string& candidates_path, const std::string& keywords_path,
                 const std::string& labels_path, const CommonFlags& common) {
  require_file(candidates_path);
  lifediary::KeywordConfig keywords;
  if (!keywords_path.empty()) {
    require_file(keywords_path);
    keywords = lifediary::KeywordConfig::load(keywords_path);
  }
  auto candidates = lifediary::read_candidates_file(candidates_path);
  std::map<std::string, lifediary::SensitivityLabel> labels;
  if (!labels_path.empty()) {
    require_file(labels_path);
    labels = lifediary::read_labels_file(labels_path);
  }
  lifediary::RetrievalResult result = lifediary::run_retrieval(
      candidates, keywords, labels_path.empty() ? nullptr : &labels);
  produce_outputs(common.seed_free, common.output_dir, [&](OutputStager& stager) {
    std::string lines;
    for (const auto& r : result.per_image) {
      nlohmann::json rec;
      rec["image_id"] = r.image_id;
      rec["label"] = lifediary::to_string(r.classification.label);
      rec["confidence"] = r.classification.confidence;
      rec["matched_keywords"] = r.classification.matched_keywords;
      lines += rec.dump();
      lines += '\n';
    }
    stager.add("retrieval.jsonl", lines);
    if (result.confusion_3way) {
      stager.add("confusion_3way.txt", lifediary::write_confusion_text(*result.confusion_3way));
      stager.add("confusion_3way.json",
                 lifediary::write_confusion_json(*result.confusion_3way));
      stager.add("confusion_2way.txt", lifediary::write_confusion_text(*result.confusion_2way));
      stager.add("confusion_2way.json",
                 lifediary::write_confusion_json(*result.confusion_2way));
      stager.add("pr_curve.csv", lifediary::write_pr_csv(result.pr_points));
    }
  });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint captioning, summarization and retrieval for lifelogging photo streams"};
  app.require_subcommand(1);

  // decode
  auto* decode = app.add_subcommand("decode", "Generate diverse candidate captions per image");
  std::string decode_manifest, decode_vocab, decode_predictor;
  lifediary::DecoderConfig decoder_config;
  CommonFlags decode_common;
  decode->add_option("--manifest", decode_manifest, "Stream manifest (JSON lines)")->required();
  decode->add_option("--vocab", decode_vocab, "Vocabulary file (cross-checked when given)");
  decode->add_option("--predictor", decode_predictor, "Predictor model file")->required();
  decode->add_option("--beam-size", decoder_config.beam_size, "Hypotheses kept per step")
      ->check(CLI::PositiveNumber);
  decode->add_option("--rounds", decoder_config.rounds, "Rounds of penalized beam search")
      ->check(CLI::PositiveNumber);
  decode
      ->add_option("--diversity-penalty", decoder_config.diversity_penalty,
                   "Bias subtracted per prior-round occurrence")
      ->check(CLI::NonNegativeNumber);
  decode->add_option("--max-len", decoder_config.max_len, "Maximum caption length")
      ->check(CLI::PositiveNumber);
  decode_common.attach(decode);

  // score
  auto* score = app.add_subcommand("score", "Build the unary cost matrix for a stream");
  std::string score_manifest, score_candidates, score_vectors;
  double score_foreign_cost = 1e9;
  CommonFlags score_common;
  score->add_option("--manifest", score_manifest, "Stream manifest (JSON lines)")->required();
  score->add_option("--candidates", score_candidates, "Candidates file from decode")->required();
  score->add_option("--word-vectors", score_vectors, "Word-vector table")->required();
  score->add_option("--foreign-cost", score_foreign_cost,
                    "Surrogate cost for foreign candidates at region-free images");
  score_common.attach(score);

  // smooth
  auto* smooth = app.add_subcommand("smooth", "Select a temporally consistent caption sequence");
  std::string smooth_candidates, smooth_matrix, smooth_list;
  double smooth_beta = 1.0, smooth_foreign_cost = 1e9;
  CommonFlags smooth_common;
  smooth->add_option("--candidates", smooth_candidates, "Candidates file from decode");
  smooth->add_option("--cost-matrix", smooth_matrix, "Cost matrix CSV");
  smooth->add_option("--candidate-list", smooth_list, "Sidecar candidate list");
  smooth->add_option("--beta", smooth_beta, "Temporal smoothing weight")
      ->check(CLI::NonNegativeNumber);
  smooth->add_option("--foreign-cost", smooth_foreign_cost,
                     "Surrogate cost for foreign candidates (candidates route)");
  smooth_common.attach(smooth);

  // diary
  auto* diary = app.add_subcommand("diary", "Run the full pipeline and emit the diary");
  std::string diary_config, diary_manifest, diary_refs, diary_labels, diary_output;
  double diary_beta = -1.0;
  bool diary_beta_set = false, diary_seed_free = false;
  diary->add_option("--config", diary_config, "Pipeline config (JSON)")->required();
  diary->add_option("--manifest", diary_manifest, "Stream manifest (JSON lines)")->required();
  diary->add_option("--beta", diary_beta, "Override the config's smoothing weight")
      ->check(CLI::NonNegativeNumber)
      ->each([&](const std::string&) { diary_beta_set = true; });
  diary->add_option("--references", diary_refs, "Reference sentences for evaluation");
  diary->add_option("--labels", diary_labels, "Ground-truth sensitivity labels");
  diary->add_option("--output-dir", diary_output, "Override the config's output directory");
  diary->add_flag("--seed-free", diary_seed_free,
                  "Run the computation twice and fail unless outputs are byte-identical");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score selected sentences against references");
  std::string eval_candidates, eval_references, eval_scores;
  CommonFlags eval_common;
  evaluate->add_option("--candidates", eval_candidates,
                       "Candidates or selected-sentences file");
  evaluate->add_option("--references", eval_references, "References file (JSON lines)");
  evaluate->add_option("--scores", eval_scores,
                       "Aggregate-only mode: seven comma-separated scores");
  eval_common.attach(evaluate);

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Keyword-based sensitive-image detection");
  std::string retrieve_candidates, retrieve_keywords, retrieve_labels;
  CommonFlags retrieve_common;
  retrieve->add_option("--candidates", retrieve_candidates, "Candidates file from decode")
      ->required();
  retrieve->add_option("--keywords", retrieve_keywords, "Keyword config (JSON)");
  retrieve->add_option("--labels", retrieve_labels, "Ground-truth sensitivity labels");
  retrieve_common.attach(retrieve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*decode) {
      return cmd_decode(decode_manifest, decode_vocab, decode_predictor, decoder_config,
                        decode_common);
    }
    if (*score) {
      return cmd_score(score_manifest, score_candidates, score_vectors, score_foreign_cost,
                       score_common);
    }
    if (*smooth) {
      return cmd_smooth(smooth_candidates, smooth_matrix, smooth_list, smooth_beta,
                        smooth_foreign_cost, smooth_common);
    }
    if (*diary) {
      return cmd_diary(diary_config, diary_manifest,
                       diary_beta_set ? std::optional<double>(diary_beta) : std::nullopt,
                       diary_refs, diary_labels, diary_output, diary_seed_free);
    }
    if (*evaluate) {
      if (eval_scores.empty() && (eval_candidates.empty() || eval_references.empty())) {
        throw lifediary::InvalidConfigError(
            "evaluate needs --candidates and --references, or --scores");
      }
      return cmd_evaluate(eval_candidates, eval_references, eval_scores, eval_common);
    }
    if (*retrieve) {
      return cmd_retrieve(retrieve_candidates, retrieve_keywords, retrieve_labels,
                          retrieve_common);
    }
  } catch (const lifediary::MissingFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const lifediary::InvalidConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kExitUsage;
  } catch (const lifediary::ParseError& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const lifediary::InvalidInputError& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const lifediary::UndefinedScoreError& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
