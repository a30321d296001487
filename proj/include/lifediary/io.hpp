#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lifediary/decoder.hpp"
#include "lifediary/errors.hpp"
#include "lifediary/fs.hpp"
#include "lifediary/joint.hpp"
#include "lifediary/metrics.hpp"
#include "lifediary/retrieval.hpp"

namespace lifediary {

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Collects output files in memory and writes them in one shot: every file
/// lands as name.tmp first and is renamed only after all writes succeed, so
/// a failing run never leaves partial outputs behind.
class OutputStager {
 public:
  void add(const std::string& name, std::string content) {
    files_[name] = std::move(content);
  }

  const std::map<std::string, std::string>& files() const { return files_; }

  bool identical_to(const OutputStager& other) const { return files_ == other.files_; }

  void commit(const std::string& directory) const {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::vector<std::pair<fs::path, fs::path>> staged;
    try {
      for (const auto& [name, content] : files_) {
        fs::path final_path = fs::path(directory) / name;
        fs::path tmp_path = final_path;
        tmp_path += ".tmp";
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) throw InvalidInputError("failed writing " + tmp_path.string());
        staged.emplace_back(tmp_path, final_path);
      }
      for (const auto& [tmp, final_path] : staged) {
        fs::rename(tmp, final_path);
      }
    } catch (...) {
      for (const auto& [tmp, final_path] : staged) {
        std::error_code ec;
        fs::remove(tmp, ec);
      }
      throw;
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

// ---------------------------------------------------------------------------
// Candidates file: JSON lines, one record per image in stream order.
//   {"image_id": ..., "timestamp": ..., "candidates":
//     [{"text": ..., "log_score": ..., "round": ...}, ...]}
// ---------------------------------------------------------------------------

struct CandidateRecord {
  std::string text;
  double log_score = 0.0;
  int round = 1;
};

struct ImageCandidates {
  std::string image_id;
  std::string timestamp;
  std::vector<CandidateRecord> candidates;
};

inline std::string write_candidates_file(const std::vector<ImageCandidates>& images) {
  std::string out;
  for (const auto& image : images) {
    nlohmann::json rec;
    rec["image_id"] = image.image_id;
    rec["timestamp"] = image.timestamp;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : image.candidates) {
      list.push_back({{"text", c.text}, {"log_score", c.log_score}, {"round", c.round}});
    }
    rec["candidates"] = std::move(list);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ImageCandidates> read_candidates_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<ImageCandidates> images;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      ImageCandidates image;
      image.image_id = rec.at("image_id").get<std::string>();
      image.timestamp = rec.value("timestamp", "");
      for (const auto& c : rec.at("candidates")) {
        image.candidates.push_back(CandidateRecord{c.at("text").get<std::string>(),
                                                   c.at("log_score").get<double>(),
                                                   c.value("round", 1)});
      }
      images.push_back(std::move(image));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  if (images.empty()) throw ParseError(path + ": no candidate records");
  return images;
}

// ---------------------------------------------------------------------------
// Cost matrix (CSV, image per row) with a sidecar candidate list (one
// sentence per line; the line number is the column index).
// ---------------------------------------------------------------------------

inline std::string write_cost_matrix_csv(const EnergyInstance& instance) {
  std::string out = "image_id";
  for (int c = 0; c < instance.candidate_count(); ++c) {
    out += ",c" + std::to_string(c);
  }
  out += '\n';
  for (int i = 0; i < instance.image_count(); ++i) {
    out += instance.image_ids.empty() ? "img" + std::to_string(i) : instance.image_ids[i];
    for (double v : instance.unary[i]) {
      out += ',';
      out += detail::format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline std::string write_candidate_list(const CandidateSet& candidates) {
  std::string out;
  for (const auto& item : candidates.items()) {
    out += item.text;
    out += '\n';
  }
  return out;
}

inline EnergyInstance read_cost_matrix_csv(const std::string& matrix_path,
                                           const std::string& candidate_list_path) {
  EnergyInstance instance;
  {
    std::istringstream in(read_text_file(candidate_list_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      instance.candidates.add(canonical_tokens(line), "", 0.0);
    }
  }
  std::istringstream in(read_text_file(matrix_path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("image_id", 0) == 0) continue;  // header
    std::istringstream row(line);
    std::string field;
    if (!std::getline(row, field, ',')) throw ParseError(matrix_path, lineno, "empty row");
    instance.image_ids.push_back(field);
    std::vector<double> costs;
    while (std::getline(row, field, ',')) {
      try {
        costs.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(matrix_path, lineno, "bad cost value '" + field + "'");
      }
    }
    instance.unary.push_back(std::move(costs));
  }
  if (instance.unary.empty()) throw ParseError(matrix_path + ": no data rows");
  instance.validate();
  return instance;
}

// ---------------------------------------------------------------------------
// Labeling / segments output.
// ---------------------------------------------------------------------------

inline std::string write_labeling_json(const EnergyInstance& instance,
                                       const ViterbiResult& result, double beta) {
  nlohmann::json doc;
  doc["beta"] = beta;
  doc["energy"] = result.energy;
  doc["image_ids"] = instance.image_ids;
  doc["labeling"] = result.labeling;
  return doc.dump(2) + "\n";
}

inline std::string write_segments_jsonl(const std::vector<DiarySegment>& segments) {
  std::string out;
  for (const auto& seg : segments) {
    nlohmann::json rec;
    rec["start_index"] = seg.start_index;
    rec["end_index"] = seg.end_index;
    rec["candidate_index"] = seg.candidate_index;
    rec["text"] = seg.text;
    rec["image_ids"] = seg.image_ids;
    rec["start_timestamp"] = seg.start_timestamp;
    rec["end_timestamp"] = seg.end_timestamp;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline std::string write_diary_text(const std::vector<DiarySegment>& segments) {
  std::string out;
  for (const auto& seg : segments) {
    int count = seg.end_index - seg.start_index + 1;
    out += seg.start_timestamp.empty() ? "?" : seg.start_timestamp;
    out += " -- ";
    out += seg.end_timestamp.empty() ? "?" : seg.end_timestamp;
    out += "  [" + std::to_string(count) + (count == 1 ? " image]  " : " images]  ");
    out += seg.text;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// References file: JSON lines, {"image_id": ..., "references": [...]}.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::vector<std::string>> read_references_file(
    const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::vector<std::string>> refs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      nlohmann::json rec = nlohmann::json::parse(line);
      refs[rec.at("image_id").get<std::string>()] =
          rec.at("references").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Ground-truth sensitivity labels: whitespace-separated
// "image_id label" lines, label in {not_sensitive, place, display}.
// ---------------------------------------------------------------------------

inline std::map<std::string, SensitivityLabel> read_labels_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, SensitivityLabel> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string id, label;
    if (!(row >> id)) continue;  // blank line
    if (!(row >> label)) throw ParseError(path, lineno, "expected 'image_id label'");
    try {
      labels[id] = sensitivity_from_string(label);
    } catch (const ParseError& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Evaluation report writers.
// ---------------------------------------------------------------------------

inline std::string write_report_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["bleu1"] = report.bleu1;
  doc["bleu2"] = report.bleu2;
  doc["bleu3"] = report.bleu3;
  doc["bleu4"] = report.bleu4;
  doc["cider"] = report.cider;
  doc["meteor"] = report.meteor;
  doc["rouge_l"] = report.rouge_l;
  doc["mean"] = report.mean;
  return doc.dump(2) + "\n";
}

inline std::string write_report_text(const EvalReport& report) {
  std::string out =
      "Bleu-1  Bleu-2  Bleu-3  Bleu-4  CIDEr   METEOR  ROUGE   Mean\n";
  for (double v : report.scores()) {
    out += detail::format_fixed(v, 3);
    out += "   ";
  }
  out += detail::format_fixed(report.mean, 3);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval output writers.
// ---------------------------------------------------------------------------

inline std::string write_confusion_text(const ConfusionMatrix& m) {
  std::string out = "actual\\predicted";
  for (const auto& name : m.class_names) out += "\t" + name;
  out += '\n';
  for (std::size_t r = 0; r < m.class_names.size(); ++r) {
    out += m.class_names[r];
    if (!m.row_defined[r]) {
      out += "\t(undefined: no actual examples)";
    } else {
      for (double v : m.rows[r]) out += "\t" + detail::format_fixed(v, 3);
    }
    out += '\n';
  }
  return out;
}

inline std::string write_confusion_json(const ConfusionMatrix& m) {
  nlohmann::json doc;
  doc["classes"] = m.class_names;
  doc["rows"] = m.rows;
  doc["row_defined"] = m.row_defined;
  doc["row_counts"] = m.row_counts;
  return doc.dump(2) + "\n";
}

inline std::string write_pr_csv(const std::vector<PrPoint>& points) {
  std::string out = "threshold,precision,recall\n";
  for (const auto& p : points) {
    out += detail::format_double(p.threshold);
    out += ',';
    out += detail::format_double(p.precision);
    out += ',';
    out += detail::format_double(p.recall);
    out += '\n';
  }
  return out;
}

}  // namespace lifediary
