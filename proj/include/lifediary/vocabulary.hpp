#pragma once

#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lifediary/errors.hpp"
#include "lifediary/fs.hpp"

namespace lifediary {

/// Token dictionary with dense ids 0..size()-1. The reserved sentence
/// delimiters kStartToken / kStopToken must each appear exactly once.
class Vocabulary {
 public:
  static constexpr const char* kStartToken = "<s>";
  static constexpr const char* kStopToken = "</s>";

  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
        throw InvalidConfigError("duplicate vocabulary token: " + tokens_[i]);
      }
    }
    auto s = index_.find(kStartToken);
    auto e = index_.find(kStopToken);
    if (s == index_.end() || e == index_.end()) {
      throw InvalidConfigError("vocabulary must contain the reserved tokens " +
                               std::string(kStartToken) + " and " + kStopToken);
    }
    start_id_ = s->second;
    stop_id_ = e->second;
  }

  /// Loads a plain-text vocabulary, one token per line. Blank lines are
  /// ignored.
  static Vocabulary load(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }

  /// Id of a token, or -1 when absent.
  int id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  int start_id() const { return start_id_; }
  int stop_id() const { return stop_id_; }

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int start_id_ = -1;
  int stop_id_ = -1;
};

}  // namespace lifediary
