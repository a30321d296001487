#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace lifediary {

inline std::string to_lower_ascii(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

/// Canonical tokenization used everywhere sentences enter the system:
/// lowercase (ASCII), split on whitespace, strip leading/trailing
/// punctuation from each token. Tokens that become empty are dropped.
/// Bytes outside ASCII pass through untouched.
inline std::vector<std::string> canonical_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0;
    std::size_t e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) out.push_back(to_lower_ascii(cur.substr(b, e - b)));
    cur.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace lifediary
