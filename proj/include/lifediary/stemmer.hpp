#pragma once

#include <string>

namespace lifediary {
namespace detail {

// English suffix-stripping stemmer (the classic Porter rule set). Operates
// on lowercase ASCII words; anything with non-letters is returned as-is.
// The rules are implemented verbatim so stems are bit-stable across builds.
class PorterStemmer {
 public:
  static std::string stem(const std::string& word) {
    if (word.size() <= 2) return word;
    for (char c : word) {
      if (c < 'a' || c > 'z') return word;
    }
    PorterStemmer p(word);
    p.step1a();
    p.step1b();
    p.step1c();
    p.step2();
    p.step3();
    p.step4();
    p.step5a();
    p.step5b();
    return p.w_;
  }

 private:
  explicit PorterStemmer(std::string w) : w_(std::move(w)) {}

  std::string w_;

  bool is_consonant(std::size_t i) const {
    char c = w_[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !is_consonant(i - 1);
    return true;
  }

  // Number of VC sequences in the stem w_[0..end).
  int measure(std::size_t end) const {
    int m = 0;
    std::size_t i = 0;
    while (i < end && is_consonant(i)) ++i;  // skip initial C*
    while (i < end) {
      while (i < end && !is_consonant(i)) ++i;  // V+
      if (i >= end) break;
      ++m;
      while (i < end && is_consonant(i)) ++i;  // C+
    }
    return m;
  }

  bool has_vowel(std::size_t end) const {
    for (std::size_t i = 0; i < end; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool ends_with(const char* suffix) const {
    std::size_t n = std::char_traits<char>::length(suffix);
    return w_.size() >= n && w_.compare(w_.size() - n, n, suffix) == 0;
  }

  std::size_t stem_len(const char* suffix) const {
    return w_.size() - std::char_traits<char>::length(suffix);
  }

  bool double_consonant(std::size_t end) const {
    if (end < 2) return false;
    return w_[end - 1] == w_[end - 2] && is_consonant(end - 1);
  }

  // consonant-vowel-consonant ending where the last consonant is not w/x/y.
  bool cvc(std::size_t end) const {
    if (end < 3) return false;
    if (!is_consonant(end - 3) || is_consonant(end - 2) || !is_consonant(end - 1)) {
      return false;
    }
    char c = w_[end - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool replace(const char* suffix, const char* repl, int min_measure) {
    if (!ends_with(suffix)) return false;
    std::size_t sl = stem_len(suffix);
    if (measure(sl) <= min_measure) return true;  // matched, condition failed
    w_ = w_.substr(0, sl) + repl;
    return true;
  }

  void step1a() {
    if (ends_with("sses")) {
      w_.resize(w_.size() - 2);
    } else if (ends_with("ies")) {
      w_.resize(w_.size() - 2);
    } else if (!ends_with("ss") && ends_with("s")) {
      w_.resize(w_.size() - 1);
    }
  }

  void step1b() {
    if (ends_with("eed")) {
      if (measure(stem_len("eed")) > 0) w_.resize(w_.size() - 1);
      return;
    }
    bool stripped = false;
    if (ends_with("ed") && has_vowel(stem_len("ed"))) {
      w_.resize(w_.size() - 2);
      stripped = true;
    } else if (ends_with("ing") && has_vowel(stem_len("ing"))) {
      w_.resize(w_.size() - 3);
      stripped = true;
    }
    if (!stripped) return;
    if (ends_with("at") || ends_with("bl") || ends_with("iz")) {
      w_.push_back('e');
    } else if (double_consonant(w_.size())) {
      char c = w_.back();
      if (c != 'l' && c != 's' && c != 'z') w_.resize(w_.size() - 1);
    } else if (measure(w_.size()) == 1 && cvc(w_.size())) {
      w_.push_back('e');
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(w_.size() - 1)) {
      w_.back() = 'i';
    }
  }

  void step2() {
    static const struct { const char* from; const char* to; } rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
        {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
        {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
        {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
        {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
        {"iviti", "ive"},   {"biliti", "ble"},
    };
    for (const auto& r : rules) {
      if (replace(r.from, r.to, 0)) return;
    }
  }

  void step3() {
    static const struct { const char* from; const char* to; } rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    for (const auto& r : rules) {
      if (replace(r.from, r.to, 0)) return;
    }
  }

  void step4() {
    static const char* suffixes[] = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement",
        "ment", "ent",  "ion",  "ou",  "ism", "ate",  "iti",  "ous", "ive",
        "ize",
    };
    for (const char* s : suffixes) {
      if (!ends_with(s)) continue;
      std::size_t sl = stem_len(s);
      if (std::string(s) == "ion" && !(sl > 0 && (w_[sl - 1] == 's' || w_[sl - 1] == 't'))) {
        return;
      }
      if (measure(sl) > 1) w_.resize(sl);
      return;
    }
  }

  void step5a() {
    if (!ends_with("e")) return;
    std::size_t sl = w_.size() - 1;
    int m = measure(sl);
    if (m > 1 || (m == 1 && !cvc(sl))) w_.resize(sl);
  }

  void step5b() {
    if (w_.size() >= 2 && w_.back() == 'l' && double_consonant(w_.size()) &&
        measure(w_.size() - 1) > 1) {
      w_.resize(w_.size() - 1);
    }
  }
};

}  // namespace detail

inline std::string porter_stem(const std::string& word) {
  return detail::PorterStemmer::stem(word);
}

}  // namespace lifediary
