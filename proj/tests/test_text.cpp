#include "catch2/catch_amalgamated.hpp"
#include "lifediary/stemmer.hpp"
#include "lifediary/tokenize.hpp"

using lifediary::canonical_tokens;
using lifediary::join_tokens;
using lifediary::porter_stem;

TEST_CASE("canonical tokenization lowercases and splits on whitespace", "[text]") {
  auto tokens = canonical_tokens("I am  Eating\tBreakfast\n");
  REQUIRE(tokens == std::vector<std::string>{"i", "am", "eating", "breakfast"});
}

TEST_CASE("canonical tokenization strips edge punctuation only", "[text]") {
  CHECK(canonical_tokens("\"Hello,\" she said.") ==
        std::vector<std::string>{"hello", "she", "said"});
  // Interior punctuation survives.
  CHECK(canonical_tokens("don't stop") == std::vector<std::string>{"don't", "stop"});
  // Tokens that are all punctuation vanish.
  CHECK(canonical_tokens("a -- b !!!") == std::vector<std::string>{"a", "b"});
  CHECK(canonical_tokens("   ").empty());
}

TEST_CASE("join is the inverse of a clean split", "[text]") {
  std::vector<std::string> tokens{"a", "man", "is", "sitting"};
  CHECK(join_tokens(tokens) == "a man is sitting");
  CHECK(canonical_tokens(join_tokens(tokens)) == tokens);
}

TEST_CASE("stemmer matches the classic rule set on known words", "[text]") {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},     {"ties", "ti"},
      {"caress", "caress"},   {"cats", "cat"},        {"feed", "feed"},
      {"agreed", "agre"},     {"plastered", "plaster"}, {"bled", "bled"},
      {"motoring", "motor"},  {"sing", "sing"},       {"conflated", "conflat"},
      {"troubled", "troubl"}, {"sized", "size"},      {"hopping", "hop"},
      {"falling", "fall"},    {"hissing", "hiss"},    {"fizzed", "fizz"},
      {"failing", "fail"},    {"filing", "file"},     {"happy", "happi"},
      {"sky", "sky"},         {"relational", "relat"}, {"rational", "ration"},
      {"electrical", "electr"}, {"hopefulness", "hope"}, {"formalize", "formal"},
      {"dogs", "dog"},        {"running", "run"},     {"runs", "run"},
      {"lockers", "locker"},  {"locker", "locker"},   {"screens", "screen"},
  };
  for (const auto& [word, stem] : cases) {
    INFO(word);
    CHECK(porter_stem(word) == stem);
  }
}

TEST_CASE("stemmer leaves short or non-alphabetic tokens alone", "[text]") {
  CHECK(porter_stem("go") == "go");
  CHECK(porter_stem("a1b2") == "a1b2");
  CHECK(porter_stem("don't") == "don't");
}
