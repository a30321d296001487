#include <algorithm>
#include <random>

#include "catch2/catch_amalgamated.hpp"
#include "lifediary/alignment.hpp"

using namespace lifediary;

namespace {

AlignmentModel make_model(std::unordered_map<std::string, std::vector<double>> table) {
  return AlignmentModel(std::move(table));
}

}  // namespace

TEST_CASE("zero word vectors score zero on any region set", "[alignment]") {
  AlignmentModel model = make_model({{"a", {0, 0, 0}}, {"b", {0, 0, 0}}});
  RegionSet regions{"img", {{1, 2, 3}, {-4, 5, 6}}};
  CHECK(align_score({"a", "b"}, regions, model) == 0.0);
  CHECK(unary_cost({"a", "b"}, regions, model) == 0.0);
}

TEST_CASE("one region and one word reduce to their inner product", "[alignment]") {
  AlignmentModel model = make_model({{"u", {1.5, -2.0, 0.5}}});
  RegionSet regions{"img", {{2.0, 1.0, 4.0}}};
  CHECK(align_score({"u"}, regions, model) == 2.0 * 1.5 - 2.0 + 0.5 * 4.0);
}

TEST_CASE("score is the sum over regions of the best word match", "[alignment]") {
  // Regions r1=(1,0,2), r2=(0,3,1); words u1=(2,1,0), u2=(0,1,1), u3=(1,2,2).
  // Best per region: <r1,u3> = 5 and <r2,u3> = 8, total 13.
  AlignmentModel model =
      make_model({{"u1", {2, 1, 0}}, {"u2", {0, 1, 1}}, {"u3", {1, 2, 2}}});
  RegionSet regions{"img", {{1, 0, 2}, {0, 3, 1}}};
  CHECK(align_score({"u1", "u2", "u3"}, regions, model) == 13.0);
  CHECK(unary_cost({"u1", "u2", "u3"}, regions, model) == -13.0);
}

TEST_CASE("negating the score preserves the argmin/argmax duality", "[alignment]") {
  AlignmentModel model =
      make_model({{"u1", {2, 1, 0}}, {"u2", {0, 1, 1}}, {"u3", {1, 2, 2}}});
  RegionSet regions{"img", {{1, 0, 2}, {0, 3, 1}}};
  std::vector<std::vector<std::string>> sentences{
      {"u1"}, {"u2"}, {"u1", "u2"}, {"u3"}, {"u2", "u3"}};
  std::size_t best_score = 0, best_cost = 0;
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    if (align_score(sentences[i], regions, model) >
        align_score(sentences[best_score], regions, model)) {
      best_score = i;
    }
    if (unary_cost(sentences[i], regions, model) <
        unary_cost(sentences[best_cost], regions, model)) {
      best_cost = i;
    }
  }
  CHECK(best_score == best_cost);
}

TEST_CASE("unembeddable sentences score zero and are flagged", "[alignment]") {
  AlignmentModel model = make_model({{"known", {1, 1, 1}}});
  RegionSet regions{"img", {{1, 2, 3}}};
  AlignOutcome outcome = align_score_detail({"mystery", "words"}, regions, model);
  CHECK(outcome.score == 0.0);
  CHECK_FALSE(outcome.any_word_embedded);
  // Dropping OOV tokens keeps the rest scoring normally.
  AlignOutcome mixed = align_score_detail({"mystery", "known"}, regions, model);
  CHECK(mixed.any_word_embedded);
  CHECK(mixed.score == 6.0);
}

TEST_CASE("dimension mismatches and empty region sets are rejected", "[alignment]") {
  AlignmentModel model = make_model({{"u", {1, 2}}});
  RegionSet bad_dim{"img", {{1, 2, 3}}};
  CHECK_THROWS_AS(align_score({"u"}, bad_dim, model), InvalidInputError);
  RegionSet empty{"img", {}};
  CHECK_THROWS_AS(align_score({"u"}, empty, model), InvalidInputError);
}

TEST_CASE("word vector files parse and validate", "[alignment]") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lifediary_align_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "vectors.txt");
    out << "alpha 1.0 2.0 3.0\n\nbeta -1 0.5 0\n";
  }
  AlignmentModel model = AlignmentModel::load((dir / "vectors.txt").string());
  CHECK(model.dimension() == 3);
  CHECK(model.size() == 2);
  REQUIRE(model.find("beta") != nullptr);
  CHECK((*model.find("beta"))[0] == -1.0);

  {
    std::ofstream out(dir / "ragged.txt");
    out << "alpha 1.0 2.0\nbeta 1.0 2.0 3.0\n";
  }
  CHECK_THROWS_AS(AlignmentModel::load((dir / "ragged.txt").string()), ParseError);
  CHECK_THROWS_AS(AlignmentModel::load((dir / "missing.txt").string()), MissingFileError);
}

TEST_CASE("randomized alignment properties", "[alignment]") {
  std::mt19937 rng(20240831);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_int_distribution<int> dim_dist(1, 8);
  std::uniform_int_distribution<int> count_dist(1, 5);

  for (int trial = 0; trial < 100; ++trial) {
    const int dim = dim_dist(rng);
    const int words = count_dist(rng);
    const int regions = count_dist(rng);

    std::unordered_map<std::string, std::vector<double>> table;
    std::vector<std::string> sentence;
    for (int w = 0; w < words; ++w) {
      std::vector<double> vec(dim);
      for (double& v : vec) v = value(rng);
      std::string token = "w" + std::to_string(w);
      table[token] = std::move(vec);
      sentence.push_back(token);
    }
    std::vector<double> extra_vec(dim);
    for (double& v : extra_vec) v = value(rng);
    table["extra"] = extra_vec;
    AlignmentModel model = make_model(table);

    RegionSet region_set{"img", {}};
    for (int r = 0; r < regions; ++r) {
      std::vector<double> vec(dim);
      for (double& v : vec) v = value(rng);
      region_set.region_vectors.push_back(std::move(vec));
    }

    const double base = align_score(sentence, region_set, model);

    // Word order and multiplicity never matter.
    std::vector<std::string> shuffled = sentence;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.push_back(sentence[0]);
    CHECK(align_score(shuffled, region_set, model) == base);

    // Adding a word never lowers the score.
    std::vector<std::string> extended = sentence;
    extended.push_back("extra");
    CHECK(align_score(extended, region_set, model) >= base);

    // A region orthogonal to every word vector contributes nothing: embed
    // everything in dim+1 dimensions where words have a zero last
    // coordinate and the new region lives on that axis alone.
    std::unordered_map<std::string, std::vector<double>> lifted;
    for (const auto& [token, vec] : table) {
      std::vector<double> v = vec;
      v.push_back(0.0);
      lifted[token] = std::move(v);
    }
    AlignmentModel lifted_model = make_model(lifted);
    RegionSet lifted_regions{"img", {}};
    for (const auto& vec : region_set.region_vectors) {
      std::vector<double> v = vec;
      v.push_back(0.0);
      lifted_regions.region_vectors.push_back(std::move(v));
    }
    const double lifted_base = align_score(sentence, lifted_regions, lifted_model);
    std::vector<double> orthogonal(dim + 1, 0.0);
    orthogonal.back() = value(rng);
    lifted_regions.region_vectors.push_back(orthogonal);
    CHECK(align_score(sentence, lifted_regions, lifted_model) == lifted_base);

    // Scaling regions by a positive power of two scales the score exactly
    // and keeps the best sentence best.
    const double scale = 4.0;
    RegionSet scaled{"img", {}};
    for (const auto& vec : region_set.region_vectors) {
      std::vector<double> v = vec;
      for (double& x : v) x *= scale;
      scaled.region_vectors.push_back(std::move(v));
    }
    CHECK(align_score(sentence, scaled, model) == scale * base);
    std::vector<std::string> rival{"extra"};
    bool base_order = align_score(sentence, region_set, model) >=
                      align_score(rival, region_set, model);
    bool scaled_order =
        align_score(sentence, scaled, model) >= align_score(rival, scaled, model);
    CHECK(base_order == scaled_order);
  }
}
