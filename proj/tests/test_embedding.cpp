// Goal-embedding tests: image/text alignment, noise behavior, cosine
// geometry, and the encoder JSON round trip.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "zson/embedding.hpp"
#include "zson/errors.hpp"
#include "zson/rng.hpp"

using namespace zson;

namespace {

EncoderParams default_encoder(double sigma = 0.0) {
  return EncoderParams::create(ConceptVocabulary::defaults(), 64, 5, sigma);
}

// independent dot product at long-double precision
long double slow_dot(const std::vector<float>& a, const std::vector<float>& b) {
  long double s = 0;
  for (size_t i = 0; i < a.size(); ++i)
    s += (long double)a[i] * (long double)b[i];
  return s;
}

}  // namespace

TEST_CASE("singleton image view equals text encoding bitwise") {
  EncoderParams p = default_encoder(0.0);
  for (const auto& name : p.vocab.object_concepts) {
    ConceptBag bag;
    bag.add(name);
    SemanticGoal img = encode_image_view(bag, p, 123);
    SemanticGoal txt = encode_text({name}, p);
    CHECK(img == txt);  // exact vector equality, not approximate
  }
  for (const auto& name : p.vocab.room_concepts) {
    ConceptBag bag;
    bag.add(name);
    CHECK(encode_image_view(bag, p, 9) == encode_text({name}, p));
  }
}

TEST_CASE("multi-concept bags with unit counts also match text") {
  EncoderParams p = default_encoder(0.0);
  ConceptBag bag;
  bag.add("sink");
  bag.add("kitchen");
  CHECK(encode_image_view(bag, p, 0) ==
        encode_text({"sink", "kitchen"}, p));
}

TEST_CASE("all encodings are unit norm") {
  EncoderParams p = default_encoder(0.25);
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    ConceptBag bag;
    int n = 1 + rng.uniform_int(4);
    for (int i = 0; i < n; ++i) {
      int idx = rng.uniform_int(p.vocab.size());
      bag.add(p.vocab.name_at(idx), 1 + rng.uniform_int(3));
    }
    SemanticGoal g = encode_image_view(bag, p, rng.next_u64());
    double norm = std::sqrt((double)slow_dot(g.v, g.v));
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("empty bag and unknown concept are rejected") {
  EncoderParams p = default_encoder(0.0);
  ConceptBag empty;
  CHECK_THROWS_AS(encode_image_view(empty, p, 1), ZsonError);
  CHECK_THROWS_AS(encode_text({}, p), ZsonError);
  CHECK_THROWS_WITH_AS(encode_text({"jacuzzi"}, p),
                       doctest::Contains("jacuzzi"), ZsonError);
}

TEST_CASE("text encoding is order independent") {
  EncoderParams p = default_encoder(0.0);
  CHECK(encode_text({"sink", "stove"}, p) == encode_text({"stove", "sink"}, p));
}

TEST_CASE("distinct rooms pull compound embeddings apart") {
  EncoderParams p = default_encoder(0.0);
  ConceptBag kitchen, bathroom;
  kitchen.add("sink");
  kitchen.add("kitchen");
  bathroom.add("sink");
  bathroom.add("bathroom");
  SemanticGoal a = encode_image_view(kitchen, p, 0);
  SemanticGoal b = encode_image_view(bathroom, p, 0);
  double cs = cosine_similarity(a, b);
  CHECK(cs < 1.0);
  // cross-check against an independent long-double dot product
  CHECK(cs == doctest::Approx((double)slow_dot(a.v, b.v)).epsilon(1e-6));
}

TEST_CASE("related goals are closer than unrelated ones") {
  EncoderParams p = default_encoder(0.0);
  SemanticGoal sink = encode_text({"sink"}, p);
  double near = cosine_similarity(sink, encode_text({"sink", "kitchen"}, p));
  double far = cosine_similarity(sink, encode_text({"bed", "bedroom"}, p));
  CHECK(near > far);
}

TEST_CASE("cosine of a vector with itself and its negation") {
  EncoderParams p = default_encoder(0.0);
  SemanticGoal s = encode_text({"bed"}, p);
  CHECK(cosine_similarity(s, s) == doctest::Approx(1.0).epsilon(1e-9));
  SemanticGoal neg = s;
  for (auto& x : neg.v) x = -x;
  CHECK(cosine_similarity(s, neg) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("noise contracts cosine to the clean embedding monotonically") {
  ConceptVocabulary vocab = ConceptVocabulary::defaults();
  ConceptBag bag;
  bag.add("sofa");
  bag.add("living_room");
  double sigmas[4] = {0.0, 0.1, 0.5, 1.0};
  double means[4];
  for (int si = 0; si < 4; ++si) {
    EncoderParams p = EncoderParams::create(vocab, 64, 5, sigmas[si]);
    EncoderParams clean = EncoderParams::create(vocab, 64, 5, 0.0);
    SemanticGoal ref = encode_image_view(bag, clean, 0);
    double acc = 0.0;
    for (uint64_t k = 0; k < 1000; ++k)
      acc += cosine_similarity(encode_image_view(bag, p, 1000 + k), ref);
    means[si] = acc / 1000.0;
  }
  CHECK(means[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(means[0] > means[1]);
  CHECK(means[1] > means[2]);
  CHECK(means[2] > means[3]);
}

TEST_CASE("noise is reproducible from its seed") {
  EncoderParams p = default_encoder(0.3);
  ConceptBag bag;
  bag.add("sink", 2);
  CHECK(encode_image_view(bag, p, 77) == encode_image_view(bag, p, 77));
  CHECK_FALSE(encode_image_view(bag, p, 77) == encode_image_view(bag, p, 78));
}

TEST_CASE("projection is a pure function of seed, vocab, and dim") {
  ConceptVocabulary vocab = ConceptVocabulary::defaults();
  EncoderParams a = EncoderParams::create(vocab, 32, 9, 0.1);
  EncoderParams b = EncoderParams::create(vocab, 32, 9, 0.1);
  CHECK(a.projection == b.projection);
  CHECK(a.hash() == b.hash());
  EncoderParams c = EncoderParams::create(vocab, 32, 10, 0.1);
  CHECK_FALSE(a.projection == c.projection);
}

TEST_CASE("encoder JSON round trip reproduces vectors bitwise") {
  EncoderParams p = default_encoder(0.1);
  std::string text = encoder_to_json(p);
  EncoderParams back = encoder_from_json(text);
  CHECK(back.projection == p.projection);
  CHECK(back.hash() == p.hash());
  ConceptBag bag;
  bag.add("table", 3);
  bag.add("kitchen");
  CHECK(encode_image_view(bag, back, 5) == encode_image_view(bag, p, 5));
  CHECK(encode_text({"table"}, back) == encode_text({"table"}, p));
}

TEST_CASE("encoder file round trip via disk") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "zson_enc_test.json";
  EncoderParams p = default_encoder(0.2);
  save_encoder(p, path.string());
  EncoderParams back = load_encoder(path.string());
  CHECK(back.projection == p.projection);
  CHECK(back.vocab.object_concepts == p.vocab.object_concepts);
  CHECK(back.vocab.room_concepts == p.vocab.room_concepts);
  CHECK(back.noise_sigma == p.noise_sigma);
  fs::remove(path);
}

TEST_CASE("corrupted encoder JSON is rejected") {
  EncoderParams p = default_encoder(0.0);
  std::string text = encoder_to_json(p);
  CHECK_THROWS_AS(encoder_from_json(text.substr(0, text.size() / 2)),
                  ZsonError);
  CHECK_THROWS_AS(encoder_from_json("{\"v\":999}"), ZsonError);
}

TEST_CASE("repeated objects contribute boundedly") {
  EncoderParams p = default_encoder(0.0);
  ConceptBag one, many;
  one.add("chair", 1);
  many.add("chair", 100);
  // both are unit vectors along the same ray
  CHECK(cosine_similarity(encode_image_view(one, p, 0),
                          encode_image_view(many, p, 0)) ==
        doctest::Approx(1.0).epsilon(1e-6));
}
