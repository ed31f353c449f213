#include "zson/embedding.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "zson/errors.hpp"
#include "zson/rng.hpp"
#include "zson/serialize.hpp"
#include "zson/version.hpp"

namespace zson {

using nlohmann::json;

EncoderParams EncoderParams::create(const ConceptVocabulary& vocab, int dim,
                                    uint64_t seed, double noise_sigma) {
  if (dim < 1) throw ConfigError("encoder: dim must be >= 1");
  if (noise_sigma < 0.0) throw ConfigError("encoder: noise_sigma must be >= 0");
  vocab.validate();
  EncoderParams p;
  p.dim = dim;
  p.seed = seed;
  p.noise_sigma = noise_sigma;
  p.vocab = vocab;
  p.projection.resize(size_t(vocab.size()) * size_t(dim));
  Rng rng(stream_seed(seed, 0));
  const double scale = 1.0 / std::sqrt(double(dim));  // row norms ~ 1
  for (auto& x : p.projection) x = float(rng.normal() * scale);
  return p;
}

uint64_t EncoderParams::hash() const {
  uint64_t h = fnv1a64(&dim, sizeof(dim));
  h = fnv1a64(&seed, sizeof(seed), h);
  h = fnv1a64(&noise_sigma, sizeof(noise_sigma), h);
  uint64_t vh = vocab.hash();
  h = fnv1a64(&vh, sizeof(vh), h);
  return fnv1a64(projection.data(), projection.size() * sizeof(float), h);
}

namespace {

// shared by both encoders so aligned inputs follow one arithmetic path
SemanticGoal normalize(std::vector<float> v) {
  double sq = 0.0;
  for (float x : v) sq += double(x) * double(x);
  if (sq == 0.0) throw ZsonError("encoder: zero vector cannot be normalized");
  double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = float(double(x) * inv);
  return SemanticGoal{std::move(v)};
}

}  // namespace

SemanticGoal encode_image_view(const ConceptBag& bag, const EncoderParams& p,
                               uint64_t noise_seed) {
  if (bag.empty()) throw ZsonError("encoder: empty concept bag");
  std::vector<float> v(size_t(p.dim), 0.0f);
  // iterate the vocabulary, not the bag, so summation order is pinned
  for (int ci = 0; ci < p.vocab.size(); ++ci) {
    int count = bag.count(p.vocab.name_at(ci));
    if (count <= 0) continue;
    float wgt = count == 1 ? 1.0f : float(std::log2(1.0 + double(count)));
    const float* row = p.row(ci);
    for (int j = 0; j < p.dim; ++j) v[size_t(j)] += wgt * row[j];
  }
  for (const auto& [name, count] : bag.counts) {
    if (p.vocab.index_of(name) < 0)
      throw ZsonError("encoder: unknown concept '" + name + "'");
    (void)count;
  }
  if (p.noise_sigma > 0.0) {
    Rng rng(noise_seed);
    for (int j = 0; j < p.dim; ++j)
      v[size_t(j)] += float(rng.normal(0.0, p.noise_sigma));
  }
  return normalize(std::move(v));
}

SemanticGoal encode_text(const std::vector<std::string>& concepts,
                         const EncoderParams& p) {
  if (concepts.empty()) throw ZsonError("encoder: empty concept set");
  std::set<int> indices;
  for (const auto& name : concepts) {
    int ci = p.vocab.index_of(name);
    if (ci < 0) throw ZsonError("encoder: unknown concept '" + name + "'");
    indices.insert(ci);
  }
  std::vector<float> v(size_t(p.dim), 0.0f);
  for (int ci : indices) {
    const float* row = p.row(ci);
    float wgt = 1.0f;  // matches a singleton view's weight bit-for-bit
    for (int j = 0; j < p.dim; ++j) v[size_t(j)] += wgt * row[j];
  }
  return normalize(std::move(v));
}

double cosine_similarity(const SemanticGoal& a, const SemanticGoal& b) {
  if (a.dim() != b.dim())
    throw ZsonError("cosine: dimension mismatch " + std::to_string(a.dim()) +
                    " vs " + std::to_string(b.dim()));
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    acc += double(a.v[size_t(i)]) * double(b.v[size_t(i)]);
  return std::max(-1.0, std::min(1.0, acc));
}

std::string encoder_to_json(const EncoderParams& p) {
  json j;
  j["v"] = kSchemaVersion;
  j["dim"] = p.dim;
  j["seed"] = p.seed;
  j["noise_sigma"] = p.noise_sigma;
  j["vocab"] = {{"object_concepts", p.vocab.object_concepts},
                {"room_concepts", p.vocab.room_concepts}};
  j["projection"] = floats_to_base64(p.projection);
  return j.dump(2) + "\n";
}

EncoderParams encoder_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ZsonError(std::string("encoder json: parse error: ") + e.what());
  }
  try {
    if (!j.contains("v") || j["v"].get<int>() != kSchemaVersion)
      throw ZsonError("encoder json: missing or unsupported schema version");
    EncoderParams p;
    p.dim = j.at("dim").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    p.noise_sigma = j.at("noise_sigma").get<double>();
    p.vocab.object_concepts =
        j.at("vocab").at("object_concepts").get<std::vector<std::string>>();
    p.vocab.room_concepts =
        j.at("vocab").at("room_concepts").get<std::vector<std::string>>();
    p.vocab.validate();
    p.projection = base64_to_floats(j.at("projection").get<std::string>());
    if (p.projection.size() != size_t(p.vocab.size()) * size_t(p.dim))
      throw ZsonError("encoder json: projection size does not match vocab x dim");
    return p;
  } catch (const json::exception& e) {
    throw ZsonError(std::string("encoder json: ") + e.what());
  }
}

void save_encoder(const EncoderParams& p, const std::string& path) {
  write_text_file(path, encoder_to_json(p));
}

EncoderParams load_encoder(const std::string& path) {
  try {
    return encoder_from_json(read_text_file(path));
  } catch (const ZsonError& e) {
    throw ZsonError(path + ": " + e.what());
  }
}

}  // namespace zson
