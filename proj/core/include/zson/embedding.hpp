#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zson/vocab.hpp"

namespace zson {

// Unit-norm goal vector; the one currency shared by goal views and goal text.
struct SemanticGoal {
  std::vector<float> v;

  int dim() const { return int(v.size()); }
  bool operator==(const SemanticGoal& o) const { return v == o.v; }
};

// Frozen projection shared by both encoders. One row per vocabulary concept,
// drawn once from a seeded Gaussian; using the same rows for views and text
// is what makes the two encodings of a lone concept bit-identical.
struct EncoderParams {
  int dim = 64;
  uint64_t seed = 0;
  double noise_sigma = 0.1;
  ConceptVocabulary vocab;
  std::vector<float> projection;  // |vocab| x dim, row-major

  static EncoderParams create(const ConceptVocabulary& vocab, int dim,
                              uint64_t seed, double noise_sigma);
  const float* row(int concept_index) const {
    return projection.data() + size_t(concept_index) * dim;
  }
  uint64_t hash() const;  // stable over header + matrix bytes
};

// v = sum_c w(count_c) * row(c), optional Gaussian noise, L2-normalized.
// Weights are log2(1 + count): a count of one contributes its row with weight
// exactly 1.0, which keeps singleton views bit-identical to their text
// encoding while still damping repeated objects. Noise is skipped entirely
// when noise_sigma is 0 so the noise-free path stays bitwise aligned.
SemanticGoal encode_image_view(const ConceptBag& bag, const EncoderParams& p,
                               uint64_t noise_seed);

// L2-normalized sum of the concept rows; duplicate names collapse, order is
// irrelevant. Throws ZsonError naming any unknown concept.
SemanticGoal encode_text(const std::vector<std::string>& concepts,
                         const EncoderParams& p);

double cosine_similarity(const SemanticGoal& a, const SemanticGoal& b);

void save_encoder(const EncoderParams& p, const std::string& path);
EncoderParams load_encoder(const std::string& path);
std::string encoder_to_json(const EncoderParams& p);
EncoderParams encoder_from_json(const std::string& text);

}  // namespace zson
