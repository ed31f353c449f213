#include "zson/vocab.hpp"

#include <set>

#include "zson/errors.hpp"
#include "zson/serialize.hpp"

namespace zson {

int ConceptVocabulary::index_of(const std::string& name) const {
  for (size_t i = 0; i < object_concepts.size(); ++i)
    if (object_concepts[i] == name) return int(i);
  for (size_t i = 0; i < room_concepts.size(); ++i)
    if (room_concepts[i] == name) return int(object_concepts.size() + i);
  return -1;
}

int ConceptVocabulary::object_index(const std::string& name) const {
  for (size_t i = 0; i < object_concepts.size(); ++i)
    if (object_concepts[i] == name) return int(i);
  return -1;
}

int ConceptVocabulary::room_index(const std::string& name) const {
  for (size_t i = 0; i < room_concepts.size(); ++i)
    if (room_concepts[i] == name) return int(i);
  return -1;
}

const std::string& ConceptVocabulary::name_at(int index) const {
  if (index < int(object_concepts.size())) return object_concepts[size_t(index)];
  return room_concepts[size_t(index) - object_concepts.size()];
}

uint64_t ConceptVocabulary::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& n : object_concepts) {
    h = fnv1a64(n.data(), n.size(), h);
    h = fnv1a64("|", 1, h);
  }
  h = fnv1a64("//", 2, h);
  for (const auto& n : room_concepts) {
    h = fnv1a64(n.data(), n.size(), h);
    h = fnv1a64("|", 1, h);
  }
  return h;
}

void ConceptVocabulary::validate() const {
  std::set<std::string> seen;
  for (const auto& list : {object_concepts, room_concepts}) {
    for (const auto& n : list) {
      if (n.empty()) throw ConfigError("vocabulary: empty concept name");
      if (!seen.insert(n).second)
        throw ConfigError("vocabulary: duplicate concept '" + n + "'");
    }
  }
}

ConceptVocabulary ConceptVocabulary::defaults() {
  ConceptVocabulary v;
  v.object_concepts = {"sink",  "stove", "fridge", "bed",    "wardrobe",
                       "sofa",  "tv",    "table",  "chair",  "toilet",
                       "bathtub", "plant"};
  v.room_concepts = {"kitchen", "bathroom", "bedroom", "living_room",
                     "hallway"};
  return v;
}

}  // namespace zson
