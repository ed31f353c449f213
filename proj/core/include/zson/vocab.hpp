#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace zson {

// Fixed, ordered concept inventory. Object concepts come first, then room
// concepts; embedding projection rows follow this unified order, so the
// ordering is part of every persisted artifact.
struct ConceptVocabulary {
  std::vector<std::string> object_concepts;
  std::vector<std::string> room_concepts;

  int size() const {
    return int(object_concepts.size() + room_concepts.size());
  }
  int n_objects() const { return int(object_concepts.size()); }
  int n_rooms() const { return int(room_concepts.size()); }

  // unified index (objects, then rooms); -1 when unknown
  int index_of(const std::string& name) const;
  int object_index(const std::string& name) const;  // -1 when not an object
  int room_index(const std::string& name) const;    // -1 when not a room
  const std::string& name_at(int index) const;

  uint64_t hash() const;  // over the ordered names

  // throws ConfigError on duplicates or empty names
  void validate() const;

  static ConceptVocabulary defaults();
};

// Multiset of concepts seen in one view. std::map keeps iteration order
// deterministic for hashing and debugging; encoders iterate the vocabulary,
// not the bag.
struct ConceptBag {
  std::map<std::string, int> counts;

  bool empty() const { return counts.empty(); }
  void add(const std::string& name, int n = 1) { counts[name] += n; }
  int count(const std::string& name) const {
    auto it = counts.find(name);
    return it == counts.end() ? 0 : it->second;
  }
  bool operator==(const ConceptBag& other) const {
    return counts == other.counts;
  }
};

}  // namespace zson
