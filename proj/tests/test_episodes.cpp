// Episode sampling and persistence tests: tier geometry, heading fan-out,
// start-distance filters, and the JSONL round trip.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "zson/episodes.hpp"
#include "zson/errors.hpp"
#include "zson/worldgen.hpp"

using namespace zson;

namespace {

EncoderParams test_encoder(double sigma = 0.0) {
  return EncoderParams::create(ConceptVocabulary::defaults(), 32, 5, sigma);
}

GridWorld big_world(uint64_t seed = 3) {
  WorldGenParams p;
  p.width = 32;
  p.height = 32;  // 8 m square: all three tiers realizable
  return generate_world(seed, p);
}

}  // namespace

TEST_CASE("tier ranges are the documented intervals") {
  CHECK(tier_range(Tier::EASY) == std::pair<double, double>{1.5, 3.0});
  CHECK(tier_range(Tier::MEDIUM) == std::pair<double, double>{3.0, 5.0});
  CHECK(tier_range(Tier::HARD) == std::pair<double, double>{5.0, 10.0});
  CHECK(in_tier(Tier::EASY, 1.5));
  CHECK_FALSE(in_tier(Tier::EASY, 3.0));
  CHECK(in_tier(Tier::MEDIUM, 3.0));
  CHECK(in_tier(Tier::HARD, 10.0));  // upper bound inclusive
  CHECK_FALSE(in_tier(Tier::HARD, 10.0001));
}

TEST_CASE("imagenav sampling fans out 4 headings per goal") {
  GridWorld w = big_world();
  EncoderParams enc = test_encoder();
  EpisodeDataset ds = sample_imagenav_episodes(w, 3, enc, 9);
  CHECK(ds.size() == 36);  // 3 tiers x 3 goals x 4 headings

  std::map<std::string, std::set<int>> headings_by_pos;
  for (const auto& ep : ds.episodes) {
    REQUIRE(ep.kind == GoalKind::IMAGE);
    REQUIRE(ep.tier.has_value());
    auto [lo, hi] = tier_range(*ep.tier);
    bool in_range = ep.shortest_path >= lo &&
                    (ep.shortest_path < hi ||
                     (*ep.tier == Tier::HARD && ep.shortest_path == hi));
    CHECK(in_range);
    char key[64];
    snprintf(key, sizeof key, "%.3f,%.3f,%d", ep.goal_pose.position.x,
             ep.goal_pose.position.y, ep.start.heading);
    headings_by_pos[key].insert(ep.goal_pose.heading);
  }
  for (const auto& [pos, hs] : headings_by_pos)
    CHECK(hs == std::set<int>{0, 90, 180, 270});
}

TEST_CASE("tier counts are exactly equal") {
  GridWorld w = big_world();
  EpisodeDataset ds = sample_imagenav_episodes(w, 5, test_encoder(), 2);
  std::map<Tier, int> counts;
  for (const auto& ep : ds.episodes) counts[*ep.tier]++;
  CHECK(counts[Tier::EASY] == 20);
  CHECK(counts[Tier::MEDIUM] == 20);
  CHECK(counts[Tier::HARD] == 20);
}

TEST_CASE("imagenav sampling is deterministic in its seed") {
  GridWorld w = big_world();
  EncoderParams enc = test_encoder(0.1);
  EpisodeDataset a = sample_imagenav_episodes(w, 2, enc, 7);
  EpisodeDataset b = sample_imagenav_episodes(w, 2, enc, 7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].id == b.episodes[i].id);
    CHECK(a.episodes[i].goal_embedding == b.episodes[i].goal_embedding);
  }
  EpisodeDataset c = sample_imagenav_episodes(w, 2, enc, 8);
  bool all_same = true;
  for (size_t i = 0; i < a.episodes.size() && i < c.episodes.size(); ++i)
    all_same = all_same && a.episodes[i].start.position.x ==
                               c.episodes[i].start.position.x;
  CHECK_FALSE(all_same);
}

TEST_CASE("unrealizable tier fails loudly naming the tier") {
  GridWorld w = make_corridor_world(10);  // 2.5 m long: MEDIUM impossible
  CHECK_THROWS_WITH_AS(
      sample_imagenav_episodes(w, 1, test_encoder(), 1, {},
                               {Tier::MEDIUM}),
      doctest::Contains("medium"), ZsonError);
}

TEST_CASE("imagenav shortest path matches the geodesic") {
  GridWorld w = big_world(5);
  EpisodeDataset ds = sample_imagenav_episodes(w, 2, test_encoder(), 4);
  for (const auto& ep : ds.episodes) {
    auto d = geodesic_distance(w, ep.start.position, ep.goal_pose.position);
    REQUIRE(d.has_value());
    CHECK(ep.shortest_path == *d);
  }
}

TEST_CASE("objectnav starts are never instantly successful") {
  WorldGenParams p;
  p.width = 32;
  p.height = 32;
  p.per_room_objects = {"sink"};
  GridWorld w = generate_world(6, p);
  EpisodeDataset ds =
      sample_objectnav_episodes(w, 20, {{"sink"}}, test_encoder(), 3);
  CHECK(ds.size() == 20);
  for (const auto& ep : ds.episodes) {
    CHECK(ep.kind == GoalKind::OBJECT);
    CHECK(ep.shortest_path >= 1.5);
    CHECK_FALSE(ep.tier.has_value());
  }
}

TEST_CASE("objectnav shortest path is the minimum over instances") {
  WorldGenParams p;
  p.width = 32;
  p.height = 32;
  p.per_room_objects = {"sink"};  // one sink per room, several rooms
  GridWorld w = generate_world(8, p);
  int n_sinks = 0;
  for (const auto& o : w.objects)
    if (o.object_concept == "sink") ++n_sinks;
  REQUIRE(n_sinks >= 2);

  EpisodeDataset ds =
      sample_objectnav_episodes(w, 10, {{"sink"}}, test_encoder(), 5);
  for (const auto& ep : ds.episodes) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : w.objects) {
      if (o.object_concept != "sink") continue;
      auto d = geodesic_distance(w, ep.start.position, o.position);
      if (d) best = std::min(best, *d);
    }
    CHECK(ep.shortest_path == best);
  }
}

TEST_CASE("compound goals embed the full concept set") {
  WorldGenParams p;
  p.width = 32;
  p.height = 32;
  p.per_room_objects = {"sink"};
  GridWorld w = generate_world(8, p);
  EncoderParams enc = test_encoder();
  std::string room = w.objects.front().room_concept;
  EpisodeDataset ds =
      sample_objectnav_episodes(w, 5, {{"sink", room}}, enc, 2);
  for (const auto& ep : ds.episodes) {
    CHECK(ep.goal_embedding == encode_text({"sink", room}, enc));
    CHECK(ep.goal_concepts.size() == 2);
  }
}

TEST_CASE("missing category is an error naming the category") {
  GridWorld w = make_corridor_world();  // no objects at all
  CHECK_THROWS_WITH_AS(
      sample_objectnav_episodes(w, 1, {{"sink"}}, test_encoder(), 1),
      doctest::Contains("sink"), ZsonError);
}

TEST_CASE("dataset JSONL round trip reproduces embeddings bitwise") {
  namespace fs = std::filesystem;
  GridWorld w = big_world(9);
  EncoderParams enc = test_encoder(0.1);
  EpisodeDataset ds = sample_imagenav_episodes(w, 3, enc, 11);
  fs::path path = fs::temp_directory_path() / "zson_ds_test.jsonl";
  save_dataset(ds, path.string());
  EpisodeDataset back = load_dataset(path.string());
  REQUIRE(back.size() == ds.size());
  for (size_t i = 0; i < ds.episodes.size(); ++i) {
    const Episode& a = ds.episodes[i];
    const Episode& b = back.episodes[i];
    CHECK(a.id == b.id);
    CHECK(a.world_id == b.world_id);
    CHECK(a.kind == b.kind);
    CHECK(a.start.position.x == b.start.position.x);
    CHECK(a.start.heading == b.start.heading);
    CHECK(a.goal_pose.heading == b.goal_pose.heading);
    CHECK(a.tier == b.tier);
    CHECK(a.shortest_path == b.shortest_path);
    CHECK(a.goal_embedding == b.goal_embedding);  // bitwise via base64
  }
  fs::remove(path);
}

TEST_CASE("object episodes round trip their concept sets") {
  namespace fs = std::filesystem;
  WorldGenParams p;
  p.width = 32;
  p.height = 32;
  p.per_room_objects = {"bed"};
  GridWorld w = generate_world(10, p);
  EpisodeDataset ds =
      sample_objectnav_episodes(w, 4, {{"bed", "bedroom"}}, test_encoder(), 3);
  fs::path path = fs::temp_directory_path() / "zson_ds_obj_test.jsonl";
  save_dataset(ds, path.string());
  EpisodeDataset back = load_dataset(path.string());
  REQUIRE(back.size() == ds.size());
  for (size_t i = 0; i < ds.episodes.size(); ++i) {
    CHECK(back.episodes[i].goal_concepts == ds.episodes[i].goal_concepts);
    CHECK(back.episodes[i].goal_embedding == ds.episodes[i].goal_embedding);
  }
  fs::remove(path);
}

TEST_CASE("broken dataset lines report the line number") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "zson_ds_broken.jsonl";
  GridWorld w = big_world(12);
  EpisodeDataset ds = sample_imagenav_episodes(w, 1, test_encoder(), 1);
  save_dataset(ds, path.string());
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"v\":1, truncated\n";
  }
  try {
    load_dataset(path.string());
    FAIL("expected a parse error");
  } catch (const ZsonError& e) {
    std::string msg = e.what();
    CHECK(msg.find(":13:") != std::string::npos);  // 12 episodes + 1 bad line
  }
  fs::remove(path);
}

TEST_CASE("hand-written minimal line parses") {
  // base64 of 2 little-endian f32: 1.0, 0.0
  std::string line =
      "{\"v\":1,\"id\":\"e1\",\"world_id\":\"w1\",\"kind\":\"object\","
      "\"start\":{\"x\":1.0,\"y\":2.0,\"h\":90},"
      "\"goal\":{\"concepts\":[\"sink\"]},\"tier\":null,"
      "\"spl_len\":2.5,\"emb\":\"AACAPwAAAAA=\"}";
  Episode ep = episode_from_jsonl(line);
  CHECK(ep.id == "e1");
  CHECK(ep.kind == GoalKind::OBJECT);
  CHECK(ep.start.heading == 90);
  CHECK(ep.goal_concepts == std::vector<std::string>{"sink"});
  CHECK(ep.shortest_path == 2.5);
  REQUIRE(ep.goal_embedding.dim() == 2);
  CHECK(ep.goal_embedding.v[0] == 1.0f);
  CHECK(ep.goal_embedding.v[1] == 0.0f);
}

TEST_CASE("schema version mismatch names both versions") {
  std::string line =
      "{\"v\":9,\"id\":\"e1\",\"world_id\":\"w1\",\"kind\":\"object\","
      "\"start\":{\"x\":1.0,\"y\":2.0,\"h\":0},"
      "\"goal\":{\"concepts\":[\"sink\"]},\"tier\":null,"
      "\"spl_len\":1.0,\"emb\":\"AACAPw==\"}";
  CHECK_THROWS_WITH_AS(episode_from_jsonl(line), doctest::Contains("v9"),
                       ZsonError);
}

TEST_CASE("concept helpers pick out object and room parts") {
  ConceptVocabulary vocab = ConceptVocabulary::defaults();
  Episode ep;
  ep.id = "e";
  ep.goal_concepts = {"kitchen", "sink"};  // stored sorted
  CHECK(object_concept_of(ep, vocab) == "sink");
  auto room = room_concept_of(ep, vocab);
  REQUIRE(room.has_value());
  CHECK(*room == "kitchen");

  Episode bare;
  bare.id = "b";
  bare.goal_concepts = {"sink"};
  CHECK_FALSE(room_concept_of(bare, vocab).has_value());
  Episode odd;
  odd.id = "o";
  odd.goal_concepts = {"kitchen"};
  CHECK_THROWS_AS(object_concept_of(odd, vocab), ZsonError);
}
