#include <algorithm>
#include <random>

#include "doctest.h"
#include "pmg/memory.hpp"

using namespace pmg;

namespace {

const FeatureOrder kOrder;

FeaturePath path(std::optional<std::string> position, Constraints attrs, bool defaults = true) {
  return path_of("D", attrs, position, kOrder, {defaults});
}

MemoryItem moved(std::string id, FeaturePath p) {
  MemoryItem m;
  m.id = id;
  m.sem = id;
  for (const auto& l : p.labels())
    if (l.cls != LabelClass::Position) m.marks.insert(l.text);
  m.path = std::move(p);
  return m;
}

Cue cue(Constraints attrs, PositionPolicy policy = PositionPolicy::Skippable, std::string position = {}) {
  return Cue{"D", std::move(attrs), policy, std::move(position)};
}

ReferentRecord referent(std::string id, FeaturePath p) {
  ReferentRecord r;
  r.id = id;
  r.surface = id;
  r.topic = p.has_position();
  r.path = std::move(p);
  return r;
}

// Independent of the trie: |p| minus the longest shared prefix with any stored path.
std::size_t brute_force_cost(const std::vector<FeaturePath>& stored, const FeaturePath& p) {
  std::size_t best = 0;
  for (const auto& s : stored) best = std::max(best, shared_prefix_length(s, p));
  return p.size() - best;
}

const auto kVoi = path("S", {{"pers", "2"}, {"num", "pl"}});
const auto kTu = path("S", {{"pers", "2"}, {"num", "sg"}});
const auto kIo = path("S", {{"pers", "1"}, {"num", "sg"}});

}  // namespace

TEST_CASE("similarity paths") {
  CHECK(kVoi.str() == "S·D·2p·pl");
  CHECK(kTu.str() == "S·D·2p·sg");
  CHECK(kIo.str() == "S·D·1p·sg");
}

TEST_CASE("insertion cost counts new nodes") {
  FeatureTrie empty;
  CHECK(empty.insertion_cost(kTu) == 4);

  FeatureTrie t1;
  t1.insert(kVoi, "voi");
  CHECK(t1.insertion_cost(kTu) == 1);
  CHECK(t1.insert(kTu, "tu") == 1);

  FeatureTrie t2;
  t2.insert(kTu, "tu");
  CHECK(t2.insertion_cost(kIo) == 2);

  // Oracle agreement and cost + shared = |p| over random tries.
  std::mt19937 rng(3);
  const std::vector<std::string> pers{"1", "2", "3"}, num{"sg", "pl"}, gen{"m", "f"};
  const std::vector<std::optional<std::string>> pos{std::nullopt, "S", "F"};
  for (int round = 0; round < 300; ++round) {
    FeatureTrie t;
    std::vector<FeaturePath> stored;
    for (int i = 0; i < 6; ++i) {
      auto p = path(pos[rng() % 3], {{"pers", pers[rng() % 3]}, {"num", num[rng() % 2]}, {"gen", gen[rng() % 2]}});
      CHECK(t.insertion_cost(p) == brute_force_cost(stored, p));
      CHECK(t.insertion_cost(p) + t.shared_prefix(p) == p.size());
      CHECK(t.insert(p, "x" + std::to_string(i)) == brute_force_cost(stored, p));
      stored.push_back(p);
    }
  }
}

TEST_CASE("confusability") {
  CHECK(confusability(kTu, kVoi) == Ratio{3, 4});
  CHECK(confusability(kTu, kIo) == Ratio{2, 4});
  CHECK(confusability(kTu, kVoi) > confusability(kTu, kIo));
  CHECK(confusability(kTu, kTu) == Ratio{1, 1});
  CHECK(confusability(kTu, kIo) == confusability(kIo, kTu));
  CHECK(confusability(kTu, kVoi).value() == doctest::Approx(0.75));
}

TEST_CASE("store_moved reports cost by backend") {
  MovementStore trie(Backend::Trie);
  CHECK(trie.store_moved(moved("voi", kVoi)) == 4);
  CHECK(trie.store_moved(moved("tu", kTu)) == 1);
  CHECK(trie.store_moved(moved("io", kIo)) == 2);

  MovementStore lifo(Backend::Lifo);
  lifo.store_moved(moved("voi", kVoi));
  CHECK(lifo.store_moved(moved("tu", kTu)) == 4);
  CHECK(lifo.snapshot() == std::vector<std::string>{"voi", "tu"});

  CHECK_THROWS_AS(trie.store_moved(moved("tu", kTu)), MemoryError);
  CHECK_THROWS_AS(lifo.store_moved(moved("tu", kTu)), MemoryError);
  MemoryItem bare = moved("bare", kTu);
  bare.marks.clear();
  CHECK_THROWS_AS(trie.store_moved(bare), MemoryError);
}

TEST_CASE("retrieve_for_remerge resolves by unique path") {
  for (auto backend : {Backend::Trie, Backend::Lifo}) {
    CAPTURE(to_string(backend));
    MovementStore m(backend);
    m.store_moved(moved("cosa", path("F", {{"gen", "fem"}})));
    m.store_moved(moved("tu", path("S", {{"pers", "2"}, {"case", "nom"}})));
    auto r = m.retrieve_for_remerge(cue({{"pers", "2"}}));
    REQUIRE(r.status == RetrievalStatus::Found);
    CHECK(r.item->id == "tu");
    m.discharge("tu");
    CHECK(m.snapshot() == std::vector<std::string>{"cosa"});

    m.store_moved(moved("io", path("S", {{"pers", "1"}, {"case", "nom"}})));
    r = m.retrieve_for_remerge(cue({{"pers", "1"}, {"case", "nom"}}));
    REQUIRE(r.status == RetrievalStatus::Found);
    CHECK(r.item->id == "io");
    m.discharge("io");

    r = m.retrieve_for_remerge(cue({{"case", "acc"}}));
    REQUIRE(r.status == RetrievalStatus::Found);
    CHECK(r.item->id == "cosa");
    CHECK_FALSE(m.is_discharged());
    m.discharge("cosa");
    CHECK(m.is_discharged());
    CHECK(m.retrieve_for_remerge(cue({})).status == RetrievalStatus::None);
  }
}

TEST_CASE("label-identical paths are indistinguishable") {
  MovementStore m(Backend::Trie);
  const auto same = path(std::nullopt, {{"gen", "f"}});
  m.store_moved(moved("cosa", same));
  m.store_moved(moved("casa", same));
  auto r = m.retrieve_for_remerge(cue({{"gen", "f"}, {"num", "sg"}}));
  CHECK(r.status == RetrievalStatus::Ambiguous);
  CHECK(r.matches.size() == 2);

  // The LIFO buffer never reports ambiguity: it takes the most recent.
  MovementStore lifo(Backend::Lifo);
  lifo.store_moved(moved("cosa", same));
  lifo.store_moved(moved("casa", same));
  CHECK(lifo.retrieve_for_remerge(cue({{"gen", "f"}})).item->id == "casa");
}

TEST_CASE("discharge") {
  MovementStore m(Backend::Trie);
  CHECK(m.is_discharged());
  m.store_moved(moved("tu", kTu));
  CHECK_FALSE(m.is_discharged());
  CHECK_THROWS_AS(m.discharge("nobody"), MemoryError);
  m.discharge("tu");
  CHECK(m.is_discharged());
  CHECK_THROWS_AS(m.discharge("tu"), MemoryError);
  // Nodes are retained after discharge.
  CHECK(m.dump().find("sg [tu count=0]") != std::string::npos);

  MovementStore lifo(Backend::Lifo);
  lifo.store_moved(moved("tu", kTu));
  lifo.discharge("tu");
  CHECK(lifo.is_discharged());
  CHECK_THROWS_AS(lifo.discharge("tu"), MemoryError);
  CHECK_THROWS_AS(lifo.discharge("nobody"), MemoryError);
}

TEST_CASE("store then retrieve by full path") {
  std::mt19937 rng(5);
  const std::vector<std::string> pers{"1", "2", "3"}, num{"sg", "pl"};
  for (int i = 0; i < 200; ++i) {
    MovementStore m(Backend::Trie);
    Constraints attrs{{"pers", pers[rng() % 3]}, {"num", num[rng() % 2]}};
    m.store_moved(moved("x", path("S", attrs)));
    auto r = m.retrieve_for_remerge(cue(attrs, PositionPolicy::Exactly, "S"));
    REQUIRE(r.status == RetrievalStatus::Found);
    CHECK(r.item->id == "x");
  }
}

TEST_CASE("trie match agrees with brute-force filtering and ignores insertion order") {
  std::mt19937 rng(17);
  const std::vector<std::string> pers{"1", "2", "3"}, num{"sg", "pl"}, gen{"m", "f"};
  const std::vector<std::optional<std::string>> pos{std::nullopt, "S", "F"};
  const std::vector<PositionPolicy> policies{PositionPolicy::Skippable, PositionPolicy::Required,
                                             PositionPolicy::Forbidden, PositionPolicy::Exactly};
  for (int round = 0; round < 500; ++round) {
    std::vector<FeaturePath> paths;
    const auto n = 1 + rng() % 6;
    while (paths.size() < n) {
      auto p = path(pos[rng() % 3], {{"pers", pers[rng() % 3]}, {"num", num[rng() % 2]}, {"gen", gen[rng() % 2]}});
      if (std::find(paths.begin(), paths.end(), p) == paths.end()) paths.push_back(p);
    }
    std::vector<Cue> cues;
    for (int k = 0; k < 6; ++k) {
      Constraints c;
      if (rng() % 2) c.emplace("pers", pers[rng() % 3]);
      if (rng() % 2) c.emplace("num", num[rng() % 2]);
      if (rng() % 2) c.emplace("gen", gen[rng() % 2]);
      cues.push_back(cue(c, policies[rng() % 4], rng() % 2 ? "S" : "F"));
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<std::vector<std::string>> reference;
    for (int perm = 0; perm < 24; ++perm) {
      FeatureTrie trie;
      for (auto i : order) trie.insert(paths[i], "p" + std::to_string(i));
      std::vector<std::vector<std::string>> results;
      for (const auto& c : cues) {
        auto ids = trie.match(c);
        std::sort(ids.begin(), ids.end());
        std::vector<std::string> brute;
        for (std::size_t i = 0; i < n; ++i)
          if (path_matches(paths[i], c)) brute.push_back("p" + std::to_string(i));
        CHECK(ids == brute);
        results.push_back(ids);
      }
      if (perm == 0) reference = results;
      CHECK(results == reference);
      std::shuffle(order.begin(), order.end(), rng);
    }
  }
}

TEST_CASE("referent retrieval by topicality") {
  ReferentStore store;
  const int clause = store.open_scope(store.global_scope());
  const auto gianni = path("S", {{"gen", "m"}, {"anim", std::nullopt}});
  const auto mario = path(std::nullopt, {{"gen", "m"}, {"anim", std::nullopt}});
  CHECK(gianni.str() == "S·D·3p·sg·m·anim");
  CHECK(mario.str() == "D·3p·sg·m·anim");

  ReferentCue any;
  CHECK(store.retrieve_referent(any, clause).status == RetrievalStatus::None);

  store.store_referent(referent("gianni", gianni), clause);
  store.store_referent(referent("mario", mario), clause);
  CHECK(store.find("gianni")->topic);
  CHECK_FALSE(store.find("mario")->topic);
  CHECK_THROWS_AS(store.store_referent(referent("mario", mario), clause), MemoryError);
  CHECK_THROWS_AS(store.store_referent(referent("x", mario), 99), MemoryError);

  Constraints phi{{"pers", "3"}, {"num", "sg"}, {"gen", "m"}, {"anim", std::nullopt}};
  ReferentCue topic{cue(phi, PositionPolicy::Required)};
  auto r = store.retrieve_referent(topic, clause);
  REQUIRE(r.status == RetrievalStatus::Found);
  CHECK(r.record->id == "gianni");
  CHECK(store.find("gianni")->retrieval_count == 1);

  ReferentCue non_topic{cue(phi, PositionPolicy::Forbidden)};
  r = store.retrieve_referent(non_topic, clause);
  REQUIRE(r.status == RetrievalStatus::Found);
  CHECK(r.record->id == "mario");

  // Persistence: retrieval changes only the counter.
  r = store.retrieve_referent(topic, clause);
  CHECK(r.record->id == "gianni");
  CHECK(store.find("gianni")->retrieval_count == 2);

  CHECK(store.retrieve_referent(ReferentCue{cue(phi)}, clause).status == RetrievalStatus::Ambiguous);

  // The LIFO scan ignores topicality and returns the most recent match.
  r = store.retrieve_referent_lifo(topic, clause);
  CHECK(r.record->id == "mario");
}

TEST_CASE("scope accessibility is ancestors plus global") {
  ReferentStore store;
  const int g = store.global_scope();
  const int a = store.open_scope(g);
  const int a1 = store.open_scope(a);
  const int b = store.open_scope(g);
  store.store_referent(referent("inner", path(std::nullopt, {})), a1);
  store.store_referent(referent("outer", path("S", {})), a);
  store.store_referent(referent("global", path("F", {})), g);

  CHECK(store.accessible_scopes(a1) == std::vector<int>{a1, a, g});
  auto ids = [&](int from) {
    auto r = store.retrieve_referent(ReferentCue{cue({})}, from);
    auto m = r.matches;
    std::sort(m.begin(), m.end());
    return m;
  };
  CHECK(ids(a1) == std::vector<std::string>{"global", "inner", "outer"});
  CHECK(ids(a) == std::vector<std::string>{"global", "outer"});
  CHECK(ids(b) == std::vector<std::string>{"global"});
  CHECK(ids(g) == std::vector<std::string>{"global"});

  ReferentCue local{cue({}), SearchDomain::LocalScope};
  CHECK(store.retrieve_referent(local, a1).record->id == "inner");

  store.promote_to_global(a1);
  CHECK(ids(b) == std::vector<std::string>{"global", "inner"});
  CHECK(store.find("inner")->scope == g);
}

TEST_CASE("dump of the trie fragment") {
  ReferentStore store;
  auto raw = [](std::vector<PathLabel> ls) { return FeaturePath(std::move(ls), kOrder); };
  const PathLabel S{LabelClass::Position, "S"}, F{LabelClass::Position, "F"}, D{LabelClass::Category, "D"};
  CHECK(store.dump() == "scope 0 global\n(root)\n");

  store.store_referent(referent("you", raw({S})), 0);
  store.store_referent(referent("cosa", raw({F, D})), 0);
  store.store_referent(referent("io", raw({S, D, {LabelClass::Person, "1p"}})), 0);
  store.store_referent(referent("tu", raw({S, D, {LabelClass::Person, "2p"}})), 0);
  store.store_referent(referent("gianni", raw({S, D})), 0);
  store.store_referent(referent("mario", raw({D})), 0);

  const std::string expected =
      "scope 0 global\n"
      "(root)\n"
      "  D [mario count=0]\n"
      "  F\n"
      "    D [cosa topic count=0]\n"
      "  S [you topic count=0]\n"
      "    D [gianni topic count=0]\n"
      "      1p [io topic count=0]\n"
      "      2p [tu topic count=0]\n";
  CHECK(store.dump() == expected);
  CHECK(store.dump() == store.dump());
}
