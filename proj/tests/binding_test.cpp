#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "fixture.hpp"
#include "pmg/binding.hpp"

using namespace pmg;
using pmg::testing::fixture;

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

DiscourseResult run(std::vector<std::string> sentences, ReferentialMode mode = ReferentialMode::Trie) {
  std::vector<std::vector<std::string>> tokens;
  for (const auto& s : sentences) tokens.push_back(words(s));
  return process_discourse(fixture(), tokens, Backend::Trie, mode);
}

struct Referent {
  std::string gen, num;
  bool topic = false;
  bool local = false;
};

// Expected outcome, computed from the raw attributes rather than from paths.
Resolution oracle(Anaphor kind, const std::string& gen, const std::string& num, const std::vector<Referent>& refs) {
  std::vector<std::string> hits;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    if (r.gen != gen || r.num != num) continue;
    if (kind == Anaphor::Reflexive && !(r.local && r.topic)) continue;
    if (kind == Anaphor::Pronoun && r.local && r.topic) continue;
    if (kind == Anaphor::NullSubject && !r.topic) continue;
    hits.push_back("r" + std::to_string(i) + "@1");
  }
  Resolution out;
  if (hits.size() == 1) {
    out.status = BindingStatus::Resolved;
    out.antecedent = hits[0];
  } else if (hits.size() > 1) {
    out.status = BindingStatus::Ambiguous;
  }
  out.matches = hits;
  return out;
}

}  // namespace

TEST_CASE("resolution cues per anaphor kind") {
  const Constraints phi{{"pers", "3"}, {"case", "acc"}, {"gen", "m"}, {"reflex", "+"}};
  auto c = cue_for(Anaphor::Reflexive, phi);
  CHECK(c.topicality == Topicality::RequireTopic);
  CHECK(c.domain == SearchDomain::LocalScope);
  CHECK(c.phi == Constraints{{"pers", "3"}, {"gen", "m"}});
  c = cue_for(Anaphor::Pronoun, phi);
  CHECK(c.topicality == Topicality::ExcludeLocalTopic);
  CHECK(c.domain == SearchDomain::AccessibleScopes);
  c = cue_for(Anaphor::NullSubject, phi);
  CHECK(c.topicality == Topicality::RequireTopic);
  CHECK(c.domain == SearchDomain::AccessibleScopes);
  CHECK_THROWS_AS(cue_for(Anaphor::None, phi), std::invalid_argument);
}

TEST_CASE("reflexive discourse binds through the null subject") {
  auto r = run({"gianni saluta mario", "poi si lava"});
  REQUIRE_FALSE(r.failed_sentence);
  const auto* pro = r.table.find("pro@2");
  REQUIRE(pro);
  CHECK(pro->kind == Anaphor::NullSubject);
  CHECK(pro->antecedent == "gianni@1");
  const auto* si = r.table.find("si@2");
  REQUIRE(si);
  CHECK(si->antecedent == "pro@2");
  CHECK(si->chain == std::vector<std::string>{"pro@2", "gianni@1"});
  CHECK(si->referent() == "gianni@1");
  CHECK(r.table.entries.size() == 2);
  CHECK(r.table.warnings.empty());
}

TEST_CASE("pronoun discourse avoids the local topic chain") {
  auto r = run({"gianni saluta mario", "poi lo lava"});
  REQUIRE_FALSE(r.failed_sentence);
  CHECK(r.table.find("pro@2")->antecedent == "gianni@1");
  const auto* lo = r.table.find("lo@2");
  REQUIRE(lo);
  CHECK(lo->kind == Anaphor::Pronoun);
  CHECK(lo->antecedent == "mario@1");
  CHECK(lo->status == BindingStatus::Resolved);
}

TEST_CASE("LIFO referential mode picks the most recent referent") {
  auto r = run({"gianni saluta mario", "poi si lava"}, ReferentialMode::Lifo);
  CHECK(r.table.find("pro@2")->antecedent == "mario@1");
  CHECK(r.table.find("si@2")->referent() == "mario@1");
}

TEST_CASE("tables, warnings and failures") {
  auto r = run({"gianni saluta mario"});
  CHECK(r.table.entries.empty());
  CHECK(r.table.warnings.empty());
  CHECK(r.table.str().empty());

  // Re-inserting an accessible referent with the same path.
  r = run({"gianni saluta mario", "gianni lava mario"});
  REQUIRE(r.table.warnings.size() >= 1);
  CHECK(r.table.warnings[0].record == "gianni@2");
  CHECK(r.table.warnings[0].existing == "gianni@1");

  r = run({"gianni saluta mario", "che pensi", "poi si lava"});
  REQUIRE(r.failed_sentence);
  CHECK(*r.failed_sentence == 1);
  CHECK(r.parses.size() == 2);
  CHECK(r.table.entries.empty());

  auto line = run({"gianni saluta mario", "poi lo lava"}).table.entries.back().str();
  CHECK(line == "sentence=2 position=11 kind=pronoun anaphor=lo@2 antecedent=mario@1 chain=mario@1 status=resolved");
}

TEST_CASE("non-redundancy respects scope accessibility") {
  BindingSession s(fixture());
  const int clause = s.open_sentence_scope();
  const int left = s.open_scope(clause);
  const int right = s.open_scope(clause);
  const Constraints gianni{{"gen", "m"}, {"anim", std::nullopt}};
  s.register_referent("gianni", gianni, "S", left, 1);
  CHECK(s.table().warnings.empty());
  s.register_referent("gianni", gianni, "S", right, 1);
  CHECK(s.table().warnings.empty());
  s.register_referent("gianni", gianni, "S", clause, 1);
  CHECK(s.table().warnings.empty());
  const auto id = s.register_referent("gianni", gianni, "S", left, 1);
  REQUIRE(s.table().warnings.size() == 1);
  CHECK(s.table().warnings[0].record == id);
}

TEST_CASE("nothing compatible means unresolved") {
  BindingSession s(fixture());
  const int clause = s.open_sentence_scope();
  s.register_referent("gianni", {{"gen", "m"}}, "S", clause, 1);
  for (auto kind : {Anaphor::Reflexive, Anaphor::Pronoun, Anaphor::NullSubject}) {
    auto r = s.resolve(kind, {{"gen", "fem"}}, clause);
    CHECK(r.status == BindingStatus::Unresolved);
    CHECK_FALSE(r.antecedent);
  }
}

TEST_CASE("two and three referent discourses match the brute-force oracle") {
  const std::vector<std::string> gens{"m", "fem"}, nums{"sg", "pl"};
  std::vector<Referent> choices;
  for (const auto& g : gens)
    for (const auto& n : nums)
      for (bool topic : {false, true})
        for (bool local : {false, true}) choices.push_back({g, n, topic, local});

  std::size_t checked = 0;
  auto check_config = [&](const std::vector<Referent>& refs) {
    for (bool reversed : {false, true}) {
      BindingSession s(fixture());
      const int clause = s.open_sentence_scope();
      const int local = s.open_scope(clause);
      std::vector<std::size_t> order(refs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      if (reversed) std::reverse(order.begin(), order.end());
      for (auto i : order) {
        const auto& r = refs[i];
        s.register_referent("r" + std::to_string(i), {{"gen", r.gen}, {"num", r.num}},
                            r.topic ? std::optional<std::string>("S") : std::nullopt, r.local ? local : clause, 1);
      }
      for (auto kind : {Anaphor::Reflexive, Anaphor::Pronoun, Anaphor::NullSubject}) {
        for (const auto& g : gens) {
          for (const auto& n : nums) {
            const auto want = oracle(kind, g, n, refs);
            const auto got = s.resolve(kind, {{"gen", g}, {"num", n}, {"pers", "3"}}, local);
            CHECK(got.status == want.status);
            CHECK(got.antecedent == want.antecedent);
            auto m = got.matches;
            std::sort(m.begin(), m.end());
            CHECK(m == want.matches);
            if (kind == Anaphor::Reflexive && got.antecedent) {
              CHECK(s.store().find(*got.antecedent)->scope == local);
            }
            ++checked;
          }
        }
      }
    }
  };

  for (const auto& a : choices)
    for (const auto& b : choices) {
      check_config({a, b});
      for (const auto& c : choices) check_config({a, b, c});
    }
  CHECK(checked == (16 * 16 + 16 * 16 * 16) * 2 * 3 * 4);
}
