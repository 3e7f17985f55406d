#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "pmg/lexicon.hpp"

using namespace pmg;
using pmg::testing::expect_term;
using pmg::testing::fixture;

namespace {

const char* kHeader =
    "category phase-edge C selects S\n"
    "category phase-edge D selects N\n"
    "category functional S selects T\n"
    "category functional T selects V\n"
    "category lexical N\n"
    "category lexical V\n";

std::vector<std::string> phons(const Lexicon& lex, const std::vector<std::size_t>& ids) {
  std::vector<std::string> out;
  for (auto i : ids) out.push_back(lex.entries[i].covert ? "<" + lex.entries[i].sem + ">" : lex.entries[i].phon);
  return out;
}

}  // namespace

TEST_CASE("fixture grammar loads cleanly") {
  auto r = load_lexicon(PMG_FIXTURE);
  REQUIRE(r.lexicon);
  CHECK(r.error_count() == 0);
  CHECK(r.diagnostics.empty());
  const auto& lex = *r.lexicon;

  CHECK(lex.categories.size() == 7);
  for (auto n : {"C", "F", "D"}) CHECK(lex.category(n)->cls == CategoryClass::PhaseEdge);
  for (auto n : {"S", "T"}) CHECK(lex.category(n)->cls == CategoryClass::Functional);
  for (auto n : {"N", "V"}) CHECK(lex.category(n)->cls == CategoryClass::Lexical);
  CHECK(*lex.category("F")->select == "S");
  CHECK(lex.roots == std::vector<std::string>{"C", "F", "D"});

  // The ten original entries with gianni/mario on separate lines (11), plus
  // lo, the second lava, saluta, pro and the silent complementizer.
  CHECK(lex.entries.size() == 16);
}

TEST_CASE("empty and comment-only sources") {
  auto r = parse_lexicon("");
  REQUIRE(r.lexicon);
  CHECK(r.lexicon->entries.empty());
  CHECK(r.lexicon->categories.empty());

  r = parse_lexicon("# nothing here\r\n\r\n");
  REQUIRE(r.lexicon);
  CHECK(r.lexicon->entries.empty());
}

TEST_CASE("diagnostics carry line numbers") {
  auto r = parse_lexicon(std::string(kHeader) + "item \"x\" : =D Q\n");
  CHECK_FALSE(r.lexicon);
  REQUIRE(r.error_count() == 2);
  for (const auto& d : r.diagnostics) CHECK(d.line == 7);

  r = parse_lexicon("category lexical N\ncategory lexical N\n");
  REQUIRE(r.error_count() == 1);
  CHECK(r.diagnostics[0].line == 2);
  CHECK(r.diagnostics[0].message.find("duplicate") != std::string::npos);

  r = parse_lexicon(std::string(kHeader) + "item \"a\" : D pers: N\n");
  REQUIRE(r.error_count() == 1);
  CHECK(r.diagnostics[0].message.find("malformed attribute") != std::string::npos);

  r = parse_lexicon(std::string(kHeader) + "item \"a\" : D pers:1 pers:2\n");
  CHECK(r.error_count() == 1);

  r = parse_lexicon(std::string(kHeader) + "item \"a\" : X\n");
  REQUIRE(r.error_count() == 1);
  CHECK(r.diagnostics[0].message.find("unknown category") != std::string::npos);

  r = parse_lexicon("category functional S\n");
  CHECK(r.error_count() == 1);

  r = parse_lexicon("category functional S selects Q\n");
  CHECK(r.error_count() == 1);

  r = parse_lexicon(std::string(kHeader) + "roots N\n");
  CHECK(r.error_count() == 1);

  r = parse_lexicon(std::string(kHeader) + "item \"\" : D\n");
  CHECK(r.error_count() == 1);
}

TEST_CASE("unused categories are warnings") {
  auto r = parse_lexicon("category lexical N\ncategory lexical V\nitem \"x\" : N\n");
  REQUIRE(r.lexicon);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].severity == Severity::Warning);
  CHECK(r.diagnostics[0].line == 2);
}

TEST_CASE("parsing is total on garbage") {
  std::mt19937 rng(11);
  const std::string alphabet = "itemcategoryrootsorder \"():=,#\r\nDSCNV-+acxyz123";
  for (int i = 0; i < 3000; ++i) {
    std::string text(kHeader);
    const auto n = rng() % 80;
    for (std::size_t k = 0; k < n; ++k) text += alphabet[rng() % alphabet.size()];
    CHECK_NOTHROW(parse_lexicon(text));
  }
}

TEST_CASE("candidates_for") {
  const auto& lex = fixture();
  CHECK(phons(lex, candidates_for(lex, expect_term("F"))) == std::vector<std::string>{"cosa"});
  CHECK(phons(lex, candidates_for(lex, expect_term("C"))) == std::vector<std::string>{"che", "poi", "<decl>"});
  CHECK(candidates_for(lex, expect_term("V", {{"pers", "9"}})).empty());
  CHECK(candidates_for(lex, expect_term("T", {{"pers", "9"}})).empty());

  // Every candidate satisfies the merge precondition.
  for (const auto& [name, cat] : lex.categories) {
    for (auto i : candidates_for(lex, expect_term(name)))
      CHECK(split_consumed_unexpected(lex.entries[i], expect_term(name), lex.categories));
  }
}

TEST_CASE("lookup_by_phon") {
  const auto& lex = fixture();
  CHECK(lookup_by_phon(lex, "che").size() == 1);
  CHECK(lookup_by_phon(lex, "CHE").size() == 1);
  auto m = lookup_by_phon(lex, "mangi");
  REQUIRE(m.size() == 1);
  auto sel = lex.entries[m[0]].select_features();
  REQUIRE(sel.size() == 2);
  CHECK(format_term(sel[0]) == "=D:case:nom");
  CHECK(format_term(sel[1]) == "=D:case:acc");
  CHECK(lookup_by_phon(lex, "xyzzy").empty());
  CHECK(lookup_by_phon(lex, "io").empty());  // covert
  CHECK(lookup_by_phon(lex, "lava").size() == 2);
}

TEST_CASE("find_entry resolves references") {
  const auto& lex = fixture();
  auto a = find_entry(lex, "lava");
  auto b = find_entry(lex, "lava/2");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(*a != *b);
  CHECK(find_entry(lex, "decl"));
  CHECK_FALSE(find_entry(lex, "lava/3"));
  CHECK_FALSE(find_entry(lex, "nope"));
}

TEST_CASE("serialize round-trips") {
  const auto& lex = fixture();
  const auto text = serialize(lex);
  auto r = parse_lexicon(text);
  REQUIRE(r.lexicon);
  CHECK(*r.lexicon == lex);
  CHECK(serialize(*r.lexicon) == text);

  auto custom = parse_lexicon(
      "order position category number person gender animacy case\n"
      "category phase-edge D selects N\ncategory lexical N\nroots D\n"
      "item \"x\" : (D) num:pl anim N sem:ex proclitic\n");
  REQUIRE(custom.lexicon);
  auto again = parse_lexicon(serialize(*custom.lexicon));
  REQUIRE(again.lexicon);
  CHECK(*again.lexicon == *custom.lexicon);
}
