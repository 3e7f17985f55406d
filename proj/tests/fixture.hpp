#pragma once

#include <stdexcept>
#include <string>

#include "pmg/lexicon.hpp"

namespace pmg::testing {

inline const Lexicon& fixture() {
  static const Lexicon lex = [] {
    auto r = load_lexicon(PMG_FIXTURE);
    if (!r.lexicon) throw std::runtime_error("fixture grammar failed to load");
    return *r.lexicon;
  }();
  return lex;
}

inline const LexicalEntry& entry(const std::string& ref) {
  auto i = find_entry(fixture(), ref);
  if (!i) throw std::runtime_error("no fixture entry " + ref);
  return fixture().entries[*i];
}

inline FeatureTerm expect_term(std::string category, Constraints c = {}) {
  return FeatureTerm{TermKind::CategoryFeature, std::move(category), std::move(c), false};
}

}  // namespace pmg::testing
