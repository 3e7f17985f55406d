// Lexicon file format, validation and entry lookup.
//
//   # comment
//   order position category person number gender animacy case
//   category phase-edge C selects S
//   category lexical N
//   roots C F D
//   item "cosa" : F D gen:fem N
//   item "io"   : (S) D pers:1 case:nom N covert
//   item "mangi": T pers:1 V =D:case:nom =D:case:acc
//
// Capitalized tokens are categories, lower-case tokens are attributes of the
// category feature before them. Trailing keywords: covert, proclitic,
// binds:<reflexive|pronoun|null-subject>, sem:<id>.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmg/features.hpp"

namespace pmg {

struct Lexicon {
  CategoryTable categories;
  std::vector<std::string> declaration_order;
  std::vector<LexicalEntry> entries;
  std::vector<std::string> roots;
  FeatureOrder order;

  bool operator==(const Lexicon&) const = default;

  const Category* category(std::string_view name) const;
  bool is_phase_edge(std::string_view name) const;
};

enum class Severity { Error, Warning };

struct LexiconDiagnostic {
  Severity severity = Severity::Error;
  int line = 0;
  std::string message;
};

struct LexiconResult {
  std::optional<Lexicon> lexicon;  // set iff no error diagnostics
  std::vector<LexiconDiagnostic> diagnostics;

  std::size_t error_count() const;
};

/// Total: malformed input yields diagnostics, never an exception.
LexiconResult parse_lexicon(std::string_view text);

/// Reads a file and parses it. A missing file is reported as a line-0 error.
LexiconResult load_lexicon(const std::string& path);

/// Canonical text: one declaration per line, entries in load order.
std::string serialize(const Lexicon& lex);

/// Entries whose edge (with optional-skip) unifies with `expected`, in
/// declaration order.
std::vector<std::size_t> candidates_for(const Lexicon& lex, const FeatureTerm& expected);

/// Overt entries whose phon equals `form` after ASCII case-folding.
std::vector<std::size_t> lookup_by_phon(const Lexicon& lex, std::string_view form);

/// Resolves "phon" or "phon/k" (k-th entry with that phon, 1-based).
std::optional<std::size_t> find_entry(const Lexicon& lex, std::string_view ref);

std::string fold_case(std::string_view s);

}  // namespace pmg
