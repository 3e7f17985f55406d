// Anaphora resolution over the referential memory: reflexives, pronouns and
// null subjects, with phase-scoped locality and a non-redundancy check.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pmg/engine.hpp"
#include "pmg/features.hpp"
#include "pmg/lexicon.hpp"
#include "pmg/memory.hpp"

namespace pmg {

enum class Topicality { RequireTopic, ExcludeLocalTopic, Any };

struct ResolutionCue {
  Constraints phi;  // pers, num, gen, anim only
  Topicality topicality = Topicality::Any;
  SearchDomain domain = SearchDomain::AccessibleScopes;
};

/// Policy for each anaphor kind; `phi` is filtered down to phi attributes.
/// Throws std::invalid_argument for Anaphor::None.
ResolutionCue cue_for(Anaphor kind, const Constraints& phi);

Constraints phi_of(const Constraints& attributes);

enum class ReferentialMode { Trie, Lifo };

std::string_view to_string(ReferentialMode m);
std::optional<ReferentialMode> referential_mode_from(std::string_view s);

enum class BindingStatus { Resolved, Unresolved, Ambiguous };

std::string_view to_string(BindingStatus s);

struct Resolution {
  BindingStatus status = BindingStatus::Unresolved;
  std::optional<std::string> antecedent;
  std::vector<std::string> matches;
};

struct Coindexation {
  int sentence = 0;
  int step = 0;
  Anaphor kind = Anaphor::None;
  std::string anaphor;  // occurrence id, surface@sentence
  std::optional<std::string> antecedent;
  std::vector<std::string> chain;  // antecedent first, ending at a referential record
  BindingStatus status = BindingStatus::Unresolved;
  std::vector<std::string> candidates;

  /// Final referent of the chain, if any.
  std::optional<std::string> referent() const;
  std::string str() const;
};

struct RedundancyWarning {
  int sentence = 0;
  int step = 0;
  std::string record;
  std::string existing;

  std::string str() const;
};

struct CoindexTable {
  std::vector<Coindexation> entries;
  std::vector<RedundancyWarning> warnings;

  const Coindexation* find(const std::string& anaphor) const;
  std::string str() const;
};

/// One discourse: a referential store that persists across sentences.
class BindingSession {
 public:
  explicit BindingSession(const Lexicon& lex, ReferentialMode mode = ReferentialMode::Trie);

  int open_sentence_scope();
  int open_scope(int parent) { return store_.open_scope(parent); }

  /// Stores a referential record in `scope`, running the non-redundancy check
  /// first. Returns the record id.
  std::string register_referent(const std::string& surface, const Constraints& attributes,
                                const std::optional<std::string>& position, int scope, int sentence, int step = 0);

  Resolution resolve(Anaphor kind, const Constraints& phi, int scope);

  std::optional<RedundancyWarning> nonredundancy_check(const ReferentRecord& rec, int scope) const;

  /// Records `anaphor` as bound to `antecedent` (for chains and exclusion).
  void link(const std::string& anaphor, const std::string& antecedent) { links_[anaphor] = antecedent; }
  std::vector<std::string> chain_of(const std::string& id) const;

  /// Walks the derivation of sentence number `sentence` (1-based): registers
  /// referents, resolves anaphors at their merge steps, then promotes the
  /// sentence's scopes to the global scope.
  void bind_derivation(const DerivationState& state, int sentence);

  const CoindexTable& table() const { return table_; }
  ReferentStore& store() { return store_; }
  const ReferentStore& store() const { return store_; }

 private:
  std::string fresh_id(const std::string& surface, int sentence);
  std::set<std::string> local_topic_chain(int scope) const;
  FeaturePath record_path(const Constraints& attributes, const std::optional<std::string>& position,
                          bool defaults = true) const;

  const Lexicon& lex_;
  ReferentialMode mode_;
  ReferentStore store_;
  std::map<std::string, std::string> links_;
  std::map<std::string, int> used_ids_;
  CoindexTable table_;
};

struct DiscourseResult {
  std::vector<ParseResult> parses;
  CoindexTable table;
  std::optional<std::size_t> failed_sentence;  // 0-based; processing stops there
  std::string store_dump;
};

DiscourseResult process_discourse(const Lexicon& lex, const std::vector<std::vector<std::string>>& sentences,
                                  Backend backend, ReferentialMode mode = ReferentialMode::Trie,
                                  const DriverOptions& opts = {});

}  // namespace pmg
