// Memory for non-local dependencies: moved items (LIFO buffer or feature
// trie) and phase-scoped referential storage for binding.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pmg/features.hpp"

namespace pmg {

class MemoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How a cue treats the position label (S, F) that heads some paths.
enum class PositionPolicy {
  Skippable,  // movement cues: position labels are stepped over
  Required,   // any position label must be present (topics)
  Forbidden,  // the path must not carry a position label
  Exactly,    // the position label must equal Cue::position
};

struct Cue {
  std::string category = "D";
  Constraints attributes;
  PositionPolicy policy = PositionPolicy::Skippable;
  std::string position;  // used by Exactly

  /// "D∧2p∧nom"
  std::string str() const;
};

/// Label-by-label compatibility: a class the cue constrains must agree when
/// the path carries it; classes missing on either side are wildcards.
bool path_matches(const FeaturePath& path, const Cue& cue);

/// Shared label tree. Nodes are retained once created; each node may hold
/// item ids (a leaf for those items) and a count of marked items below it.
class FeatureTrie {
 public:
  FeatureTrie();

  /// Inserts `path` for `id`; returns the number of nodes created.
  std::size_t insert(const FeaturePath& path, const std::string& id);
  std::size_t insertion_cost(const FeaturePath& path) const;
  std::size_t shared_prefix(const FeaturePath& path) const;
  void adjust_mark(const FeaturePath& path, int delta);
  /// Drops `id` from its leaf; nodes are retained.
  void remove_id(const FeaturePath& path, const std::string& id);
  std::size_t node_count() const { return nodes_.size(); }

  /// Ids at every node reachable by cue-compatible labels, in dump order.
  std::vector<std::string> match(const Cue& cue) const;

  using LeafFormatter = std::function<std::string(const std::string& id)>;
  std::string dump(const LeafFormatter& leaf) const;

 private:
  struct Node {
    PathLabel label;
    std::map<std::string, std::size_t> children;  // label text -> node index
    std::vector<std::string> ids;
    int marked = 0;
  };
  void match_from(std::size_t node, const Cue& cue, const std::map<LabelClass, std::string>& want,
                  bool seen_position, bool seen_category, std::vector<std::string>& out) const;
  void dump_from(std::size_t node, int depth, const LeafFormatter& leaf, std::string& out) const;

  std::vector<Node> nodes_;
};

struct Ratio {
  std::size_t num = 0;
  std::size_t den = 1;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Ratio& o) const { return num * o.den == o.num * den; }
  bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
  bool operator>(const Ratio& o) const { return o < *this; }
};

/// shared-prefix-length / max(|a|, |b|); 1 when both are empty.
Ratio confusability(const FeaturePath& a, const FeaturePath& b);

// Moved items -------------------------------------------------------------

struct MemoryItem {
  std::string id;
  std::string sem;                 // opaque identifier, never the phon
  std::vector<FeatureTerm> terms;  // the unexpected category features
  FeaturePath path;
  std::set<std::string> marks;  // labels currently marked unexpected
  int retrieval_count = 0;
  bool underspecified = false;  // postulated covert item, phi still open
};

enum class RetrievalStatus { Found, None, Ambiguous };

struct Retrieval {
  RetrievalStatus status = RetrievalStatus::None;
  std::optional<MemoryItem> item;
  std::vector<std::string> matches;
};

enum class Backend { Lifo, Trie };

std::string_view to_string(Backend b);
std::optional<Backend> backend_from(std::string_view s);

class LifoMemory {
 public:
  std::size_t store_moved(MemoryItem item);
  Retrieval retrieve_for_remerge(const Cue& cue) const;
  void discharge(const std::string& id);
  bool is_discharged() const { return items_.empty(); }
  std::vector<const MemoryItem*> marked_items() const;
  std::string dump() const;

 private:
  std::vector<MemoryItem> items_;  // back = most prominent
  std::set<std::string> ever_stored_;
};

class TrieMemory {
 public:
  std::size_t store_moved(MemoryItem item);
  Retrieval retrieve_for_remerge(const Cue& cue) const;
  void discharge(const std::string& id);
  bool is_discharged() const;
  std::vector<const MemoryItem*> marked_items() const;
  std::size_t insertion_cost(const FeaturePath& path) const { return trie_.insertion_cost(path); }
  std::string dump() const;

 private:
  FeatureTrie trie_;
  std::map<std::string, MemoryItem> items_;
};

/// Value-semantic store for moved items with a selectable backend.
class MovementStore {
 public:
  explicit MovementStore(Backend backend = Backend::Trie);

  Backend backend() const;
  /// Throws MemoryError on duplicate id or an item without marks.
  std::size_t store_moved(MemoryItem item);
  Retrieval retrieve_for_remerge(const Cue& cue) const;
  /// Throws MemoryError on unknown or already discharged id.
  void discharge(const std::string& id);
  bool is_discharged() const;
  /// Marked items: insertion order for LIFO (most prominent last), path
  /// order for the trie.
  std::vector<const MemoryItem*> marked_items() const;
  std::vector<std::string> snapshot() const;
  std::string dump() const;

 private:
  std::variant<LifoMemory, TrieMemory> impl_;
};

// Referents ---------------------------------------------------------------

struct ReferentRecord {
  std::string id;
  std::string surface;
  FeaturePath path;
  bool topic = false;
  int scope = 0;
  int sentence = 0;
  int retrieval_count = 0;
};

struct PhaseScope {
  int id = 0;
  std::optional<int> parent;
  bool global = false;
};

enum class SearchDomain { LocalScope, AccessibleScopes };

struct ReferentCue {
  Cue cue;  // category, phi and position policy
  SearchDomain domain = SearchDomain::AccessibleScopes;
  std::set<std::string> excluded;
};

struct ReferentRetrieval {
  RetrievalStatus status = RetrievalStatus::None;
  std::optional<ReferentRecord> record;
  std::vector<std::string> matches;
};

class ReferentStore {
 public:
  ReferentStore();

  int global_scope() const { return 0; }
  int open_scope(int parent);
  const PhaseScope& scope(int id) const;
  /// `from`, its ancestors, and the global scope.
  std::vector<int> accessible_scopes(int from) const;

  /// Throws MemoryError on duplicate id or unknown scope.
  void store_referent(ReferentRecord rec, int scope);
  ReferentRetrieval retrieve_referent(const ReferentCue& cue, int from_scope);
  /// Most recent phi-compatible accessible record, ignoring topicality.
  ReferentRetrieval retrieve_referent_lifo(const ReferentCue& cue, int from_scope);

  /// Moves every record of `scope` into the global scope.
  void promote_to_global(int scope);

  const ReferentRecord* find(const std::string& id) const;
  std::vector<const ReferentRecord*> records_in(const std::vector<int>& scopes) const;
  std::size_t insertion_cost(const FeaturePath& path, int scope) const;
  std::string dump() const;

 private:
  std::vector<int> search_scopes(SearchDomain d, int from) const;

  std::vector<PhaseScope> scopes_;
  std::map<int, FeatureTrie> tries_;
  std::vector<ReferentRecord> records_;  // insertion order
};

}  // namespace pmg
