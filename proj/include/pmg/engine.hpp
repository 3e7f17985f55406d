// Top-down, left-to-right derivation driver: Merge, Expect, Move and remerge
// from memory, with generation, parsing and exhaustive enumeration on top.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmg/features.hpp"
#include "pmg/lexicon.hpp"
#include "pmg/memory.hpp"

namespace pmg {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op { Init, Merge, Expect, Move, MergeFromMemory, PostulateCovert };

std::string_view to_string(Op op);

enum class Reason { PendingExpectations, UndischargedMemory, NoParse, AmbiguousRemerge, StepBudgetExceeded };

std::string_view to_string(Reason r);

struct Verdict {
  bool grammatical = false;
  std::vector<Reason> reasons;  // every failed condition; empty iff grammatical

  std::optional<Reason> reason() const;
  bool has(Reason r) const;
  std::string str() const;
};

/// A pending select feature (`=x`, not yet expanded) or an expectation node
/// waiting to be lexicalized.
struct Expectation {
  FeatureTerm term;
  bool expanded = false;
  int node = -1;       // expectation node, or the parent node of a select
  int host_leaf = -1;  // overt leaf of the selecting head
  bool root = false;
  std::string source;

  std::string str() const;
};

struct PhraseNode {
  std::string label;
  std::string text;  // leaves only
  int parent = -1;
  std::vector<int> children;
  bool leaf = false;
};

struct Leaf {
  std::string phon;
  bool proclitic = false;
  int host = -1;
};

/// Structured facts about a step, used by binding and by the test oracles.
struct StepDetail {
  std::optional<std::size_t> entry;   // merged, postulated or (resolved) remerged entry
  std::string item;                   // memory item id
  std::optional<std::string> position;  // position label consumed at merge
  Constraints attributes;             // item attributes after the step
  std::vector<int> scopes;            // open scope chain, outermost first
  std::optional<FeatureTerm> edge;    // expectation targeted by the step
  std::string cue;                    // remerge cue
  std::string path;                   // memory path of the item
  std::vector<std::size_t> covert_group;
};

struct DerivationStep {
  int index = 0;
  Op op = Op::Init;
  std::string payload;
  std::vector<std::string> pending;  // next to be processed first
  std::vector<std::string> memory;
  StepDetail detail;
};

using DerivationTrace = std::vector<DerivationStep>;

struct OpenScope {
  int id = 0;
  std::size_t marker = 0;  // closes once pending shrinks back to this size
};

struct DerivationState {
  explicit DerivationState(Backend backend) : memory(backend) {}

  std::vector<PhraseNode> tree;
  std::vector<Expectation> pending;  // back = edge
  MovementStore memory;
  std::vector<OpenScope> scopes;
  std::vector<Leaf> leaves;
  std::vector<std::string> input;
  std::size_t cursor = 0;
  int next_scope = 0;
  int next_item = 0;
  std::optional<MemoryItem> queued_move;
  std::map<std::string, std::size_t> item_entry;                 // item id -> entry
  std::map<std::string, std::vector<std::size_t>> item_group;    // postulated item id -> candidates
  std::map<std::string, int> item_leaf;                          // item id -> first-merge leaf node
  DerivationTrace trace;
  std::optional<Reason> failure;

  const Expectation* edge() const { return pending.empty() ? nullptr : &pending.back(); }
  bool at_choice_point() const;
  std::vector<int> scope_chain() const;
};

// Operations ---------------------------------------------------------------

/// Throws EngineError unless `root` is one of the lexicon's roots.
DerivationState init_derivation(const Lexicon& lex, const std::string& root, Backend backend);

/// Lexicalizes the edge expectation with `entry`. A nonempty unexpected
/// remainder is queued for the following move. Throws EngineError when the
/// entry does not unify with the edge.
void merge(const Lexicon& lex, DerivationState& s, std::size_t entry);

/// Like merge, with a covert item whose phi features stay open until remerge.
/// `group` lists the covert entries it may turn out to be.
void postulate_covert(const Lexicon& lex, DerivationState& s, const std::vector<std::size_t>& group);

/// Expands the pending select at the edge into an expectation node.
void expect(DerivationState& s);

/// Stores the queued unexpected remainder in memory.
void move(DerivationState& s);

/// Cue for memory retrieval at the edge expectation.
Cue remerge_cue(const DerivationState& s);

/// Remerges the memory item selected by the edge cue. Returns false (and sets
/// s.failure) on an ambiguous retrieval or when no item matches.
bool remerge(const Lexicon& lex, DerivationState& s);

/// Runs Move and Expect until a choice point (an expanded edge), the end of
/// the derivation, or a failure.
void advance(DerivationState& s);

Verdict verdict(const DerivationState& s);

/// Overt leaves in merge order, proclitics placed before their host.
std::vector<std::string> overt_yield(const DerivationState& s);

std::string tree_string(const DerivationState& s);

// Drivers ------------------------------------------------------------------

struct DriverOptions {
  std::size_t step_budget = 1000;            // total steps explored by a parse
  std::optional<std::size_t> max_steps;      // per-derivation length bound
};

struct GenerateResult {
  DerivationState state;
  Verdict verdict;
  std::vector<std::string> surface;
  std::string root;
};

/// Follows `choices` (entry references, see find_entry). At every edge the
/// priority is remerge, then the next choice; selects are expanded as they
/// surface. Throws EngineError on an empty or unresolvable choice list.
GenerateResult generate(const Lexicon& lex, const std::vector<std::string>& choices, Backend backend,
                        const DriverOptions& opts = {});

struct RootAttempt {
  std::string root;
  bool accepted = false;
  std::size_t steps = 0;
  std::size_t backtracks = 0;
};

struct ParseResult {
  std::optional<DerivationState> state;  // winning derivation
  Verdict verdict;
  std::vector<RootAttempt> attempts;
  std::vector<std::string> tokens;  // after proclitic reordering
};

/// Moves each proclitic token after the token that follows it, so tokens
/// arrive in merge order.
std::vector<std::string> reorder_proclitics(const Lexicon& lex, const std::vector<std::string>& tokens);

ParseResult parse(const Lexicon& lex, const std::vector<std::string>& tokens, Backend backend,
                  const DriverOptions& opts = {});

struct EnumeratedDerivation {
  DerivationState state;
  Verdict verdict;
};

/// Depth-first over every merge choice (covert entries included) with at most
/// `max_steps` steps per derivation. Visits every halted derivation.
void for_each_derivation(const Lexicon& lex, std::size_t max_steps, Backend backend,
                         const std::function<void(const EnumeratedDerivation&)>& visit);

/// Surfaces of the grammatical derivations found by for_each_derivation;
/// empty yields are dropped.
std::set<std::vector<std::string>> enumerate(const Lexicon& lex, std::size_t max_steps, Backend backend);

/// Re-runs the first `upto` steps of `trace` (all by default) from scratch.
DerivationState replay(const Lexicon& lex, const DerivationTrace& trace, Backend backend,
                       std::optional<std::size_t> upto = std::nullopt);

// Serialization ------------------------------------------------------------

std::string trace_text(const DerivationTrace& trace);
/// One JSON object per line: index, op, payload, pending, memory.
std::string trace_structured(const DerivationTrace& trace);

}  // namespace pmg
