#include "pmg/engine.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace pmg {

std::string_view to_string(Op op) {
  switch (op) {
    case Op::Init: return "init";
    case Op::Merge: return "merge";
    case Op::Expect: return "expect";
    case Op::Move: return "move";
    case Op::MergeFromMemory: return "merge-from-memory";
    case Op::PostulateCovert: return "postulate-covert";
  }
  return "?";
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::PendingExpectations: return "pending-expectations";
    case Reason::UndischargedMemory: return "undischarged-memory";
    case Reason::NoParse: return "no-parse";
    case Reason::AmbiguousRemerge: return "ambiguous-remerge";
    case Reason::StepBudgetExceeded: return "step-budget-exceeded";
  }
  return "?";
}

std::optional<Reason> Verdict::reason() const {
  if (reasons.empty()) return std::nullopt;
  return reasons.front();
}

bool Verdict::has(Reason r) const { return std::find(reasons.begin(), reasons.end(), r) != reasons.end(); }

std::string Verdict::str() const {
  if (grammatical) return "grammatical";
  std::string out = "ungrammatical(";
  for (std::size_t i = 0; i < reasons.size(); ++i) {
    if (i) out += ",";
    out += to_string(reasons[i]);
  }
  return out + ")";
}

std::string Expectation::str() const {
  FeatureTerm t = term;
  t.kind = TermKind::CategoryFeature;
  t.optional = false;
  return expanded ? "[" + format_term(t) + "]" : "=" + format_term(t);
}

bool DerivationState::at_choice_point() const {
  return !queued_move && !pending.empty() && pending.back().expanded && !failure;
}

std::vector<int> DerivationState::scope_chain() const {
  std::vector<int> out;
  for (const auto& s : scopes) out.push_back(s.id);
  return out;
}

namespace {

int add_node(DerivationState& s, PhraseNode node) {
  const int id = static_cast<int>(s.tree.size());
  if (node.parent >= 0) s.tree[static_cast<std::size_t>(node.parent)].children.push_back(id);
  s.tree.push_back(std::move(node));
  return id;
}

void record(DerivationState& s, Op op, std::string payload, StepDetail detail = {}) {
  DerivationStep step;
  step.index = static_cast<int>(s.trace.size()) + 1;
  step.op = op;
  step.payload = std::move(payload);
  for (auto it = s.pending.rbegin(); it != s.pending.rend(); ++it) step.pending.push_back(it->str());
  step.memory = s.memory.snapshot();
  step.detail = std::move(detail);
  s.trace.push_back(std::move(step));
}

void close_scopes(DerivationState& s) {
  // scopes[0] is global, scopes[1] the root phase; both stay open.
  while (s.scopes.size() > 2 && s.pending.size() <= s.scopes.back().marker) s.scopes.pop_back();
}

Constraints attributes_of(const std::vector<FeatureTerm>& terms) {
  Constraints out;
  for (const auto& t : terms)
    for (const auto& kv : t.constraints) out.insert(kv);
  return out;
}

void merge_entry(const Lexicon& lex, DerivationState& s, const LexicalEntry& e, std::optional<std::size_t> index,
                 const std::vector<std::size_t>& group, bool underspecified, Op op) {
  if (!s.at_choice_point()) throw EngineError("merge requires an expectation at the edge");
  const Expectation exp = s.pending.back();
  auto split = split_consumed_unexpected(e, exp.term, lex.categories);
  if (!split) throw EngineError("'" + e.sem + "' does not unify with " + exp.str());
  s.pending.pop_back();

  StepDetail d;
  d.entry = index;
  d.edge = exp.term;
  d.scopes = s.scope_chain();
  d.covert_group = group;

  const std::string shown = e.covert ? "(" + e.sem + ")" : e.phon;
  const int leaf_node = add_node(s, PhraseNode{"", shown, exp.node, {}, true});
  int overt_leaf = -1;
  if (!e.covert) {
    s.leaves.push_back({e.phon, e.proclitic, exp.host_leaf});
    overt_leaf = static_cast<int>(s.leaves.size()) - 1;
  }

  const bool opens = !exp.root && lex.is_phase_edge(split->consumed.front().category);
  const std::size_t marker = s.pending.size();

  std::vector<FeatureTerm> selects = e.select_features();
  if (const auto* last = lex.category(split->consumed.back().category); last && last->select) {
    const auto* target = lex.category(*last->select);
    if (target && target->cls != CategoryClass::Lexical)
      selects.push_back(FeatureTerm{TermKind::SelectFeature, *last->select, {}, false});
  }
  // A nominative argument of a verb inherits the verb's agreement.
  if (e.has_category("V")) {
    const auto agreement = e.attributes();
    for (auto& sel : selects) {
      auto c = sel.constraints.find("case");
      if (c == sel.constraints.end() || !c->second || *c->second != "nom") continue;
      for (const char* attr : {"pers", "num"}) {
        auto a = agreement.find(attr);
        if (a != agreement.end() && !sel.constraints.count(attr)) sel.constraints.emplace(attr, a->second);
      }
    }
  }
  for (auto it = selects.rbegin(); it != selects.rend(); ++it)
    s.pending.push_back(Expectation{*it, false, exp.node, overt_leaf, false, e.sem});
  if (opens) s.scopes.push_back({s.next_scope++, marker});

  if (!split->unexpected.empty()) d.position = split->consumed.front().category;
  const auto& identity = split->unexpected.empty() ? split->consumed : split->unexpected;
  Constraints all = attributes_of(split->consumed);
  for (const auto& kv : attributes_of(split->unexpected)) all.insert(kv);
  d.attributes = all;
  d.path = path_of(identity.front().category, attributes_of(identity), d.position, lex.order, {!underspecified})
               .str();

  if (!split->unexpected.empty()) {
    MemoryItem item;
    item.id = e.sem + "#" + std::to_string(++s.next_item);
    item.sem = e.sem;
    item.terms = split->unexpected;
    item.path = path_of(split->unexpected.front().category, attributes_of(split->unexpected), d.position,
                        lex.order, {!underspecified});
    for (const auto& l : item.path.labels())
      if (l.cls != LabelClass::Position) item.marks.insert(l.text);
    item.underspecified = underspecified;
    d.item = item.id;
    if (index) s.item_entry[item.id] = *index;
    if (!group.empty()) s.item_group[item.id] = group;
    s.item_leaf[item.id] = leaf_node;
    s.queued_move = std::move(item);
  }

  record(s, op, shown, std::move(d));
  close_scopes(s);
}

bool deterministic_step(DerivationState& s) {
  if (s.failure) return false;
  if (s.queued_move) {
    move(s);
    return true;
  }
  if (!s.pending.empty() && !s.pending.back().expanded) {
    expect(s);
    return true;
  }
  return false;
}

}  // namespace

DerivationState init_derivation(const Lexicon& lex, const std::string& root, Backend backend) {
  if (std::find(lex.roots.begin(), lex.roots.end(), root) == lex.roots.end())
    throw EngineError("'" + root + "' is not a root phase edge of this grammar");
  DerivationState s(backend);
  s.tree.push_back(PhraseNode{root, "", -1, {}, false});
  s.pending.push_back(Expectation{FeatureTerm{TermKind::CategoryFeature, root, {}, false}, true, 0, -1, true, "root"});
  s.scopes = {{0, 0}, {1, 0}};
  s.next_scope = 2;
  StepDetail d;
  d.scopes = s.scope_chain();
  record(s, Op::Init, root, std::move(d));
  return s;
}

void merge(const Lexicon& lex, DerivationState& s, std::size_t entry) {
  if (entry >= lex.entries.size()) throw EngineError("entry index out of range");
  merge_entry(lex, s, lex.entries[entry], entry, {}, false, Op::Merge);
}

void postulate_covert(const Lexicon& lex, DerivationState& s, const std::vector<std::size_t>& group) {
  if (group.empty()) throw EngineError("empty covert group");
  if (group.size() == 1) {
    merge_entry(lex, s, lex.entries[group[0]], group[0], group, false, Op::PostulateCovert);
    return;
  }
  // Keep only the features every candidate agrees on.
  LexicalEntry shared = lex.entries[group[0]];
  shared.anaphor = Anaphor::None;
  std::string sem;
  for (auto g : group) sem += (sem.empty() ? "" : "|") + lex.entries[g].sem;
  shared.sem = sem;
  shared.phon.clear();
  for (std::size_t f = 0; f < shared.features.size(); ++f) {
    Constraints common;
    for (const auto& [attr, value] : shared.features[f].constraints) {
      bool everywhere = std::all_of(group.begin(), group.end(), [&](std::size_t g) {
        const auto& fs = lex.entries[g].features;
        if (f >= fs.size()) return false;
        auto it = fs[f].constraints.find(attr);
        return it != fs[f].constraints.end() && it->second == value;
      });
      if (everywhere) common.emplace(attr, value);
    }
    shared.features[f].constraints = std::move(common);
  }
  merge_entry(lex, s, shared, std::nullopt, group, true, Op::PostulateCovert);
}

void expect(DerivationState& s) {
  if (s.pending.empty() || s.pending.back().expanded) throw EngineError("expect requires a pending select");
  auto& top = s.pending.back();
  top.term.kind = TermKind::CategoryFeature;
  top.node = add_node(s, PhraseNode{top.term.category, "", top.node, {}, false});
  top.expanded = true;
  StepDetail d;
  d.edge = top.term;
  d.scopes = s.scope_chain();
  record(s, Op::Expect, format_term(top.term), std::move(d));
}

void move(DerivationState& s) {
  if (!s.queued_move) throw EngineError("move requires a merged item with unexpected features");
  MemoryItem item = std::move(*s.queued_move);
  s.queued_move.reset();
  StepDetail d;
  d.item = item.id;
  d.path = item.path.str();
  d.scopes = s.scope_chain();
  if (auto it = s.item_entry.find(item.id); it != s.item_entry.end()) d.entry = it->second;
  const std::string sem = item.sem;
  s.memory.store_moved(std::move(item));
  record(s, Op::Move, sem, std::move(d));
}

Cue remerge_cue(const DerivationState& s) {
  if (s.pending.empty()) throw EngineError("no edge expectation");
  const auto& t = s.pending.back().term;
  return Cue{t.category, t.constraints, PositionPolicy::Skippable, {}};
}

bool remerge(const Lexicon& lex, DerivationState& s) {
  if (!s.at_choice_point()) throw EngineError("remerge requires an expectation at the edge");
  const Cue cue = remerge_cue(s);
  auto r = s.memory.retrieve_for_remerge(cue);
  if (r.status == RetrievalStatus::Ambiguous) {
    s.failure = Reason::AmbiguousRemerge;
    return false;
  }
  if (r.status == RetrievalStatus::None) {
    s.failure = Reason::NoParse;
    return false;
  }
  const MemoryItem& item = *r.item;
  const Expectation exp = s.pending.back();

  // The item covers the expectation and the nested chain it selects ([D =N]).
  FeatureTerm probe = exp.term;
  probe.kind = TermKind::CategoryFeature;
  auto first = item.terms.empty() ? std::nullopt : unify_terms(item.terms.front(), probe);
  bool covers = first.has_value();
  for (std::size_t i = 1; covers && i < item.terms.size(); ++i) {
    const auto* prev = lex.category(item.terms[i - 1].category);
    covers = prev && prev->select && *prev->select == item.terms[i].category;
  }
  auto attrs = covers ? unify(attributes_of(item.terms), exp.term.constraints) : std::nullopt;
  if (!attrs) {
    s.failure = Reason::NoParse;
    return false;
  }

  std::optional<std::size_t> resolved;
  if (auto it = s.item_entry.find(item.id); it != s.item_entry.end()) resolved = it->second;
  if (auto g = s.item_group.find(item.id); g != s.item_group.end() && !resolved) {
    std::vector<std::size_t> fits;
    for (auto idx : g->second)
      if (compatible(lex.entries[idx].attributes(), *attrs)) fits.push_back(idx);
    if (fits.empty()) {
      s.failure = Reason::NoParse;
      return false;
    }
    if (fits.size() == 1) {
      resolved = fits.front();
      s.item_entry[item.id] = *resolved;
      s.tree[static_cast<std::size_t>(s.item_leaf.at(item.id))].text = "(" + lex.entries[*resolved].sem + ")";
      *attrs = *unify(*attrs, lex.entries[*resolved].attributes());
    }
  }
  const std::string sem = resolved ? lex.entries[*resolved].sem : item.sem;

  s.memory.discharge(item.id);
  s.pending.pop_back();
  add_node(s, PhraseNode{"", "(" + sem + ")", exp.node, {}, true});

  StepDetail d;
  d.entry = resolved;
  d.item = item.id;
  d.attributes = *attrs;
  d.scopes = s.scope_chain();
  d.edge = exp.term;
  d.cue = cue.str();
  d.path = item.path.str();
  if (auto g = s.item_group.find(item.id); g != s.item_group.end()) d.covert_group = g->second;
  record(s, Op::MergeFromMemory, sem, std::move(d));
  close_scopes(s);
  return true;
}

void advance(DerivationState& s) {
  while (deterministic_step(s)) {
  }
}

Verdict verdict(const DerivationState& s) {
  Verdict v;
  auto add = [&](Reason r) {
    if (!v.has(r)) v.reasons.push_back(r);
  };
  if (s.failure) add(*s.failure);
  if (!s.pending.empty()) add(Reason::PendingExpectations);
  if (!s.memory.is_discharged() || s.queued_move) add(Reason::UndischargedMemory);
  if (s.cursor < s.input.size()) add(Reason::NoParse);
  v.grammatical = v.reasons.empty();
  return v;
}

std::vector<std::string> overt_yield(const DerivationState& s) {
  std::vector<std::vector<std::size_t>> attached(s.leaves.size());
  std::vector<bool> is_attached(s.leaves.size(), false);
  for (std::size_t i = 0; i < s.leaves.size(); ++i) {
    const auto& l = s.leaves[i];
    if (l.proclitic && l.host >= 0) {
      attached[static_cast<std::size_t>(l.host)].push_back(i);
      is_attached[i] = true;
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.leaves.size(); ++i) {
    if (is_attached[i]) continue;
    for (auto c : attached[i]) out.push_back(s.leaves[c].phon);
    out.push_back(s.leaves[i].phon);
  }
  return out;
}

std::string tree_string(const DerivationState& s) {
  std::function<std::string(int)> render = [&](int id) -> std::string {
    const auto& n = s.tree[static_cast<std::size_t>(id)];
    if (n.leaf) return n.text;
    std::string out = "[" + n.label;
    for (int c : n.children) out += " " + render(c);
    return out + "]";
  };
  return s.tree.empty() ? std::string{} : render(0);
}

// Drivers --------------------------------------------------------------------

GenerateResult generate(const Lexicon& lex, const std::vector<std::string>& choices, Backend backend,
                        const DriverOptions& opts) {
  if (choices.empty()) throw EngineError("generation needs at least one choice");
  if (lex.roots.empty()) throw EngineError("grammar declares no roots");
  std::vector<std::size_t> ids;
  for (const auto& c : choices) {
    auto i = find_entry(lex, c);
    if (!i) throw EngineError("unknown lexical entry '" + c + "'");
    ids.push_back(*i);
  }

  std::string root = lex.roots.front();
  for (const auto& r : lex.roots) {
    if (split_consumed_unexpected(lex.entries[ids[0]], FeatureTerm{TermKind::CategoryFeature, r, {}, false},
                                  lex.categories)) {
      root = r;
      break;
    }
  }

  DerivationState s = init_derivation(lex, root, backend);
  s.input = choices;
  auto halted = [&] { return opts.max_steps && s.trace.size() >= *opts.max_steps; };
  while (!halted() && !s.failure) {
    if (deterministic_step(s)) continue;
    if (s.pending.empty()) break;
    if (s.memory.retrieve_for_remerge(remerge_cue(s)).status != RetrievalStatus::None) {
      remerge(lex, s);
      continue;
    }
    if (s.cursor >= ids.size()) break;
    const auto idx = ids[s.cursor];
    if (!split_consumed_unexpected(lex.entries[idx], s.pending.back().term, lex.categories)) {
      s.failure = Reason::NoParse;
      break;
    }
    merge(lex, s, idx);
    ++s.cursor;
  }
  GenerateResult out{s, verdict(s), overt_yield(s), root};
  return out;
}

std::vector<std::string> reorder_proclitics(const Lexicon& lex, const std::vector<std::string>& tokens) {
  auto is_clitic = [&](const std::string& tok) {
    auto ids = lookup_by_phon(lex, tok);
    return !ids.empty() && std::all_of(ids.begin(), ids.end(), [&](std::size_t i) { return lex.entries[i].proclitic; });
  };
  std::vector<std::string> out, held;
  for (const auto& tok : tokens) {
    if (is_clitic(tok)) {
      held.push_back(tok);
      continue;
    }
    out.push_back(tok);
    out.insert(out.end(), held.begin(), held.end());
    held.clear();
  }
  out.insert(out.end(), held.begin(), held.end());
  return out;
}

namespace {

// Covert candidates at `edge`, grouped by feature shape; a group is postulated
// as one underspecified item.
std::vector<std::vector<std::size_t>> covert_groups(const Lexicon& lex, const FeatureTerm& edge) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::vector<std::pair<std::string, bool>>> shapes;
  for (auto i : candidates_for(lex, edge)) {
    const auto& e = lex.entries[i];
    if (!e.covert) continue;
    std::vector<std::pair<std::string, bool>> shape;
    for (const auto& f : e.features) shape.emplace_back((f.is_select() ? "=" : "") + f.category, f.optional);
    auto it = std::find(shapes.begin(), shapes.end(), shape);
    if (it == shapes.end()) {
      shapes.push_back(shape);
      groups.push_back({i});
    } else {
      groups[static_cast<std::size_t>(it - shapes.begin())].push_back(i);
    }
  }
  return groups;
}

bool same_words(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const std::string& x, const std::string& y) { return fold_case(x) == fold_case(y); });
}

class ParseSearch {
 public:
  ParseSearch(const Lexicon& lex, const DriverOptions& opts, const std::vector<std::string>& surface)
      : lex_(lex), opts_(opts), surface_(surface) {}

  bool run(DerivationState s) { return search(std::move(s)); }

  std::optional<DerivationState> winner;
  std::size_t explored = 0;
  std::size_t backtracks = 0;
  bool budget_hit = false;

 private:
  bool tick() {
    if (++explored > opts_.step_budget) budget_hit = true;
    return !budget_hit;
  }

  bool too_long(const DerivationState& s) const { return opts_.max_steps && s.trace.size() > *opts_.max_steps; }

  // Whether some select of `head` can be lexicalized by one of `next`.
  bool licenses(std::size_t head, const std::vector<std::size_t>& next) const {
    for (auto sel : lex_.entries[head].select_features()) {
      sel.kind = TermKind::CategoryFeature;
      for (auto n : next)
        if (split_consumed_unexpected(lex_.entries[n], sel, lex_.categories)) return true;
    }
    return false;
  }

  bool search(DerivationState s) {
    while (deterministic_step(s)) {
      if (!tick() || too_long(s)) return false;
    }
    if (s.failure) return false;
    if (s.pending.empty()) {
      // Reordered clitics must land back where they were heard.
      if (s.memory.is_discharged() && s.cursor == s.input.size() && same_words(overt_yield(s), surface_)) {
        winner = std::move(s);
        return true;
      }
      return false;
    }
    auto r = s.memory.retrieve_for_remerge(remerge_cue(s));
    if (r.status == RetrievalStatus::Ambiguous) return false;
    if (r.status == RetrievalStatus::Found) {
      if (!remerge(lex_, s) || !tick() || too_long(s)) return false;
      return search(std::move(s));
    }

    const auto& edge = s.pending.back().term;
    std::vector<std::size_t> overt;
    if (s.cursor < s.input.size()) {
      const auto matching = lookup_by_phon(lex_, s.input[s.cursor]);
      for (auto i : candidates_for(lex_, edge))
        if (std::find(matching.begin(), matching.end(), i) != matching.end()) overt.push_back(i);
    }
    if (!overt.empty()) {
      if (s.cursor + 1 < s.input.size()) {
        const auto next = lookup_by_phon(lex_, s.input[s.cursor + 1]);
        std::stable_partition(overt.begin(), overt.end(), [&](std::size_t i) { return licenses(i, next); });
      }
      for (std::size_t k = 0; k < overt.size(); ++k) {
        DerivationState child = s;
        merge(lex_, child, overt[k]);
        ++child.cursor;
        if (!tick() || too_long(child)) return false;
        if (search(std::move(child))) return true;
        if (budget_hit) return false;
        ++backtracks;
      }
    }
    const auto groups = covert_groups(lex_, edge);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      DerivationState child = s;
      postulate_covert(lex_, child, groups[k]);
      if (!tick() || too_long(child)) return false;
      if (search(std::move(child))) return true;
      if (budget_hit) return false;
    }
    return false;
  }

  const Lexicon& lex_;
  const DriverOptions& opts_;
  const std::vector<std::string>& surface_;
};

}  // namespace

ParseResult parse(const Lexicon& lex, const std::vector<std::string>& tokens, Backend backend,
                  const DriverOptions& opts) {
  ParseResult out;
  out.tokens = reorder_proclitics(lex, tokens);
  if (tokens.empty()) {
    out.verdict = Verdict{false, {Reason::NoParse}};
    return out;
  }
  bool budget_hit = false;
  for (const auto& root : lex.roots) {
    ParseSearch search(lex, opts, tokens);
    DerivationState s = init_derivation(lex, root, backend);
    s.input = out.tokens;
    const bool ok = search.run(std::move(s));
    out.attempts.push_back({root, ok, search.explored, search.backtracks});
    budget_hit = budget_hit || search.budget_hit;
    if (ok && !out.state) out.state = std::move(search.winner);
  }
  if (out.state) {
    out.verdict = verdict(*out.state);
  } else {
    out.verdict = Verdict{false, {budget_hit ? Reason::StepBudgetExceeded : Reason::NoParse}};
  }
  return out;
}

namespace {

void explore(const Lexicon& lex, std::size_t max_steps, DerivationState s,
             const std::function<void(const EnumeratedDerivation&)>& visit) {
  auto halt = [&](DerivationState& st) { visit(EnumeratedDerivation{st, verdict(st)}); };
  while (true) {
    if (s.failure) return halt(s);
    const bool deterministic = s.queued_move || (!s.pending.empty() && !s.pending.back().expanded);
    if (!deterministic) break;
    if (s.trace.size() >= max_steps) return halt(s);
    deterministic_step(s);
  }
  if (s.pending.empty() || s.trace.size() >= max_steps) return halt(s);

  if (s.memory.retrieve_for_remerge(remerge_cue(s)).status != RetrievalStatus::None) {
    remerge(lex, s);
    return explore(lex, max_steps, std::move(s), visit);
  }
  const auto& edge = s.pending.back().term;
  std::vector<std::size_t> overt;
  for (auto idx : candidates_for(lex, edge))
    if (!lex.entries[idx].covert) overt.push_back(idx);
  const auto groups = covert_groups(lex, edge);
  if (overt.empty() && groups.empty()) {
    s.failure = Reason::NoParse;
    return halt(s);
  }
  for (auto idx : overt) {
    DerivationState child = s;
    merge(lex, child, idx);
    explore(lex, max_steps, std::move(child), visit);
  }
  for (const auto& group : groups) {
    DerivationState child = s;
    postulate_covert(lex, child, group);
    explore(lex, max_steps, std::move(child), visit);
  }
}

}  // namespace

void for_each_derivation(const Lexicon& lex, std::size_t max_steps, Backend backend,
                         const std::function<void(const EnumeratedDerivation&)>& visit) {
  if (max_steps == 0) return;
  for (const auto& root : lex.roots) explore(lex, max_steps, init_derivation(lex, root, backend), visit);
}

std::set<std::vector<std::string>> enumerate(const Lexicon& lex, std::size_t max_steps, Backend backend) {
  std::set<std::vector<std::string>> out;
  for_each_derivation(lex, max_steps, backend, [&](const EnumeratedDerivation& d) {
    if (!d.verdict.grammatical) return;
    auto y = overt_yield(d.state);
    if (!y.empty()) out.insert(std::move(y));
  });
  return out;
}

DerivationState replay(const Lexicon& lex, const DerivationTrace& trace, Backend backend,
                       std::optional<std::size_t> upto) {
  if (trace.empty() || trace[0].op != Op::Init) throw EngineError("trace does not start with init");
  const std::size_t n = std::min(trace.size(), upto.value_or(trace.size()));
  DerivationState s = init_derivation(lex, trace[0].payload, backend);
  for (std::size_t k = 1; k < n; ++k) {
    const auto& step = trace[k];
    switch (step.op) {
      case Op::Merge: merge(lex, s, step.detail.entry.value()); break;
      case Op::PostulateCovert: postulate_covert(lex, s, step.detail.covert_group); break;
      case Op::Expect: expect(s); break;
      case Op::Move: move(s); break;
      case Op::MergeFromMemory:
        if (!remerge(lex, s)) throw EngineError("replay diverged at step " + std::to_string(step.index));
        break;
      case Op::Init: throw EngineError("init inside a trace");
    }
  }
  return s;
}

// Serialization ----------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

}  // namespace

std::string trace_text(const DerivationTrace& trace) {
  std::ostringstream out;
  for (const auto& st : trace) {
    out << std::setw(3) << st.index << ". " << std::left << std::setw(18) << to_string(st.op) << std::setw(22)
        << st.payload << std::right << " pending: " << join(st.pending, " ") << "  M:<" << join(st.memory, ", ")
        << ">\n";
  }
  return out.str();
}

std::string trace_structured(const DerivationTrace& trace) {
  std::string out;
  for (const auto& st : trace) {
    nlohmann::ordered_json j;
    j["index"] = st.index;
    j["op"] = std::string(to_string(st.op));
    j["payload"] = st.payload;
    j["pending"] = st.pending;
    j["memory"] = st.memory;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace pmg
