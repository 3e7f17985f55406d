#include "pmg/binding.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pmg {

Constraints phi_of(const Constraints& attributes) {
  Constraints out;
  for (const auto& [attr, value] : attributes) {
    const auto cls = label_class_of_attribute(attr);
    if (cls == LabelClass::Person || cls == LabelClass::Number || cls == LabelClass::Gender ||
        cls == LabelClass::Animacy)
      out.emplace(attr, value);
  }
  return out;
}

ResolutionCue cue_for(Anaphor kind, const Constraints& phi) {
  switch (kind) {
    case Anaphor::Reflexive: return {phi_of(phi), Topicality::RequireTopic, SearchDomain::LocalScope};
    case Anaphor::Pronoun: return {phi_of(phi), Topicality::ExcludeLocalTopic, SearchDomain::AccessibleScopes};
    case Anaphor::NullSubject: return {phi_of(phi), Topicality::RequireTopic, SearchDomain::AccessibleScopes};
    case Anaphor::None: break;
  }
  throw std::invalid_argument("not an anaphor");
}

std::string_view to_string(ReferentialMode m) { return m == ReferentialMode::Trie ? "trie" : "lifo"; }

std::optional<ReferentialMode> referential_mode_from(std::string_view s) {
  if (s == "trie") return ReferentialMode::Trie;
  if (s == "lifo") return ReferentialMode::Lifo;
  return std::nullopt;
}

std::string_view to_string(BindingStatus s) {
  switch (s) {
    case BindingStatus::Resolved: return "resolved";
    case BindingStatus::Unresolved: return "unresolved";
    case BindingStatus::Ambiguous: return "ambiguous";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

}  // namespace

std::optional<std::string> Coindexation::referent() const {
  if (chain.empty()) return std::nullopt;
  return chain.back();
}

std::string Coindexation::str() const {
  std::ostringstream out;
  out << "sentence=" << sentence << " position=" << step << " kind=" << to_string(kind) << " anaphor=" << anaphor
      << " antecedent=" << antecedent.value_or("-") << " chain=" << (chain.empty() ? "-" : join(chain, ">"))
      << " status=" << to_string(status);
  if (!candidates.empty() && status == BindingStatus::Ambiguous) out << " candidates=" << join(candidates, ",");
  return out.str();
}

std::string RedundancyWarning::str() const {
  std::ostringstream out;
  out << "warning sentence=" << sentence << " position=" << step << " redundant=" << record
      << " existing=" << existing;
  return out.str();
}

const Coindexation* CoindexTable::find(const std::string& anaphor) const {
  for (const auto& e : entries)
    if (e.anaphor == anaphor) return &e;
  return nullptr;
}

std::string CoindexTable::str() const {
  std::string out;
  for (const auto& e : entries) out += e.str() + "\n";
  for (const auto& w : warnings) out += w.str() + "\n";
  return out;
}

BindingSession::BindingSession(const Lexicon& lex, ReferentialMode mode) : lex_(lex), mode_(mode) {}

int BindingSession::open_sentence_scope() { return store_.open_scope(store_.global_scope()); }

std::string BindingSession::fresh_id(const std::string& surface, int sentence) {
  const std::string base = fold_case(surface) + "@" + std::to_string(sentence);
  const int n = ++used_ids_[base];
  return n == 1 ? base : base + "#" + std::to_string(n);
}

FeaturePath BindingSession::record_path(const Constraints& attributes, const std::optional<std::string>& position,
                                        bool defaults) const {
  return path_of("D", attributes, position, lex_.order, {defaults});
}

std::optional<RedundancyWarning> BindingSession::nonredundancy_check(const ReferentRecord& rec, int scope) const {
  for (const auto* other : store_.records_in(store_.accessible_scopes(scope))) {
    if (other->path == rec.path && fold_case(other->surface) == fold_case(rec.surface))
      return RedundancyWarning{rec.sentence, 0, rec.id, other->id};
  }
  return std::nullopt;
}

std::string BindingSession::register_referent(const std::string& surface, const Constraints& attributes,
                                              const std::optional<std::string>& position, int scope, int sentence,
                                              int step) {
  ReferentRecord rec;
  rec.id = fresh_id(surface, sentence);
  rec.surface = surface;
  rec.path = record_path(attributes, position);
  rec.topic = position.has_value();
  rec.sentence = sentence;
  if (auto w = nonredundancy_check(rec, scope)) {
    w->step = step;
    table_.warnings.push_back(*w);
  }
  const auto id = rec.id;
  store_.store_referent(std::move(rec), scope);
  return id;
}

std::vector<std::string> BindingSession::chain_of(const std::string& id) const {
  std::vector<std::string> out;
  auto it = links_.find(id);
  while (it != links_.end() && out.size() <= links_.size()) {
    out.push_back(it->second);
    it = links_.find(it->second);
  }
  return out;
}

std::set<std::string> BindingSession::local_topic_chain(int scope) const {
  std::set<std::string> chain;
  for (const auto* r : store_.records_in({scope}))
    if (r->topic) chain.insert(r->id);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [from, to] : links_) {
      if (chain.count(from) && chain.insert(to).second) grew = true;
      if (chain.count(to) && chain.insert(from).second) grew = true;
    }
  }
  return chain;
}

Resolution BindingSession::resolve(Anaphor kind, const Constraints& phi, int scope) {
  const auto rc = cue_for(kind, phi);
  ReferentCue cue;
  cue.cue.category = "D";
  cue.cue.attributes = rc.phi;
  cue.cue.policy = rc.topicality == Topicality::RequireTopic ? PositionPolicy::Required : PositionPolicy::Skippable;
  cue.domain = rc.domain;
  if (rc.topicality == Topicality::ExcludeLocalTopic) cue.excluded = local_topic_chain(scope);

  const auto r = mode_ == ReferentialMode::Lifo ? store_.retrieve_referent_lifo(cue, scope)
                                                : store_.retrieve_referent(cue, scope);
  Resolution out;
  out.matches = r.matches;
  if (r.status == RetrievalStatus::Found) {
    out.status = BindingStatus::Resolved;
    out.antecedent = r.record->id;
  } else if (r.status == RetrievalStatus::Ambiguous) {
    out.status = BindingStatus::Ambiguous;
  }
  return out;
}

void BindingSession::bind_derivation(const DerivationState& state, int sentence) {
  std::map<int, int> scope_map{{0, store_.global_scope()}};
  auto local_scope = [&](const std::vector<int>& chain) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (scope_map.count(chain[i])) continue;
      scope_map[chain[i]] = i == 0 ? store_.global_scope()
                            : i == 1 ? open_sentence_scope()
                                     : open_scope(scope_map.at(chain[i - 1]));
    }
    return chain.empty() ? store_.global_scope() : scope_map.at(chain.back());
  };
  local_scope({0, 1});

  std::map<std::string, std::optional<std::string>> item_position;
  std::set<std::string> registered_items;

  auto add_binding = [&](const DerivationStep& step, Anaphor kind, const std::string& surface,
                         const Constraints& phi, int scope) -> std::string {
    Coindexation c;
    c.sentence = sentence;
    c.step = step.index;
    c.kind = kind;
    c.anaphor = fresh_id(surface, sentence);
    const auto r = resolve(kind, phi, scope);
    c.status = r.status;
    c.candidates = r.matches;
    if (r.antecedent) {
      c.antecedent = r.antecedent;
      link(c.anaphor, *r.antecedent);
      c.chain = chain_of(c.anaphor);
    }
    table_.entries.push_back(c);
    return c.anaphor;
  };

  for (const auto& step : state.trace) {
    const auto& d = step.detail;
    if (!d.item.empty() && (step.op == Op::Merge || step.op == Op::PostulateCovert))
      item_position[d.item] = d.position;
    if (!d.entry) continue;
    const auto& e = lex_.entries[*d.entry];
    const std::string surface = e.covert ? e.sem : e.phon;
    const int scope = local_scope(d.scopes);

    if (step.op == Op::Merge || step.op == Op::PostulateCovert) {
      if (e.anaphor == Anaphor::Reflexive || e.anaphor == Anaphor::Pronoun) {
        add_binding(step, e.anaphor, surface, e.attributes(), scope);
      } else if (e.anaphor == Anaphor::None && e.has_category("D") && e.has_category("N")) {
        register_referent(surface, d.attributes, d.position, scope, sentence, step.index);
        if (!d.item.empty()) registered_items.insert(d.item);
      }
    } else if (step.op == Op::MergeFromMemory) {
      const auto pos = item_position.count(d.item) ? item_position.at(d.item) : std::nullopt;
      if (e.anaphor == Anaphor::NullSubject) {
        Constraints phi = phi_of(d.attributes);
        phi.emplace("num", "sg");
        const auto id = add_binding(step, e.anaphor, surface, phi, scope);
        // The null subject becomes a referent in its own right, e.g. for si.
        ReferentRecord rec;
        rec.id = id;
        rec.surface = surface;
        rec.path = record_path(d.attributes, pos);
        rec.topic = pos.has_value();
        rec.sentence = sentence;
        store_.store_referent(std::move(rec), scope);
      } else if (e.anaphor == Anaphor::None && e.has_category("D") && e.has_category("N") &&
                 !registered_items.count(d.item)) {
        register_referent(surface, d.attributes, pos, scope, sentence, step.index);
        registered_items.insert(d.item);
      }
    }
  }

  for (const auto& [engine_id, store_id] : scope_map)
    if (store_id != store_.global_scope()) store_.promote_to_global(store_id);
}

DiscourseResult process_discourse(const Lexicon& lex, const std::vector<std::vector<std::string>>& sentences,
                                  Backend backend, ReferentialMode mode, const DriverOptions& opts) {
  DiscourseResult out;
  BindingSession session(lex, mode);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.parses.push_back(parse(lex, sentences[i], backend, opts));
    const auto& p = out.parses.back();
    if (!p.state || !p.verdict.grammatical) {
      out.failed_sentence = i;
      break;
    }
    session.bind_derivation(*p.state, static_cast<int>(i) + 1);
  }
  out.table = session.table();
  out.store_dump = session.store().dump();
  return out;
}

}  // namespace pmg
