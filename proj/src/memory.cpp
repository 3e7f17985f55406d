#include "pmg/memory.hpp"

#include <algorithm>

namespace pmg {

namespace {

std::map<LabelClass, std::string> wanted_labels(const Cue& cue) {
  std::map<LabelClass, std::string> want;
  for (const auto& [attr, value] : cue.attributes) {
    if (auto l = label_for_attribute(attr, value)) want.emplace(l->cls, l->text);
  }
  return want;
}

bool position_ok(const Cue& cue, const std::optional<std::string>& position) {
  switch (cue.policy) {
    case PositionPolicy::Skippable: return true;
    case PositionPolicy::Required: return position.has_value();
    case PositionPolicy::Forbidden: return !position.has_value();
    case PositionPolicy::Exactly: return position && *position == cue.position;
  }
  return false;
}

// A position label seen on the way down must be admissible under the policy.
bool position_label_admissible(const Cue& cue, const std::string& text) {
  switch (cue.policy) {
    case PositionPolicy::Skippable:
    case PositionPolicy::Required: return true;
    case PositionPolicy::Forbidden: return false;
    case PositionPolicy::Exactly: return text == cue.position;
  }
  return false;
}

}  // namespace

std::string Cue::str() const {
  std::string out;
  auto add = [&](const std::string& s) {
    if (!out.empty()) out += "∧";
    out += s;
  };
  if (policy == PositionPolicy::Exactly) add(position);
  if (policy == PositionPolicy::Required) add("topic");
  if (policy == PositionPolicy::Forbidden) add("¬topic");
  add(category);
  std::vector<PathLabel> labels;
  std::vector<std::string> other;
  for (const auto& [attr, value] : attributes) {
    if (auto l = label_for_attribute(attr, value)) labels.push_back(*l);
    else other.push_back(value ? attr + ":" + *value : attr);
  }
  const FeatureOrder order;
  std::stable_sort(labels.begin(), labels.end(),
                   [&](const PathLabel& a, const PathLabel& b) { return order.rank(a.cls) < order.rank(b.cls); });
  for (const auto& l : labels) add(l.text);
  for (const auto& o : other) add(o);
  return out;
}

bool path_matches(const FeaturePath& path, const Cue& cue) {
  const auto want = wanted_labels(cue);
  bool category_seen = false;
  for (const auto& l : path.labels()) {
    if (l.cls == LabelClass::Position) {
      if (!position_label_admissible(cue, l.text)) return false;
    } else if (l.cls == LabelClass::Category) {
      if (l.text != cue.category) return false;
      category_seen = true;
    } else if (auto it = want.find(l.cls); it != want.end() && it->second != l.text) {
      return false;
    }
  }
  return category_seen && position_ok(cue, path.label_of(LabelClass::Position));
}

// FeatureTrie ---------------------------------------------------------------

FeatureTrie::FeatureTrie() { nodes_.push_back(Node{{LabelClass::Position, "(root)"}, {}, {}, 0}); }

std::size_t FeatureTrie::insert(const FeaturePath& path, const std::string& id) {
  std::size_t node = 0;
  std::size_t created = 0;
  for (const auto& l : path.labels()) {
    auto it = nodes_[node].children.find(l.text);
    if (it == nodes_[node].children.end()) {
      nodes_.push_back(Node{l, {}, {}, 0});
      const auto child = nodes_.size() - 1;
      nodes_[node].children.emplace(l.text, child);
      node = child;
      ++created;
    } else {
      node = it->second;
    }
  }
  nodes_[node].ids.push_back(id);
  return created;
}

std::size_t FeatureTrie::shared_prefix(const FeaturePath& path) const {
  std::size_t node = 0;
  std::size_t n = 0;
  for (const auto& l : path.labels()) {
    auto it = nodes_[node].children.find(l.text);
    if (it == nodes_[node].children.end()) break;
    node = it->second;
    ++n;
  }
  return n;
}

std::size_t FeatureTrie::insertion_cost(const FeaturePath& path) const {
  return path.size() - shared_prefix(path);
}

void FeatureTrie::adjust_mark(const FeaturePath& path, int delta) {
  std::size_t node = 0;
  nodes_[node].marked += delta;
  for (const auto& l : path.labels()) {
    auto it = nodes_[node].children.find(l.text);
    if (it == nodes_[node].children.end()) return;
    node = it->second;
    nodes_[node].marked += delta;
  }
}

void FeatureTrie::remove_id(const FeaturePath& path, const std::string& id) {
  std::size_t node = 0;
  for (const auto& l : path.labels()) {
    auto it = nodes_[node].children.find(l.text);
    if (it == nodes_[node].children.end()) return;
    node = it->second;
  }
  auto& ids = nodes_[node].ids;
  ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
}

std::vector<std::string> FeatureTrie::match(const Cue& cue) const {
  std::vector<std::string> out;
  match_from(0, cue, wanted_labels(cue), false, false, out);
  return out;
}

void FeatureTrie::match_from(std::size_t node, const Cue& cue, const std::map<LabelClass, std::string>& want,
                             bool seen_position, bool seen_category, std::vector<std::string>& out) const {
  const auto& n = nodes_[node];
  if (node != 0 && seen_category) {
    const bool pos_ok = cue.policy == PositionPolicy::Skippable || cue.policy == PositionPolicy::Forbidden ||
                        seen_position;
    if (pos_ok) out.insert(out.end(), n.ids.begin(), n.ids.end());
  }
  for (const auto& [text, child] : n.children) {
    const auto& label = nodes_[child].label;
    bool position = seen_position;
    bool category = seen_category;
    if (label.cls == LabelClass::Position) {
      if (!position_label_admissible(cue, text)) continue;
      position = true;
    } else if (label.cls == LabelClass::Category) {
      if (text != cue.category) continue;
      category = true;
    } else if (auto it = want.find(label.cls); it != want.end() && it->second != text) {
      continue;
    }
    match_from(child, cue, want, position, category, out);
  }
}

std::string FeatureTrie::dump(const LeafFormatter& leaf) const {
  std::string out;
  dump_from(0, 0, leaf, out);
  return out;
}

void FeatureTrie::dump_from(std::size_t node, int depth, const LeafFormatter& leaf, std::string& out) const {
  const auto& n = nodes_[node];
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += n.label.text;
  if (n.marked > 0) out += " *" + std::to_string(n.marked);
  if (!n.ids.empty()) {
    std::vector<std::string> ids = n.ids;
    std::sort(ids.begin(), ids.end());
    out += " [";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += ", ";
      out += leaf(ids[i]);
    }
    out += "]";
  }
  out += '\n';
  for (const auto& [text, child] : n.children) dump_from(child, depth + 1, leaf, out);
}

Ratio confusability(const FeaturePath& a, const FeaturePath& b) {
  const auto longest = std::max(a.size(), b.size());
  if (longest == 0) return {1, 1};
  return {shared_prefix_length(a, b), longest};
}

// Moved items ---------------------------------------------------------------

std::string_view to_string(Backend b) { return b == Backend::Lifo ? "lifo" : "trie"; }

std::optional<Backend> backend_from(std::string_view s) {
  if (s == "lifo") return Backend::Lifo;
  if (s == "trie") return Backend::Trie;
  return std::nullopt;
}

namespace {

void validate_moved(const MemoryItem& item) {
  if (item.marks.empty()) throw MemoryError("moved item '" + item.id + "' carries no unexpected marks");
  for (const auto& m : item.marks) {
    const auto& ls = item.path.labels();
    if (std::none_of(ls.begin(), ls.end(), [&](const PathLabel& l) { return l.text == m; }))
      throw MemoryError("mark '" + m + "' is not on the path of '" + item.id + "'");
  }
}

std::string leaf_text(const MemoryItem& item) {
  return item.id + (item.marks.empty() ? "" : " marked") + " count=" + std::to_string(item.retrieval_count);
}

}  // namespace

std::size_t LifoMemory::store_moved(MemoryItem item) {
  validate_moved(item);
  if (!ever_stored_.insert(item.id).second) throw MemoryError("duplicate memory item '" + item.id + "'");
  const auto cost = item.path.size();
  items_.push_back(std::move(item));
  return cost;
}

Retrieval LifoMemory::retrieve_for_remerge(const Cue& cue) const {
  for (auto it = items_.rbegin(); it != items_.rend(); ++it) {
    if (path_matches(it->path, cue)) return {RetrievalStatus::Found, *it, {it->id}};
  }
  return {};
}

void LifoMemory::discharge(const std::string& id) {
  auto it = std::find_if(items_.begin(), items_.end(), [&](const MemoryItem& m) { return m.id == id; });
  if (it == items_.end()) {
    throw MemoryError(ever_stored_.count(id) ? "memory item '" + id + "' already discharged"
                                             : "unknown memory item '" + id + "'");
  }
  items_.erase(it);
}

std::vector<const MemoryItem*> LifoMemory::marked_items() const {
  std::vector<const MemoryItem*> out;
  for (const auto& m : items_) out.push_back(&m);
  return out;
}

std::string LifoMemory::dump() const {
  std::string out = "(buffer)\n";
  for (const auto& m : items_) out += "  " + m.path.str() + " [" + leaf_text(m) + "]\n";
  return out;
}

std::size_t TrieMemory::store_moved(MemoryItem item) {
  validate_moved(item);
  if (items_.count(item.id)) throw MemoryError("duplicate memory item '" + item.id + "'");
  const auto cost = trie_.insert(item.path, item.id);
  trie_.adjust_mark(item.path, +1);
  items_.emplace(item.id, std::move(item));
  return cost;
}

Retrieval TrieMemory::retrieve_for_remerge(const Cue& cue) const {
  Retrieval r;
  for (const auto& id : trie_.match(cue)) {
    if (!items_.at(id).marks.empty()) r.matches.push_back(id);
  }
  if (r.matches.size() == 1) {
    r.status = RetrievalStatus::Found;
    r.item = items_.at(r.matches.front());
  } else if (r.matches.size() > 1) {
    r.status = RetrievalStatus::Ambiguous;
  }
  return r;
}

void TrieMemory::discharge(const std::string& id) {
  auto it = items_.find(id);
  if (it == items_.end()) throw MemoryError("unknown memory item '" + id + "'");
  if (it->second.marks.empty()) throw MemoryError("memory item '" + id + "' already discharged");
  it->second.marks.clear();
  trie_.adjust_mark(it->second.path, -1);
}

bool TrieMemory::is_discharged() const {
  return std::all_of(items_.begin(), items_.end(), [](const auto& kv) { return kv.second.marks.empty(); });
}

std::vector<const MemoryItem*> TrieMemory::marked_items() const {
  std::vector<const MemoryItem*> out;
  for (const auto& [id, m] : items_)
    if (!m.marks.empty()) out.push_back(&m);
  auto key = [](const MemoryItem* m) {
    std::vector<std::string> k;
    for (const auto& l : m->path.labels()) k.push_back(l.text);
    return k;
  };
  std::stable_sort(out.begin(), out.end(), [&](const MemoryItem* a, const MemoryItem* b) {
    auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : a->id < b->id;
  });
  return out;
}

std::string TrieMemory::dump() const {
  return trie_.dump([this](const std::string& id) { return leaf_text(items_.at(id)); });
}

MovementStore::MovementStore(Backend backend) {
  if (backend == Backend::Lifo) impl_ = LifoMemory{};
  else impl_ = TrieMemory{};
}

Backend MovementStore::backend() const {
  return std::holds_alternative<LifoMemory>(impl_) ? Backend::Lifo : Backend::Trie;
}

std::size_t MovementStore::store_moved(MemoryItem item) {
  return std::visit([&](auto& m) { return m.store_moved(std::move(item)); }, impl_);
}

Retrieval MovementStore::retrieve_for_remerge(const Cue& cue) const {
  return std::visit([&](const auto& m) { return m.retrieve_for_remerge(cue); }, impl_);
}

void MovementStore::discharge(const std::string& id) {
  std::visit([&](auto& m) { m.discharge(id); }, impl_);
}

bool MovementStore::is_discharged() const {
  return std::visit([](const auto& m) { return m.is_discharged(); }, impl_);
}

std::vector<const MemoryItem*> MovementStore::marked_items() const {
  return std::visit([](const auto& m) { return m.marked_items(); }, impl_);
}

std::vector<std::string> MovementStore::snapshot() const {
  std::vector<std::string> out;
  for (const auto* m : marked_items()) out.push_back(m->sem);
  return out;
}

std::string MovementStore::dump() const {
  return std::visit([](const auto& m) { return m.dump(); }, impl_);
}

// Referents -----------------------------------------------------------------

ReferentStore::ReferentStore() {
  scopes_.push_back({0, std::nullopt, true});
  tries_.emplace(0, FeatureTrie{});
}

int ReferentStore::open_scope(int parent) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= scopes_.size())
    throw MemoryError("unknown parent scope " + std::to_string(parent));
  const int id = static_cast<int>(scopes_.size());
  scopes_.push_back({id, parent, false});
  tries_.emplace(id, FeatureTrie{});
  return id;
}

const PhaseScope& ReferentStore::scope(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= scopes_.size())
    throw MemoryError("unknown scope " + std::to_string(id));
  return scopes_[static_cast<std::size_t>(id)];
}

std::vector<int> ReferentStore::accessible_scopes(int from) const {
  std::vector<int> out;
  std::optional<int> s = from;
  while (s) {
    out.push_back(*s);
    s = scope(*s).parent;
  }
  if (std::find(out.begin(), out.end(), 0) == out.end()) out.push_back(0);
  return out;
}

std::vector<int> ReferentStore::search_scopes(SearchDomain d, int from) const {
  if (d == SearchDomain::LocalScope) {
    scope(from);
    return {from};
  }
  return accessible_scopes(from);
}

void ReferentStore::store_referent(ReferentRecord rec, int scope_id) {
  scope(scope_id);
  if (find(rec.id)) throw MemoryError("duplicate referent '" + rec.id + "'");
  rec.scope = scope_id;
  tries_.at(scope_id).insert(rec.path, rec.id);
  records_.push_back(std::move(rec));
}

ReferentRetrieval ReferentStore::retrieve_referent(const ReferentCue& cue, int from_scope) {
  ReferentRetrieval r;
  for (int s : search_scopes(cue.domain, from_scope)) {
    for (auto& id : tries_.at(s).match(cue.cue))
      if (!cue.excluded.count(id)) r.matches.push_back(id);
  }
  if (r.matches.size() == 1) {
    auto it = std::find_if(records_.begin(), records_.end(),
                           [&](const ReferentRecord& x) { return x.id == r.matches.front(); });
    ++it->retrieval_count;
    r.status = RetrievalStatus::Found;
    r.record = *it;
  } else if (r.matches.size() > 1) {
    r.status = RetrievalStatus::Ambiguous;
  }
  return r;
}

ReferentRetrieval ReferentStore::retrieve_referent_lifo(const ReferentCue& cue, int from_scope) {
  const auto scopes = search_scopes(cue.domain, from_scope);
  Cue phi_only = cue.cue;
  phi_only.policy = PositionPolicy::Skippable;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (std::find(scopes.begin(), scopes.end(), it->scope) == scopes.end()) continue;
    if (cue.excluded.count(it->id) || !path_matches(it->path, phi_only)) continue;
    ++it->retrieval_count;
    return {RetrievalStatus::Found, *it, {it->id}};
  }
  return {};
}

void ReferentStore::promote_to_global(int scope_id) {
  scope(scope_id);
  if (scope_id == 0) return;
  for (auto& rec : records_) {
    if (rec.scope != scope_id) continue;
    tries_.at(scope_id).remove_id(rec.path, rec.id);
    tries_.at(0).insert(rec.path, rec.id);
    rec.scope = 0;
  }
}

const ReferentRecord* ReferentStore::find(const std::string& id) const {
  auto it = std::find_if(records_.begin(), records_.end(), [&](const ReferentRecord& r) { return r.id == id; });
  return it == records_.end() ? nullptr : &*it;
}

std::vector<const ReferentRecord*> ReferentStore::records_in(const std::vector<int>& scopes) const {
  std::vector<const ReferentRecord*> out;
  for (const auto& r : records_)
    if (std::find(scopes.begin(), scopes.end(), r.scope) != scopes.end()) out.push_back(&r);
  return out;
}

std::size_t ReferentStore::insertion_cost(const FeaturePath& path, int scope_id) const {
  scope(scope_id);
  return tries_.at(scope_id).insertion_cost(path);
}

std::string ReferentStore::dump() const {
  std::string out;
  for (const auto& s : scopes_) {
    out += "scope " + std::to_string(s.id);
    if (s.parent) out += " parent=" + std::to_string(*s.parent);
    if (s.global) out += " global";
    out += '\n';
    out += tries_.at(s.id).dump([this](const std::string& id) {
      const auto* r = find(id);
      return id + (r->topic ? " topic" : "") + " count=" + std::to_string(r->retrieval_count);
    });
  }
  return out;
}

}  // namespace pmg
