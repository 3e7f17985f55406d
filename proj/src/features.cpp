#include "pmg/features.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace pmg {

std::string_view to_string(CategoryClass c) {
  switch (c) {
    case CategoryClass::PhaseEdge: return "phase-edge";
    case CategoryClass::Functional: return "functional";
    case CategoryClass::Lexical: return "lexical";
  }
  return "?";
}

std::optional<CategoryClass> category_class_from(std::string_view s) {
  if (s == "phase-edge") return CategoryClass::PhaseEdge;
  if (s == "functional") return CategoryClass::Functional;
  if (s == "lexical") return CategoryClass::Lexical;
  return std::nullopt;
}

std::optional<Constraints> unify(const Constraints& a, const Constraints& b) {
  Constraints out = a;
  for (const auto& [attr, value] : b) {
    auto it = out.find(attr);
    if (it == out.end()) {
      out.emplace(attr, value);
      continue;
    }
    if (!value) continue;
    if (!it->second) {
      it->second = value;
    } else if (*it->second != *value) {
      return std::nullopt;
    }
  }
  return out;
}

bool compatible(const Constraints& a, const Constraints& b) {
  for (const auto& [attr, value] : b) {
    auto it = a.find(attr);
    if (it != a.end() && it->second && value && *it->second != *value) return false;
  }
  return true;
}

std::string format_constraints(const Constraints& c, char sep) {
  std::string out;
  for (const auto& [attr, value] : c) {
    if (!out.empty()) out += sep;
    out += attr;
    if (value) out += ":" + *value;
  }
  return out;
}

std::optional<FeatureTerm> unify_terms(const FeatureTerm& a, const FeatureTerm& b) {
  if (a.category != b.category) return std::nullopt;
  auto merged = unify(a.constraints, b.constraints);
  if (!merged) return std::nullopt;
  return FeatureTerm{b.kind, b.category, std::move(*merged), b.optional};
}

std::string format_term(const FeatureTerm& t) {
  std::string out = t.is_select() ? "=" : "";
  out += t.category;
  if (!t.constraints.empty()) out += ":" + format_constraints(t.constraints);
  if (t.optional) out = "(" + out + ")";
  return out;
}

std::string_view to_string(Anaphor a) {
  switch (a) {
    case Anaphor::None: return "none";
    case Anaphor::Reflexive: return "reflexive";
    case Anaphor::Pronoun: return "pronoun";
    case Anaphor::NullSubject: return "null-subject";
  }
  return "?";
}

std::optional<Anaphor> anaphor_from(std::string_view s) {
  if (s == "reflexive") return Anaphor::Reflexive;
  if (s == "pronoun") return Anaphor::Pronoun;
  if (s == "null-subject") return Anaphor::NullSubject;
  if (s == "none") return Anaphor::None;
  return std::nullopt;
}

std::vector<FeatureTerm> LexicalEntry::category_features() const {
  std::vector<FeatureTerm> out;
  for (const auto& f : features)
    if (!f.is_select()) out.push_back(f);
  return out;
}

std::vector<FeatureTerm> LexicalEntry::select_features() const {
  std::vector<FeatureTerm> out;
  for (const auto& f : features)
    if (f.is_select()) out.push_back(f);
  return out;
}

bool LexicalEntry::has_category(std::string_view name) const {
  return std::any_of(features.begin(), features.end(),
                     [&](const FeatureTerm& f) { return !f.is_select() && f.category == name; });
}

Constraints LexicalEntry::attributes() const {
  Constraints out;
  for (const auto& f : features) {
    if (f.is_select()) continue;
    for (const auto& kv : f.constraints) out.insert(kv);
  }
  return out;
}

const FeatureTerm& edge_of_entry(const LexicalEntry& e) {
  if (e.features.empty()) throw std::invalid_argument("entry has no features");
  return e.features.front();
}

std::optional<EdgeMatch> match_edge(const LexicalEntry& e, const FeatureTerm& expected) {
  if (e.features.empty() || e.features.front().is_select()) return std::nullopt;
  FeatureTerm probe = expected;
  probe.kind = TermKind::CategoryFeature;
  probe.optional = false;

  const auto& first = e.features.front();
  if (auto u = unify_terms(first, probe)) return EdgeMatch{0, std::move(*u), false};
  if (first.optional && e.features.size() > 1 && !e.features[1].is_select()) {
    if (auto u = unify_terms(e.features[1], probe)) return EdgeMatch{1, std::move(*u), true};
  }
  return std::nullopt;
}

std::optional<Split> split_consumed_unexpected(const LexicalEntry& e, const FeatureTerm& expected,
                                               const CategoryTable& categories) {
  auto m = match_edge(e, expected);
  if (!m) return std::nullopt;
  const auto cats = e.category_features();

  Split s;
  for (std::size_t i = 0; i < m->index; ++i) s.inactive.push_back(cats[i]);
  s.consumed.push_back(m->unified);
  std::size_t i = m->index + 1;
  for (; i < cats.size(); ++i) {
    auto it = categories.find(s.consumed.back().category);
    if (it == categories.end() || !it->second.select || *it->second.select != cats[i].category) break;
    s.consumed.push_back(cats[i]);
  }
  for (; i < cats.size(); ++i) s.unexpected.push_back(cats[i]);
  return s;
}

// Feature paths ------------------------------------------------------------

namespace {
constexpr std::array<std::pair<LabelClass, std::string_view>, 7> kClassNames{{
    {LabelClass::Position, "position"},
    {LabelClass::Category, "category"},
    {LabelClass::Person, "person"},
    {LabelClass::Number, "number"},
    {LabelClass::Gender, "gender"},
    {LabelClass::Animacy, "animacy"},
    {LabelClass::Case, "case"},
}};
}  // namespace

std::string_view to_string(LabelClass c) {
  for (const auto& [cls, name] : kClassNames)
    if (cls == c) return name;
  return "?";
}

std::optional<LabelClass> label_class_from(std::string_view s) {
  for (const auto& [cls, name] : kClassNames)
    if (name == s) return cls;
  return std::nullopt;
}

std::optional<LabelClass> label_class_of_attribute(std::string_view attribute) {
  if (attribute == "pers") return LabelClass::Person;
  if (attribute == "num") return LabelClass::Number;
  if (attribute == "gen") return LabelClass::Gender;
  if (attribute == "anim") return LabelClass::Animacy;
  if (attribute == "case") return LabelClass::Case;
  return std::nullopt;
}

FeatureOrder::FeatureOrder()
    : classes_{LabelClass::Position, LabelClass::Category, LabelClass::Person, LabelClass::Number,
               LabelClass::Gender,   LabelClass::Animacy,  LabelClass::Case} {}

FeatureOrder::FeatureOrder(std::vector<LabelClass> classes) : classes_(std::move(classes)) {
  if (classes_.size() != kClassNames.size())
    throw std::invalid_argument("feature order must list every label class exactly once");
  for (const auto& [cls, name] : kClassNames) {
    if (std::count(classes_.begin(), classes_.end(), cls) != 1)
      throw std::invalid_argument("feature order must list '" + std::string(name) + "' exactly once");
  }
}

std::size_t FeatureOrder::rank(LabelClass c) const {
  return static_cast<std::size_t>(std::find(classes_.begin(), classes_.end(), c) - classes_.begin());
}

std::optional<PathLabel> label_for_attribute(std::string_view attribute,
                                             const std::optional<std::string>& value) {
  auto cls = label_class_of_attribute(attribute);
  if (!cls) return std::nullopt;
  switch (*cls) {
    case LabelClass::Person:
      if (!value) return std::nullopt;
      return PathLabel{*cls, *value + "p"};
    case LabelClass::Animacy:
      return PathLabel{*cls, value ? *value : std::string(attribute)};
    default:
      if (!value) return std::nullopt;
      return PathLabel{*cls, *value};
  }
}

FeaturePath::FeaturePath(std::vector<PathLabel> labels, const FeatureOrder& order)
    : labels_(std::move(labels)) {
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (order.rank(labels_[i - 1].cls) >= order.rank(labels_[i].cls))
      throw std::invalid_argument("path labels repeat a class or violate the feature order");
  }
}

bool FeaturePath::has_position() const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [](const PathLabel& l) { return l.cls == LabelClass::Position; });
}

std::optional<std::string> FeaturePath::label_of(LabelClass c) const {
  for (const auto& l : labels_)
    if (l.cls == c) return l.text;
  return std::nullopt;
}

std::string FeaturePath::str() const {
  std::string out;
  for (const auto& l : labels_) {
    if (!out.empty()) out += "·";
    out += l.text;
  }
  return out;
}

std::size_t shared_prefix_length(const FeaturePath& a, const FeaturePath& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a.labels()[n] == b.labels()[n]) ++n;
  return n;
}

FeaturePath path_of(std::string_view category, const Constraints& attributes,
                    const std::optional<std::string>& position, const FeatureOrder& order,
                    const PathDefaults& defaults) {
  std::vector<PathLabel> labels;
  if (position) labels.push_back({LabelClass::Position, *position});
  labels.push_back({LabelClass::Category, std::string(category)});
  for (const auto& [attr, value] : attributes) {
    if (auto l = label_for_attribute(attr, value)) labels.push_back(std::move(*l));
  }
  auto has = [&](LabelClass c) {
    return std::any_of(labels.begin(), labels.end(), [&](const PathLabel& l) { return l.cls == c; });
  };
  if (defaults.apply) {
    if (!has(LabelClass::Person)) labels.push_back({LabelClass::Person, defaults.person + "p"});
    if (!has(LabelClass::Number)) labels.push_back({LabelClass::Number, defaults.number});
  }
  std::stable_sort(labels.begin(), labels.end(), [&](const PathLabel& a, const PathLabel& b) {
    return order.rank(a.cls) < order.rank(b.cls);
  });
  return FeaturePath(std::move(labels), order);
}

}  // namespace pmg
