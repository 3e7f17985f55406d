// Categories, attribute-value bundles, lexical entries and feature paths.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmg {

enum class CategoryClass { PhaseEdge, Functional, Lexical };

std::string_view to_string(CategoryClass c);
std::optional<CategoryClass> category_class_from(std::string_view s);

struct Category {
  std::string name;
  CategoryClass cls = CategoryClass::Lexical;
  std::optional<std::string> select;  // the `=x` expansion this category triggers

  bool operator==(const Category&) const = default;
};

using CategoryTable = std::map<std::string, Category, std::less<>>;

/// Attribute -> optional value. A missing value means "present but unvalued";
/// a missing attribute means unconstrained.
using Constraints = std::map<std::string, std::optional<std::string>, std::less<>>;

struct AttributeValue {
  std::string attribute;
  std::optional<std::string> value;
};

/// Value-level unification. Absent attributes are wildcards; shared attributes
/// must agree. Returns nullopt on any clash.
std::optional<Constraints> unify(const Constraints& a, const Constraints& b);

/// True when `a` and `b` unify (no merged result needed).
bool compatible(const Constraints& a, const Constraints& b);

std::string format_constraints(const Constraints& c, char sep = ',');

enum class TermKind { CategoryFeature, SelectFeature };

struct FeatureTerm {
  TermKind kind = TermKind::CategoryFeature;
  std::string category;
  Constraints constraints;
  bool optional = false;  // "(S)", "(F)"

  bool operator==(const FeatureTerm&) const = default;
  bool is_select() const { return kind == TermKind::SelectFeature; }
};

/// Category identity plus constraint unification. Kind and optionality of the
/// result follow `b`.
std::optional<FeatureTerm> unify_terms(const FeatureTerm& a, const FeatureTerm& b);

/// `D:case:nom,pers:1`, `=D:case:acc`, `(S)`.
std::string format_term(const FeatureTerm& t);

enum class Anaphor { None, Reflexive, Pronoun, NullSubject };

std::string_view to_string(Anaphor a);
std::optional<Anaphor> anaphor_from(std::string_view s);

struct LexicalEntry {
  std::vector<FeatureTerm> features;  // category features, then select features
  std::string phon;
  std::string sem;
  bool covert = false;
  bool proclitic = false;
  Anaphor anaphor = Anaphor::None;

  bool operator==(const LexicalEntry&) const = default;

  std::vector<FeatureTerm> category_features() const;
  std::vector<FeatureTerm> select_features() const;
  bool has_category(std::string_view name) const;
  /// Union of the constraints on every category feature.
  Constraints attributes() const;
};

/// Left-most feature; an optional first feature is itself the edge.
const FeatureTerm& edge_of_entry(const LexicalEntry& e);

struct EdgeMatch {
  std::size_t index = 0;  // position of the feature that unified
  FeatureTerm unified;
  bool skipped_optional = false;
};

/// Tries the edge against `expected`; an optional edge that fails is skipped
/// (inactive) and its successor is tried instead.
std::optional<EdgeMatch> match_edge(const LexicalEntry& e, const FeatureTerm& expected);

struct Split {
  std::vector<FeatureTerm> consumed;
  std::vector<FeatureTerm> unexpected;
  std::vector<FeatureTerm> inactive;  // skipped optional features
};

/// Consumed = the matched edge followed by every successor that the previous
/// consumed category selects (T selects V, D selects N). The remaining
/// category features are the unexpected payload handed to Move.
std::optional<Split> split_consumed_unexpected(const LexicalEntry& e, const FeatureTerm& expected,
                                               const CategoryTable& categories);

// Feature paths ------------------------------------------------------------

enum class LabelClass { Position, Category, Person, Number, Gender, Animacy, Case };

std::string_view to_string(LabelClass c);
std::optional<LabelClass> label_class_from(std::string_view s);
/// pers -> Person, num -> Number, gen -> Gender, anim -> Animacy, case -> Case.
std::optional<LabelClass> label_class_of_attribute(std::string_view attribute);

class FeatureOrder {
 public:
  FeatureOrder();  // position, category, person, number, gender, animacy, case
  /// Throws std::invalid_argument unless every class appears exactly once.
  explicit FeatureOrder(std::vector<LabelClass> classes);

  const std::vector<LabelClass>& classes() const { return classes_; }
  std::size_t rank(LabelClass c) const;
  bool operator==(const FeatureOrder&) const = default;

 private:
  std::vector<LabelClass> classes_;
};

struct PathLabel {
  LabelClass cls;
  std::string text;

  bool operator==(const PathLabel&) const = default;
  auto operator<=>(const PathLabel&) const = default;
};

/// Renders an attribute value as a path label: pers:2 -> "2p", anim -> "anim".
std::optional<PathLabel> label_for_attribute(std::string_view attribute,
                                             const std::optional<std::string>& value);

class FeaturePath {
 public:
  FeaturePath() = default;
  /// Throws std::invalid_argument if a class repeats or is out of order.
  FeaturePath(std::vector<PathLabel> labels, const FeatureOrder& order);

  const std::vector<PathLabel>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  bool has_position() const;
  std::optional<std::string> label_of(LabelClass c) const;
  /// "S·D·2p·sg"
  std::string str() const;

  bool operator==(const FeaturePath&) const = default;

 private:
  std::vector<PathLabel> labels_;
};

std::size_t shared_prefix_length(const FeaturePath& a, const FeaturePath& b);

struct PathDefaults {
  bool apply = true;
  std::string person = "3";
  std::string number = "sg";
};

/// Builds the referential path of an item of `category` with `attributes`,
/// merged at `position` (S, F) when it bears one. Attributes outside the
/// label classes are omitted.
FeaturePath path_of(std::string_view category, const Constraints& attributes,
                    const std::optional<std::string>& position, const FeatureOrder& order,
                    const PathDefaults& defaults = {});

}  // namespace pmg
