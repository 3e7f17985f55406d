#include "pmg/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace pmg {

const Category* Lexicon::category(std::string_view name) const {
  auto it = categories.find(name);
  return it == categories.end() ? nullptr : &it->second;
}

bool Lexicon::is_phase_edge(std::string_view name) const {
  const auto* c = category(name);
  return c && c->cls == CategoryClass::PhaseEdge;
}

std::size_t LexiconResult::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const auto& d) {
    return d.severity == Severity::Error;
  }));
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' || c == '.';
  });
}

bool is_category_token(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

struct Line {
  int number;
  std::vector<std::string> words;
  std::string raw;
};

class Parser {
 public:
  explicit Parser(std::string_view text) { split_lines(text); }

  LexiconResult run() {
    for (const auto& l : lines_) {
      if (l.words.empty()) continue;
      const auto& kw = l.words.front();
      if (kw == "category") declare_category(l);
      else if (kw == "order") declare_order(l);
    }
    check_selects();
    for (const auto& l : lines_) {
      if (l.words.empty()) continue;
      const auto& kw = l.words.front();
      if (kw == "roots") declare_roots(l);
      else if (kw == "item") declare_item(l);
      else if (kw != "category" && kw != "order") error(l.number, "unknown declaration '" + kw + "'");
    }
    if (!roots_seen_) {
      for (const auto& name : lex_.declaration_order)
        if (lex_.is_phase_edge(name)) lex_.roots.push_back(name);
    }
    warn_unused();

    LexiconResult result;
    result.diagnostics = std::move(diags_);
    if (result.error_count() == 0) result.lexicon = std::move(lex_);
    return result;
  }

 private:
  void split_lines(std::string_view text) {
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto raw = text.substr(start, end - start);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++number;
      auto stripped = strip_comment(raw);
      lines_.push_back({number, split_ws(stripped), stripped});
      start = end + 1;
    }
  }

  void error(int line, std::string msg) { diags_.push_back({Severity::Error, line, std::move(msg)}); }
  void warning(int line, std::string msg) { diags_.push_back({Severity::Warning, line, std::move(msg)}); }

  void declare_category(const Line& l) {
    const auto& w = l.words;
    if (w.size() != 3 && !(w.size() == 5 && w[3] == "selects")) {
      error(l.number, "expected 'category <class> <Name> [selects <Name>]'");
      return;
    }
    auto cls = category_class_from(w[1]);
    if (!cls) {
      error(l.number, "unknown category class '" + w[1] + "'");
      return;
    }
    if (!is_category_token(w[2]) || !is_identifier(w[2])) {
      error(l.number, "category names must be capitalized identifiers: '" + w[2] + "'");
      return;
    }
    if (lex_.categories.count(w[2])) {
      error(l.number, "duplicate declaration of category '" + w[2] + "'");
      return;
    }
    Category c{w[2], *cls, std::nullopt};
    if (w.size() == 5) c.select = w[4];
    if (*cls == CategoryClass::Lexical && c.select)
      error(l.number, "lexical category '" + c.name + "' cannot select");
    if (*cls != CategoryClass::Lexical && !c.select)
      error(l.number, std::string(to_string(*cls)) + " category '" + c.name + "' needs a select target");
    decl_line_[c.name] = l.number;
    lex_.declaration_order.push_back(c.name);
    lex_.categories.emplace(c.name, std::move(c));
  }

  void declare_order(const Line& l) {
    std::vector<LabelClass> classes;
    for (std::size_t i = 1; i < l.words.size(); ++i) {
      auto c = label_class_from(l.words[i]);
      if (!c) {
        error(l.number, "unknown label class '" + l.words[i] + "'");
        return;
      }
      classes.push_back(*c);
    }
    try {
      lex_.order = FeatureOrder(std::move(classes));
    } catch (const std::invalid_argument& e) {
      error(l.number, e.what());
    }
  }

  void check_selects() {
    for (const auto& name : lex_.declaration_order) {
      const auto& c = lex_.categories.at(name);
      if (c.select && !lex_.categories.count(*c.select))
        error(decl_line_[name], "category '" + name + "' selects undeclared '" + *c.select + "'");
    }
  }

  void declare_roots(const Line& l) {
    if (roots_seen_) {
      error(l.number, "duplicate roots declaration");
      return;
    }
    roots_seen_ = true;
    for (std::size_t i = 1; i < l.words.size(); ++i) {
      const auto& r = l.words[i];
      if (!lex_.categories.count(r)) error(l.number, "unknown category '" + r + "'");
      else if (!lex_.is_phase_edge(r)) error(l.number, "root '" + r + "' is not a phase edge");
      else lex_.roots.push_back(r);
    }
  }

  bool parse_attribute(int line, std::string_view tok, Constraints& into) {
    auto colon = tok.find(':');
    std::string attr(tok.substr(0, colon));
    std::optional<std::string> value;
    if (colon != std::string_view::npos) value = std::string(tok.substr(colon + 1));
    if (!is_identifier(attr) || is_category_token(attr) || (value && !is_identifier(*value))) {
      error(line, "malformed attribute '" + std::string(tok) + "'");
      return false;
    }
    if (into.count(attr)) {
      error(line, "attribute '" + attr + "' appears twice in one feature");
      return false;
    }
    into.emplace(std::move(attr), std::move(value));
    return true;
  }

  // `Cat` or `Cat:attr:val,attr2`
  std::optional<FeatureTerm> parse_category_ref(int line, std::string_view tok, TermKind kind) {
    auto colon = tok.find(':');
    std::string name(tok.substr(0, colon));
    FeatureTerm t{kind, name, {}, false};
    if (!lex_.categories.count(name)) {
      error(line, "unknown category '" + name + "'");
      return std::nullopt;
    }
    if (colon != std::string_view::npos) {
      auto rest = tok.substr(colon + 1);
      if (rest.empty()) {
        error(line, "malformed attribute list in '" + std::string(tok) + "'");
        return std::nullopt;
      }
      std::size_t start = 0;
      while (start <= rest.size()) {
        auto end = rest.find(',', start);
        if (end == std::string_view::npos) end = rest.size();
        if (!parse_attribute(line, rest.substr(start, end - start), t.constraints)) return std::nullopt;
        start = end + 1;
      }
    }
    return t;
  }

  void declare_item(const Line& l) {
    const auto& raw = l.raw;
    auto q1 = raw.find('"');
    auto q2 = q1 == std::string::npos ? std::string::npos : raw.find('"', q1 + 1);
    if (q2 == std::string::npos) {
      error(l.number, "expected 'item \"<phon>\" : <features>'");
      return;
    }
    LexicalEntry e;
    e.phon = raw.substr(q1 + 1, q2 - q1 - 1);
    auto rest = std::string_view(raw).substr(q2 + 1);
    auto colon = rest.find_first_not_of(" \t");
    if (colon == std::string_view::npos || rest[colon] != ':') {
      error(l.number, "expected ':' after item phon");
      return;
    }
    auto toks = split_ws(rest.substr(colon + 1));
    bool ok = true;
    bool seen_select = false;
    for (const auto& tok : toks) {
      if (tok == "covert") {
        e.covert = true;
      } else if (tok == "proclitic") {
        e.proclitic = true;
      } else if (tok.rfind("binds:", 0) == 0) {
        auto a = anaphor_from(tok.substr(6));
        if (!a) {
          error(l.number, "unknown anaphor kind '" + tok.substr(6) + "'");
          ok = false;
        } else {
          e.anaphor = *a;
        }
      } else if (tok.rfind("sem:", 0) == 0) {
        e.sem = tok.substr(4);
      } else if (tok.front() == '=') {
        auto t = parse_category_ref(l.number, std::string_view(tok).substr(1), TermKind::SelectFeature);
        if (!t) ok = false;
        else e.features.push_back(std::move(*t));
        seen_select = true;
      } else if (tok.front() == '(' && tok.back() == ')' && tok.size() > 2) {
        auto t = parse_category_ref(l.number, std::string_view(tok).substr(1, tok.size() - 2),
                                    TermKind::CategoryFeature);
        if (!t) {
          ok = false;
          continue;
        }
        t->optional = true;
        if (seen_select) {
          error(l.number, "select before category feature '" + tok + "'");
          ok = false;
        }
        e.features.push_back(std::move(*t));
      } else if (is_category_token(tok)) {
        auto t = parse_category_ref(l.number, tok, TermKind::CategoryFeature);
        if (!t) {
          ok = false;
          if (seen_select) error(l.number, "select before category feature '" + tok + "'");
          continue;
        }
        if (seen_select) {
          error(l.number, "select before category feature '" + tok + "'");
          ok = false;
        }
        e.features.push_back(std::move(*t));
      } else {
        if (e.features.empty() || e.features.back().is_select()) {
          error(l.number, "attribute '" + tok + "' does not follow a category feature");
          ok = false;
          continue;
        }
        if (!parse_attribute(l.number, tok, e.features.back().constraints)) ok = false;
      }
    }
    if (!ok) return;
    if (e.features.empty() || e.features.front().is_select()) {
      error(l.number, "item needs at least one category feature");
      return;
    }
    for (std::size_t i = 1; i < e.features.size(); ++i) {
      if (e.features[i].optional) {
        error(l.number, "only the first feature may be optional");
        return;
      }
    }
    if (!e.covert && e.phon.empty()) {
      error(l.number, "overt items need a nonempty phon");
      return;
    }
    if (e.sem.empty()) e.sem = e.phon;
    for (const auto& f : e.features) used_.insert(f.category);
    lex_.entries.push_back(std::move(e));
  }

  void warn_unused() {
    std::set<std::string> reachable = used_;
    for (const auto& [name, c] : lex_.categories)
      if (c.select) reachable.insert(*c.select);
    for (const auto& r : lex_.roots) reachable.insert(r);
    for (const auto& name : lex_.declaration_order)
      if (!reachable.count(name)) warning(decl_line_[name], "category '" + name + "' is never used");
  }

  std::vector<Line> lines_;
  std::vector<LexiconDiagnostic> diags_;
  Lexicon lex_;
  std::map<std::string, int> decl_line_;
  std::set<std::string> used_;
  bool roots_seen_ = false;
};

std::string format_features(const LexicalEntry& e) {
  std::string out;
  auto add = [&](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  for (const auto& f : e.features) {
    if (f.is_select()) {
      add(format_term(f));
      continue;
    }
    add(f.optional ? "(" + f.category + ")" : f.category);
    for (const auto& [attr, value] : f.constraints) add(value ? attr + ":" + *value : attr);
  }
  return out;
}

}  // namespace

LexiconResult parse_lexicon(std::string_view text) { return Parser(text).run(); }

LexiconResult load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    LexiconResult r;
    r.diagnostics.push_back({Severity::Error, 0, "cannot open grammar file '" + path + "'"});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lexicon(ss.str());
}

std::string serialize(const Lexicon& lex) {
  std::ostringstream out;
  if (!(lex.order == FeatureOrder{})) {
    out << "order";
    for (auto c : lex.order.classes()) out << ' ' << to_string(c);
    out << '\n';
  }
  for (const auto& name : lex.declaration_order) {
    const auto& c = lex.categories.at(name);
    out << "category " << to_string(c.cls) << ' ' << c.name;
    if (c.select) out << " selects " << *c.select;
    out << '\n';
  }
  out << "roots";
  for (const auto& r : lex.roots) out << ' ' << r;
  out << '\n';
  for (const auto& e : lex.entries) {
    out << "item \"" << e.phon << "\" : " << format_features(e);
    if (e.sem != e.phon) out << " sem:" << e.sem;
    if (e.anaphor != Anaphor::None) out << " binds:" << to_string(e.anaphor);
    if (e.covert) out << " covert";
    if (e.proclitic) out << " proclitic";
    out << '\n';
  }
  return out.str();
}

std::vector<std::size_t> candidates_for(const Lexicon& lex, const FeatureTerm& expected) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lex.entries.size(); ++i)
    if (split_consumed_unexpected(lex.entries[i], expected, lex.categories)) out.push_back(i);
  return out;
}

std::vector<std::size_t> lookup_by_phon(const Lexicon& lex, std::string_view form) {
  std::vector<std::size_t> out;
  const auto folded = fold_case(form);
  for (std::size_t i = 0; i < lex.entries.size(); ++i) {
    const auto& e = lex.entries[i];
    if (!e.covert && fold_case(e.phon) == folded) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> find_entry(const Lexicon& lex, std::string_view ref) {
  std::size_t k = 1;
  auto slash = ref.rfind('/');
  if (slash != std::string_view::npos) {
    try {
      k = std::stoul(std::string(ref.substr(slash + 1)));
    } catch (...) {
      return std::nullopt;
    }
    ref = ref.substr(0, slash);
  }
  const auto folded = fold_case(ref);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < lex.entries.size(); ++i) {
    const auto& e = lex.entries[i];
    if (fold_case(e.phon) == folded || (e.phon.empty() && fold_case(e.sem) == folded)) {
      if (++seen == k) return i;
    }
  }
  return std::nullopt;
}

}  // namespace pmg
