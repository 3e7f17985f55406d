#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmg/binding.hpp"
#include "pmg/engine.hpp"
#include "pmg/lexicon.hpp"
#include "pmg/memory.hpp"

#ifndef PMG_GRAMMAR_DIR
#define PMG_GRAMMAR_DIR "grammars"
#endif

namespace pmg::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string grammar;
  std::string backend = "trie";
  std::string trace_format = "text";
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> after_step;
  std::string discourse;
  std::vector<std::string> input;
};

std::vector<std::string> split_words(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    std::istringstream in(a);
    for (std::string w; in >> w;) out.push_back(w);
  }
  return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

// A name without a file behind it refers to the shipped grammars directory.
fs::path resolve(const std::string& name, const std::string& extension) {
  if (fs::exists(name)) return name;
  for (const auto& dir : {fs::path("grammars"), fs::path(PMG_GRAMMAR_DIR)}) {
    auto p = dir / (name + extension);
    if (fs::exists(p)) return p;
  }
  return name;
}

Backend backend_of(const Options& o) {
  auto b = backend_from(o.backend);
  if (!b) throw UsageError("unknown backend '" + o.backend + "' (expected lifo or trie)");
  return *b;
}

DriverOptions driver_options(const Options& o) {
  DriverOptions d;
  if (const char* env = std::getenv("PMG_STEP_BUDGET")) {
    try {
      d.step_budget = std::stoul(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("PMG_STEP_BUDGET is not a number: ") + env);
    }
  }
  d.max_steps = o.max_steps;
  return d;
}

std::vector<std::vector<std::string>> read_discourse(const Options& o) {
  std::vector<std::vector<std::string>> sentences;
  if (!o.discourse.empty()) {
    const auto path = resolve(o.discourse, ".discourse");
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read discourse file '" + o.discourse + "'");
    for (std::string line; std::getline(in, line);) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto words = split_words({line});
      if (!words.empty()) sentences.push_back(std::move(words));
    }
  }
  for (const auto& s : o.input) {
    auto words = split_words({s});
    if (!words.empty()) sentences.push_back(std::move(words));
  }
  if (sentences.empty()) throw UsageError("no sentences given (use --discourse or positional sentences)");
  return sentences;
}

void print_trace(const DerivationTrace& trace, const Options& o, std::ostream& out) {
  out << (o.trace_format == "structured" ? trace_structured(trace) : trace_text(trace));
}

int cmd_parse(const Lexicon& lex, const Options& o, std::ostream& out) {
  const auto tokens = split_words(o.input);
  const auto r = parse(lex, tokens, backend_of(o), driver_options(o));
  if (o.trace_format == "structured") {
    if (r.state) out << trace_structured(r.state->trace);
    nlohmann::ordered_json j;
    j["verdict"] = r.verdict.str();
    j["tokens"] = r.tokens;
    for (const auto& a : r.attempts)
      j["attempts"].push_back({{"root", a.root}, {"accepted", a.accepted}, {"steps", a.steps},
                               {"backtracks", a.backtracks}});
    if (r.state) j["tree"] = tree_string(*r.state);
    out << j.dump() << "\n";
  } else {
    out << "tokens: " << join(tokens) << "\n";
    for (const auto& a : r.attempts)
      out << "root " << a.root << ": " << (a.accepted ? "accepted" : "rejected") << " (" << a.steps
          << " steps explored, " << a.backtracks << " backtracks)\n";
    if (r.state) {
      out << trace_text(r.state->trace);
      out << "tree: " << tree_string(*r.state) << "\n";
    }
    out << "verdict: " << r.verdict.str() << "\n";
  }
  return r.verdict.grammatical ? kOk : kRejected;
}

int cmd_generate(const Lexicon& lex, const Options& o, std::ostream& out) {
  const auto choices = split_words(o.input);
  GenerateResult r = [&] {
    try {
      return generate(lex, choices, backend_of(o), driver_options(o));
    } catch (const EngineError& e) {
      throw UsageError(e.what());
    }
  }();
  print_trace(r.state.trace, o, out);
  if (o.trace_format == "structured") {
    nlohmann::ordered_json j;
    j["verdict"] = r.verdict.str();
    j["surface"] = r.surface;
    j["root"] = r.root;
    out << j.dump() << "\n";
  } else {
    out << "tree: " << tree_string(r.state) << "\n";
    out << "surface: " << join(r.surface) << "\n";
    out << "verdict: " << r.verdict.str() << "\n";
  }
  return r.verdict.grammatical ? kOk : kRejected;
}

int cmd_enumerate(const Lexicon& lex, const Options& o, std::ostream& out) {
  const std::size_t n = o.max_steps.value_or(25);
  if (n < 1) throw UsageError("--max-steps must be at least 1");
  const auto all = enumerate(lex, n, backend_of(o));
  for (const auto& s : all) out << join(s) << "\n";
  out << "# " << all.size() << " surfaces within " << n << " steps\n";
  return kOk;
}

ReferentialMode mode_of(Backend b) { return b == Backend::Lifo ? ReferentialMode::Lifo : ReferentialMode::Trie; }

int cmd_bind(const Lexicon& lex, const Options& o, std::ostream& out) {
  const auto sentences = read_discourse(o);
  const auto backend = backend_of(o);
  const auto r = process_discourse(lex, sentences, backend, mode_of(backend), driver_options(o));
  for (std::size_t i = 0; i < r.parses.size(); ++i)
    out << "sentence " << i + 1 << ": " << join(sentences[i]) << " -> " << r.parses[i].verdict.str() << "\n";
  out << r.table.str();
  bool ok = !r.failed_sentence;
  for (const auto& e : r.table.entries) ok = ok && e.status == BindingStatus::Resolved;
  return ok ? kOk : kRejected;
}

int cmd_trie_dump(const Lexicon& lex, const Options& o, std::ostream& out) {
  const auto backend = backend_of(o);
  if (o.after_step) {
    const auto tokens = split_words(o.input);
    const auto r = parse(lex, tokens, backend, driver_options(o));
    if (!r.state) {
      out << "verdict: " << r.verdict.str() << "\n";
      return kRejected;
    }
    const auto s = replay(lex, r.state->trace, backend, *o.after_step);
    out << "movement memory after step " << s.trace.size() << ":\n" << s.memory.dump();
    return kOk;
  }
  const auto r = process_discourse(lex, read_discourse(o), backend, mode_of(backend), driver_options(o));
  out << r.store_dump;
  return r.failed_sentence ? kRejected : kOk;
}

int cmd_compare(const Lexicon& lex, const Options& o, std::ostream& out) {
  const auto sentences = read_discourse(o);
  const auto opts = driver_options(o);
  const auto trie = process_discourse(lex, sentences, Backend::Trie, ReferentialMode::Trie, opts);
  const auto lifo = process_discourse(lex, sentences, Backend::Lifo, ReferentialMode::Lifo, opts);

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto verdict = [&](const DiscourseResult& r) {
      return i < r.parses.size() ? r.parses[i].verdict.str() : std::string("not-run");
    };
    out << "sentence " << i + 1 << ": trie " << verdict(trie) << ", lifo " << verdict(lifo) << "\n";
  }
  std::vector<std::string> ids;
  for (const auto* t : {&trie.table, &lifo.table})
    for (const auto& e : t->entries)
      if (std::find(ids.begin(), ids.end(), e.anaphor) == ids.end()) ids.push_back(e.anaphor);
  auto show = [](const CoindexTable& t, const std::string& id) {
    const auto* e = t.find(id);
    if (!e) return std::string("-");
    return e->referent() ? *e->referent() : std::string(to_string(e->status));
  };
  std::size_t differ = 0;
  for (const auto& id : ids) {
    const auto a = show(trie.table, id), b = show(lifo.table, id);
    if (a != b) ++differ;
    out << id << ": trie " << a << ", lifo " << b << (a == b ? "" : "  (differ)") << "\n";
  }
  out << differ << " of " << ids.size() << " coindexations differ\n";
  return trie.failed_sentence || lifo.failed_sentence ? kRejected : kOk;
}

// name=[POS/]CAT[:attr:val,...]
struct MetricItem {
  std::string name;
  FeaturePath path;
};

MetricItem parse_metric_item(const std::string& text, const FeatureOrder& order) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("metric item must look like name=[POS/]CAT:attr:val,...");
  std::string rest = text.substr(eq + 1);
  std::optional<std::string> position;
  if (auto slash = rest.find('/'); slash != std::string::npos) {
    position = rest.substr(0, slash);
    rest.erase(0, slash + 1);
  }
  const auto colon = rest.find(':');
  const std::string category = rest.substr(0, colon);
  if (category.empty()) throw UsageError("missing category in '" + text + "'");
  Constraints attrs;
  if (colon != std::string::npos) {
    std::istringstream in(rest.substr(colon + 1));
    for (std::string kv; std::getline(in, kv, ',');) {
      const auto c = kv.find(':');
      if (c == std::string::npos) {
        attrs.emplace(kv, std::nullopt);
      } else {
        attrs.emplace(kv.substr(0, c), kv.substr(c + 1));
      }
    }
  }
  try {
    return {text.substr(0, eq), path_of(category, attrs, position, order)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_metrics(const Lexicon& lex, const Options& o, std::ostream& out) {
  if (o.input.empty()) throw UsageError("metrics needs items, e.g. voi=S/D:pers:2,num:pl tu=S/D:pers:2");
  std::vector<MetricItem> items;
  for (const auto& text : o.input) items.push_back(parse_metric_item(text, lex.order));

  FeatureTrie trie;
  for (const auto& it : items) {
    const auto cost = trie.insertion_cost(it.path);
    trie.insert(it.path, it.name);
    out << "insert " << it.name << " " << it.path.str() << " cost " << cost << "\n";
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const auto c = confusability(items[i].path, items[j].path);
      out << "confusability " << items[i].name << " " << items[j].name << " " << c.num << "/" << c.den << " ("
          << std::fixed << std::setprecision(3) << c.value() << ")\n";
    }
  }
  return kOk;
}

int load(const Options& o, std::ostream& err, std::optional<Lexicon>& lex) {
  const auto path = resolve(o.grammar, ".pmg");
  auto r = load_lexicon(path.string());
  for (const auto& d : r.diagnostics)
    err << path.string() << ":" << d.line << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
        << d.message << "\n";
  if (!r.lexicon) return kGrammarError;
  lex = std::move(r.lexicon);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-based minimalist grammar toolkit", "pmg"};
  app.require_subcommand(1);
  Options o;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Lexicon&, const Options&, std::ostream&);
  };
  const std::vector<Command> commands{
      {"parse", "parse a token sequence and print its derivation", cmd_parse},
      {"generate", "derive from an ordered list of lexical choices", cmd_generate},
      {"enumerate", "list every derivable surface within --max-steps", cmd_enumerate},
      {"bind", "resolve anaphors across a discourse", cmd_bind},
      {"trie-dump", "dump the referential store, or the movement memory with --after-step", cmd_trie_dump},
      {"compare", "run trie and lifo memories on the same discourse", cmd_compare},
      {"metrics", "insertion cost and confusability of feature paths", cmd_metrics},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--grammar", o.grammar, "grammar file or shipped grammar name")->required();
    sub->add_option("--backend", o.backend, "memory backend: lifo or trie")->capture_default_str();
    sub->add_option("--trace-format", o.trace_format, "text or structured")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();
    sub->add_option("--max-steps", o.max_steps, "per-derivation step bound");
    if (c.fn == cmd_trie_dump) sub->add_option("--after-step", o.after_step, "replay a parse up to this step");
    if (c.fn == cmd_bind || c.fn == cmd_trie_dump || c.fn == cmd_compare)
      sub->add_option("--discourse", o.discourse, "one sentence per line, # comments");
    sub->add_option("input", o.input, "tokens, choices, sentences or metric items");
    subs[c.name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "pmg: " << e.what() << "\n";
    return kUsage;
  }

  for (const auto& c : commands) {
    if (!subs[c.name]->parsed()) continue;
    std::optional<Lexicon> lex;
    if (int rc = load(o, err, lex); rc != kOk) return rc;
    try {
      return c.fn(*lex, o, out);
    } catch (const UsageError& e) {
      err << "pmg " << c.name << ": " << e.what() << "\n";
      return kUsage;
    }
  }
  return kUsage;
}

}  // namespace pmg::cli
