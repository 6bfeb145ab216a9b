#include "cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "compare.hpp"
#include "langx/ck.hpp"
#include "langx/engine.hpp"
#include "langx/parser.hpp"
#include "langx/subtyping.hpp"

namespace langx {

namespace {

enum class Format { Text, Structured };

struct Options {
  Format format = Format::Text;
  std::string input;
  std::string output;
  std::string term;
  std::string term_file;
  std::string machine = "smallstep";
  std::string ck_file;
  bool trace = false;
  bool with_relations = false;
  std::size_t fuel = kDefaultFuel;
  std::size_t count = 1000;
  std::size_t max_size = 7;
  std::uint64_t seed = 1;
};

bool color_enabled() {
  const char* env = std::getenv("LANGX_COLOR");
  std::string mode = env ? env : "auto";
  if (mode == "always") return true;
  if (mode == "never") return false;
  return isatty(fileno(stderr)) != 0;
}

class Reporter {
 public:
  Reporter(std::ostream& out, std::ostream& err, Format format)
      : out_(out), err_(err), format_(format), color_(format == Format::Text && color_enabled()) {}

  bool structured() const { return format_ == Format::Structured; }

  void diagnostic(const std::string& kind, const std::string& rule, const std::string& message,
                  const SourceSpan* span = nullptr) {
    if (structured()) {
      record(kind, rule, message, span);
      return;
    }
    if (span) err_ << span->file << ':' << span->line << ':' << span->column << ": ";
    err_ << (color_ ? "\033[1;31merror\033[0m" : "error") << ": ";
    if (kind != "ParseError") err_ << kind << ": ";
    err_ << message << '\n';
  }

  void note(const std::string& line) {
    if (!structured()) err_ << line << '\n';
  }

  /// A result line: plain text on stdout, or a record.
  void result(const std::string& kind, const std::string& rule, const std::string& message) {
    if (structured()) record(kind, rule, message, nullptr);
    else out_ << message << '\n';
  }

  void raw(const std::string& text) { out_ << text; }

 private:
  void record(const std::string& kind, const std::string& rule, const std::string& message, const SourceSpan* span) {
    nlohmann::json j;
    j["kind"] = kind;
    j["rule"] = rule;
    j["message"] = message;
    if (span) j["span"] = {{"file", span->file}, {"line", span->line}, {"column", span->column}};
    else j["span"] = nullptr;
    out_ << j.dump() << '\n';
  }

  std::ostream& out_;
  std::ostream& err_;
  Format format_;
  bool color_;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<LanguageSpec> load_spec(const std::string& path, Reporter& rep) {
  auto text = read_file(path);
  if (!text) {
    rep.diagnostic("IOError", "", "cannot read '" + path + "'");
    return std::nullopt;
  }
  auto result = parse_spec(*text, path);
  for (const auto& e : result.errors) rep.diagnostic(e.kind, e.rule, e.message, &e.span);
  if (!result.ok()) return std::nullopt;
  return std::move(result.spec);
}

int emit_spec(const LanguageSpec& spec, const std::vector<InferenceRule>& extra, const Options& opt, Reporter& rep) {
  std::string text = print_spec(spec);
  for (const auto& r : extra) text += "\n" + print_rule(r, spec);
  if (!opt.output.empty()) {
    std::ofstream out(opt.output, std::ios::binary);
    if (!out || !(out << text)) {
      rep.diagnostic("IOError", "", "cannot write '" + opt.output + "'");
      return kExitInvalidSpec;
    }
    rep.result("written", "", "wrote " + opt.output);
    return kExitOk;
  }
  if (rep.structured()) rep.result("spec", "", text);
  else rep.raw(text);
  return kExitOk;
}

std::string render(const std::variant<Term, MachineConfig>& v, const LanguageSpec& spec) {
  if (const auto* t = std::get_if<Term>(&v)) return print_term(*t, spec);
  return print_config(std::get<MachineConfig>(v), spec);
}

void print_trace(const std::vector<TraceStep>& trace, const LanguageSpec& spec, Reporter& rep) {
  for (const auto& s : trace) {
    std::string line = render(s.before, spec) + "  ~~>  " + render(s.after, spec);
    if (rep.structured()) rep.result(to_string(s.kind), s.rule, line);
    else rep.raw("[" + std::string(to_string(s.kind)) + "/" + s.rule + "] " + line + "\n");
  }
}

// --- commands ---------------------------------------------------------------

int cmd_check(const Options& opt, Reporter& rep) {
  auto spec = load_spec(opt.input, rep);
  if (!spec) return kExitInvalidSpec;
  rep.result("ok", "", "ok: " + spec->name + " (" + std::to_string(spec->categories.size()) + " categories, " +
                           std::to_string(spec->rules.size()) + " rules)");
  return kExitOk;
}

int cmd_add_subtyping(const Options& opt, Reporter& rep) {
  auto spec = load_spec(opt.input, rep);
  if (!spec) return kExitInvalidSpec;
  try {
    auto out = add_subtyping(*spec);
    std::vector<InferenceRule> extra;
    if (opt.with_relations) {
      extra = generate_subtype_relation(*spec);
      for (auto& r : generate_join_relation(*spec)) extra.push_back(std::move(r));
    }
    return emit_spec(out, extra, opt, rep);
  } catch (const SubtypingError& e) {
    std::ostringstream msg;
    msg << "type variable '" << e.variable().token() << "' in rule '" << e.rule() << "': " << to_string(e.reason());
    rep.diagnostic("SubtypingError", e.rule(), msg.str());
    rep.note("  occurrences of " + e.variable().token() + ":");
    for (const auto& o : e.occurrences()) {
      std::string path;
      for (auto i : o.path) path += (path.empty() ? "" : ".") + std::to_string(i + 1);
      rep.note("    premise " + std::to_string(o.premise + 1) + ", argument path [" + path + "]: " + to_string(o.variance));
    }
    return kExitTransform;
  } catch (const MissingVariance& e) {
    rep.diagnostic("MissingVariance", "", e.what());
    return kExitTransform;
  }
}

int cmd_derive_ck(const Options& opt, Reporter& rep) {
  auto spec = load_spec(opt.input, rep);
  if (!spec) return kExitInvalidSpec;
  if (!spec->context()) {
    rep.diagnostic("NoContextCategory", "", "no evaluation-context category '" + spec->context_category + "'");
    return kExitInvalidSpec;
  }
  try {
    return emit_spec(derive_ck(*spec), {}, opt, rep);
  } catch (const CkError& e) {
    rep.diagnostic(to_string(e.kind()), "", e.what());
    return kExitTransform;
  }
}

bool has_machine_rules(const LanguageSpec& spec) {
  return std::any_of(spec.rules.begin(), spec.rules.end(), is_machine_rule);
}

int cmd_eval(const Options& opt, Reporter& rep) {
  auto spec = load_spec(opt.input, rep);
  if (!spec) return kExitInvalidSpec;
  std::string source = opt.term;
  if (!opt.term_file.empty()) {
    auto text = read_file(opt.term_file);
    if (!text) {
      rep.diagnostic("IOError", "", "cannot read '" + opt.term_file + "'");
      return kExitInvalidSpec;
    }
    source = *text;
    while (!source.empty() && std::isspace(static_cast<unsigned char>(source.back()))) source.pop_back();
  }
  Term term;
  try {
    term = parse_term(source, *spec);
  } catch (const TermSyntaxError& e) {
    SourceSpan span{opt.term_file.empty() ? "<term>" : opt.term_file, 1, e.column()};
    rep.diagnostic("ParseError", "", e.what(), &span);
    return kExitInvalidSpec;
  }

  if (opt.machine == "ck") {
    LanguageSpec machine_spec;
    try {
      machine_spec = has_machine_rules(*spec) ? *spec : derive_ck(*spec);
    } catch (const CkError& e) {
      rep.diagnostic(to_string(e.kind()), "", e.what());
      return kExitTransform;
    }
    auto r = Machine(machine_spec).run(initial_config(term), opt.fuel, opt.trace);
    print_trace(r.trace, machine_spec, rep);
    if (r.outcome == Outcome::Value) {
      rep.result("value", "", print_term(r.config.focus, machine_spec));
      return kExitOk;
    }
    std::string where = print_config(r.config, machine_spec);
    if (r.outcome == Outcome::Stuck) {
      rep.diagnostic("Stuck", "", "machine stuck at " + where);
      return kExitStuck;
    }
    rep.diagnostic("OutOfFuel", "", "out of fuel after " + std::to_string(r.steps) + " steps at " + where);
    return kExitOutOfFuel;
  }

  auto r = Interpreter(*spec).eval(term, opt.fuel, opt.trace);
  print_trace(r.trace, *spec, rep);
  if (r.outcome == Outcome::Value) {
    rep.result("value", "", print_term(r.term, *spec));
    return kExitOk;
  }
  std::string where = print_term(r.term, *spec);
  if (r.outcome == Outcome::Stuck) {
    rep.diagnostic("Stuck", "", "stuck at " + where);
    return kExitStuck;
  }
  rep.diagnostic("OutOfFuel", "", "out of fuel after " + std::to_string(r.steps) + " steps at " + where);
  return kExitOutOfFuel;
}

std::string describe(const EvalResult& r, const LanguageSpec& spec) {
  return std::string(to_string(r.outcome)) + " " + print_term(r.term, spec);
}

std::string describe(const MachineResult& r, const LanguageSpec& spec) {
  if (r.outcome == Outcome::Value) return std::string("value ") + print_term(r.config.focus, spec);
  return std::string(to_string(r.outcome)) + " " + print_config(r.config, spec);
}

int cmd_compare(const Options& opt, Reporter& rep) {
  auto spec = load_spec(opt.input, rep);
  if (!spec) return kExitInvalidSpec;
  LanguageSpec machine_spec;
  if (!opt.ck_file.empty()) {
    auto m = load_spec(opt.ck_file, rep);
    if (!m) return kExitInvalidSpec;
    if (!has_machine_rules(*m)) {
      rep.diagnostic("NoMachineRules", "", "'" + opt.ck_file + "' contains no machine rules");
      return kExitInvalidSpec;
    }
    machine_spec = std::move(*m);
  } else {
    try {
      machine_spec = derive_ck(*spec);
    } catch (const CkError& e) {
      rep.diagnostic(to_string(e.kind()), "", e.what());
      return kExitTransform;
    }
  }

  CompareOptions co{opt.count, opt.seed, opt.max_size, opt.fuel};
  auto report = compare_semantics(*spec, machine_spec, co);
  if (report.terms.empty())
    rep.note("warning: no well-typed terms found in " + std::to_string(report.attempts) + " attempts");

  std::string summary = std::to_string(report.agreements()) + "/" + std::to_string(report.terms.size()) +
                        " terms agree (" + std::to_string(report.distinct) + " distinct; seed " + std::to_string(opt.seed) + ", max size " +
                        std::to_string(opt.max_size) + ")";
  if (!report.counterexample) {
    rep.result("summary", "", summary);
    return kExitOk;
  }
  const auto& cx = *report.counterexample;
  if (rep.structured()) {
    rep.result("counterexample", "", print_term(cx.shrunk, *spec));
    rep.result("summary", "", summary);
  } else {
    rep.raw(summary + "\n");
    rep.raw("counterexample (size " + std::to_string(cx.shrunk.size()) + "): " + print_term(cx.shrunk, *spec) + "\n");
    rep.raw("  reduction semantics: " + describe(cx.verdict.reduction, *spec) + "\n");
    rep.raw("  machine:             " + describe(cx.verdict.machine, machine_spec) + "\n");
    rep.raw("  found as:            " + print_term(cx.original, *spec) + "\n");
  }
  return kExitDisagreement;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Transformations and interpreters for operational-semantics specifications", "langx"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "Parse and validate a specification");
  check->add_option("input", opt.input, "Specification file")->required();

  auto* subtyping = app.add_subcommand("add-subtyping", "Add algorithmic subtyping to the typing rules");
  subtyping->add_option("input", opt.input, "Specification file")->required();
  subtyping->add_option("-o,--output", opt.output, "Write the result here instead of stdout");
  subtyping->add_flag("--with-relations", opt.with_relations, "Append subtype and join rules");

  auto* ck = app.add_subcommand("derive-ck", "Derive the CK machine of the reduction semantics");
  ck->add_option("input", opt.input, "Specification file")->required();
  ck->add_option("-o,--output", opt.output, "Write the result here instead of stdout");

  auto* eval = app.add_subcommand("eval", "Evaluate a closed term");
  eval->add_option("input", opt.input, "Specification file")->required();
  auto* term_opt = eval->add_option("term", opt.term, "Term to evaluate");
  auto* term_file_opt = eval->add_option("--term-file", opt.term_file, "Read the term from a file");
  term_opt->excludes(term_file_opt);
  eval->add_option("--machine", opt.machine, "Evaluator")
      ->check(CLI::IsMember({"smallstep", "ck"}))
      ->capture_default_str();
  eval->add_flag("--trace", opt.trace, "Print every step");
  eval->add_option("--fuel", opt.fuel, "Maximum number of steps")->check(CLI::PositiveNumber)->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Compare the reduction semantics with its CK machine on random terms");
  cmp->add_option("input", opt.input, "Specification file")->required();
  cmp->add_option("--count", opt.count, "Number of well-typed terms")->check(CLI::PositiveNumber)->capture_default_str();
  cmp->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
  cmp->add_option("--max-size", opt.max_size, "Maximum term size in nodes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmp->add_option("--fuel", opt.fuel, "Step budget of the reduction semantics")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmp->add_option("--ck", opt.ck_file, "Use this machine specification instead of deriving one");

  for (auto* sub : {check, subtyping, ck, eval, cmp}) sub->fallthrough();

  std::vector<std::string> argv_storage{"langx"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (eval->parsed() && opt.term.empty() && opt.term_file.empty()) {
    err << "eval: a term or --term-file is required\n";
    return kExitUsage;
  }

  opt.format = format == "structured" ? Format::Structured : Format::Text;
  Reporter rep(out, err, opt.format);
  if (check->parsed()) return cmd_check(opt, rep);
  if (subtyping->parsed()) return cmd_add_subtyping(opt, rep);
  if (ck->parsed()) return cmd_derive_ck(opt, rep);
  if (eval->parsed()) return cmd_eval(opt, rep);
  return cmd_compare(opt, rep);
}

}  // namespace langx
