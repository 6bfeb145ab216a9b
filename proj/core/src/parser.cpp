#include "langx/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace langx {

namespace {

// --- lexing ---------------------------------------------------------------

enum class Tok {
  Ident, Number, LParen, RParen, LBrack, RBrack, Hole, Comma, Colon, Turnstile,
  LongArrow, SubtypeOp, LAngle, RAngle, Equals, JoinOp, MeetOp, Slash, DefEq, Bar,
  VarMarker, End,
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Hole: return "'[.]'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Turnstile: return "'|-'";
    case Tok::LongArrow: return "'-->'";
    case Tok::SubtypeOp: return "'<:'";
    case Tok::LAngle: return "'<'";
    case Tok::RAngle: return "'>'";
    case Tok::Equals: return "'='";
    case Tok::JoinOp: return "'\\/'";
    case Tok::MeetOp: return "'/\\'";
    case Tok::Slash: return "'/'";
    case Tok::DefEq: return "'::='";
    case Tok::Bar: return "'|'";
    case Tok::VarMarker: return "'%var'";
    case Tok::End: return "end of line";
  }
  return "token";
}

struct Token {
  Tok kind;
  std::string text;
  int column;
  bool spaced;  // preceded by whitespace
};

struct SyntaxError {
  std::string message;
  int column;
  std::vector<std::string> expected;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::vector<Token> lex(std::string_view line) {
  static const std::pair<std::string_view, Tok> kFixed[] = {
      {"[.]", Tok::Hole},      {"::=", Tok::DefEq},   {"-->", Tok::LongArrow}, {"%var", Tok::VarMarker},
      {"|-", Tok::Turnstile},  {"<:", Tok::SubtypeOp}, {"\\/", Tok::JoinOp},  {"/\\", Tok::MeetOp},
      {"(", Tok::LParen},      {")", Tok::RParen},    {"[", Tok::LBrack},      {"]", Tok::RBrack},
      {",", Tok::Comma},       {":", Tok::Colon},     {"<", Tok::LAngle},      {">", Tok::RAngle},
      {"=", Tok::Equals},      {"/", Tok::Slash},     {"|", Tok::Bar},
  };
  std::vector<Token> out;
  std::size_t i = 0;
  bool spaced = true;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      spaced = true;
      ++i;
      continue;
    }
    int col = static_cast<int>(i) + 1;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col, spaced});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back({Tok::Number, std::string(line.substr(i, j - i)), col, spaced});
      i = j;
    } else {
      bool matched = false;
      for (const auto& [text, kind] : kFixed) {
        if (line.substr(i, text.size()) == text) {
          out.push_back({kind, std::string(text), col, spaced});
          i += text.size();
          matched = true;
          break;
        }
      }
      if (!matched) throw SyntaxError{std::string("unexpected character '") + c + "'", col, {}};
    }
    spaced = false;
  }
  out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1, true});
  return out;
}

// --- raw syntax -----------------------------------------------------------

struct RawTerm {
  enum class K { Atom, App, ListLit, Hole, Subst } k = K::Atom;
  std::string text;  // atom text or applied head
  std::vector<RawTerm> items;
  int column = 1;
};

struct RawFormula {
  enum class K { Typing, Reduction, Machine, Subtype, TypeEq, Join, Meet, Lookup, NotValue } k;
  std::vector<RawTerm> terms;
  std::string env;                    // Typing root / Lookup environment
  std::vector<std::string> ext_vars;  // Typing: types are the leading terms
  int column = 1;
};

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok t) const { return peek().kind == t; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  Token expect(Tok t) {
    if (!at(t))
      throw SyntaxError{std::string("expected ") + describe(t) + ", found " + found(), peek().column,
                        {describe(t)}};
    return next();
  }

  std::string found() const {
    const auto& p = peek();
    return p.kind == Tok::End ? "end of line" : "'" + p.text + "'";
  }

  bool contains_top_level(Tok t) const {
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      auto k = toks_[i].kind;
      if (k == Tok::LParen || k == Tok::LBrack || k == Tok::LAngle) ++depth;
      if (k == Tok::RParen || k == Tok::RBrack || k == Tok::RAngle) --depth;
      if (k == t && depth == 0) return true;
    }
    return false;
  }

  // A postfix `[v/x]` directly after a term, as opposed to a list literal.
  bool at_substitution() const {
    if (!at(Tok::LBrack) || peek().spaced) return false;
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      auto k = toks_[i].kind;
      if (k == Tok::LBrack || k == Tok::LParen) ++depth;
      if (k == Tok::RBrack || k == Tok::RParen) {
        if (--depth == 0) return false;
      }
      if (k == Tok::Slash && depth == 1) return true;
      if (k == Tok::End) return false;
    }
    return false;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

RawTerm parse_raw_term(TokenStream& ts) {
  RawTerm t;
  t.column = ts.peek().column;
  switch (ts.peek().kind) {
    case Tok::Ident:
      t.k = RawTerm::K::Atom;
      t.text = ts.next().text;
      break;
    case Tok::Hole:
      ts.next();
      t.k = RawTerm::K::Hole;
      break;
    case Tok::LParen: {
      ts.next();
      t.k = RawTerm::K::App;
      t.text = ts.expect(Tok::Ident).text;
      while (!ts.at(Tok::RParen)) {
        if (ts.at(Tok::End)) throw SyntaxError{"unterminated application of '" + t.text + "'", ts.peek().column, {"')'"}};
        t.items.push_back(parse_raw_term(ts));
      }
      ts.next();
      break;
    }
    case Tok::LBrack: {
      ts.next();
      t.k = RawTerm::K::ListLit;
      if (!ts.at(Tok::RBrack)) {
        t.items.push_back(parse_raw_term(ts));
        while (ts.at(Tok::Comma)) {
          ts.next();
          t.items.push_back(parse_raw_term(ts));
        }
      }
      ts.expect(Tok::RBrack);
      break;
    }
    default:
      throw SyntaxError{"expected a term, found " + ts.found(), ts.peek().column, {"identifier", "'('", "'['", "'[.]'"}};
  }
  while (ts.at_substitution()) {
    int col = ts.next().column;
    RawTerm value = parse_raw_term(ts);
    ts.expect(Tok::Slash);
    RawTerm var;
    var.column = ts.peek().column;
    var.text = ts.expect(Tok::Ident).text;
    ts.expect(Tok::RBrack);
    RawTerm s;
    s.k = RawTerm::K::Subst;
    s.column = col;
    s.items = {std::move(t), std::move(value), std::move(var)};
    t = std::move(s);
  }
  return t;
}

RawFormula parse_raw_formula(TokenStream& ts) {
  RawFormula f;
  f.column = ts.peek().column;
  if (ts.at(Tok::LAngle)) {
    f.k = RawFormula::K::Machine;
    for (int side = 0; side < 2; ++side) {
      ts.expect(Tok::LAngle);
      f.terms.push_back(parse_raw_term(ts));
      ts.expect(Tok::Comma);
      f.terms.push_back(parse_raw_term(ts));
      ts.expect(Tok::RAngle);
      if (side == 0) ts.expect(Tok::LongArrow);
    }
  } else if (ts.at(Tok::Ident) && ts.peek().text == "notvalue" && ts.peek(1).kind != Tok::End &&
             ts.peek(1).kind != Tok::SubtypeOp && ts.peek(1).kind != Tok::Equals &&
             ts.peek(1).kind != Tok::LongArrow && ts.peek(1).kind != Tok::Colon) {
    ts.next();
    f.k = RawFormula::K::NotValue;
    f.terms.push_back(parse_raw_term(ts));
  } else if (ts.contains_top_level(Tok::Turnstile)) {
    f.k = RawFormula::K::Typing;
    f.env = ts.expect(Tok::Ident).text;
    while (ts.at(Tok::Comma)) {
      ts.next();
      f.ext_vars.push_back(ts.expect(Tok::Ident).text);
      ts.expect(Tok::Colon);
      f.terms.push_back(parse_raw_term(ts));
    }
    ts.expect(Tok::Turnstile);
    f.terms.push_back(parse_raw_term(ts));
    ts.expect(Tok::Colon);
    f.terms.push_back(parse_raw_term(ts));
  } else {
    f.terms.push_back(parse_raw_term(ts));
    switch (ts.peek().kind) {
      case Tok::SubtypeOp:
        ts.next();
        f.k = RawFormula::K::Subtype;
        f.terms.push_back(parse_raw_term(ts));
        break;
      case Tok::LongArrow:
        ts.next();
        f.k = RawFormula::K::Reduction;
        f.terms.push_back(parse_raw_term(ts));
        break;
      case Tok::Equals: {
        ts.next();
        f.terms.push_back(parse_raw_term(ts));
        f.k = RawFormula::K::TypeEq;
        if (ts.at(Tok::JoinOp) || ts.at(Tok::MeetOp)) {
          Tok op = ts.peek().kind;
          f.k = op == Tok::JoinOp ? RawFormula::K::Join : RawFormula::K::Meet;
          while (ts.at(op)) {
            ts.next();
            f.terms.push_back(parse_raw_term(ts));
          }
        }
        break;
      }
      case Tok::Colon: {
        ts.next();
        f.k = RawFormula::K::Lookup;
        f.terms.push_back(parse_raw_term(ts));
        auto in = ts.expect(Tok::Ident);
        if (in.text != "in") throw SyntaxError{"expected 'in', found '" + in.text + "'", in.column, {"'in'"}};
        f.env = ts.expect(Tok::Ident).text;
        break;
      }
      default:
        throw SyntaxError{"expected a formula operator, found " + ts.found(), ts.peek().column,
                          {"'<:'", "'='", "'-->'", "':'", "'|-'"}};
    }
  }
  if (!ts.at(Tok::End)) throw SyntaxError{"unexpected " + ts.found() + " after formula", ts.peek().column, {"end of line"}};
  return f;
}

// --- resolution -----------------------------------------------------------

enum class Mode { Grammar, Pattern, Object };

class Resolver {
 public:
  Resolver(const LanguageSpec& spec, Mode mode) : spec_(spec), mode_(mode), constants_(spec.constants()) {}

  Term term(const RawTerm& r) const {
    switch (r.k) {
      case RawTerm::K::Hole: return Term::hole();
      case RawTerm::K::Atom: return atom(r);
      case RawTerm::K::ListLit: {
        Term list = Term::constructor("nil");
        for (auto it = r.items.rbegin(); it != r.items.rend(); ++it)
          list = Term::constructor("cons", {term(*it), std::move(list)});
        return list;
      }
      case RawTerm::K::Subst: {
        if (mode_ == Mode::Object) throw SyntaxError{"substitution is not allowed in object terms", r.column, {}};
        return Term::substitution(term(r.items[0]), term(r.items[1]), metavariable(r.items[2]));
      }
      case RawTerm::K::App: {
        std::vector<Term> args;
        if (auto b = spec_.binders.find(r.text); b != spec_.binders.end()) {
          std::size_t pos = static_cast<std::size_t>(b->second - 1);
          if (pos >= r.items.size() || r.items[pos].k != RawTerm::K::Atom)
            throw SyntaxError{"binder '" + r.text + "' expects a variable name at position " +
                                  std::to_string(b->second),
                              r.column, {"identifier"}};
          std::string bound = r.items[pos].text;
          if (mode_ != Mode::Object) bound = metavariable(r.items[pos]).meta.token();
          for (std::size_t i = 0; i < r.items.size(); ++i)
            if (i != pos) args.push_back(term(r.items[i]));
          return Term::binder(r.text, bound, std::move(args));
        }
        for (const auto& it : r.items) args.push_back(term(it));
        return Term::constructor(r.text, std::move(args));
      }
    }
    return Term::hole();
  }

  Term metavariable(const RawTerm& r) const {
    if (r.k != RawTerm::K::Atom) throw SyntaxError{"expected a metavariable", r.column, {"identifier"}};
    if (auto m = try_resolve_metavariable(r.text, spec_)) return Term::metavariable(*m);
    if (mode_ == Mode::Object) return Term::variable(r.text);
    throw SyntaxError{"unknown metavariable '" + r.text + "'", r.column, {}};
  }

  std::string ext_var(const std::string& token, int column) const {
    if (!try_resolve_metavariable(token, spec_))
      throw SyntaxError{"unknown metavariable '" + token + "'", column, {}};
    return token;
  }

  Formula formula(const RawFormula& f) const {
    using K = RawFormula::K;
    auto t = [&](std::size_t i) { return term(f.terms[i]); };
    switch (f.k) {
      case K::Typing: {
        Typing ty;
        ty.env.root = f.env;
        for (std::size_t i = 0; i < f.ext_vars.size(); ++i)
          ty.env.extensions.emplace_back(ext_var(f.ext_vars[i], f.column), t(i));
        ty.subject = t(f.ext_vars.size());
        ty.type = t(f.ext_vars.size() + 1);
        return ty;
      }
      case K::Reduction: return Reduction{t(0), t(1)};
      case K::Machine: return MachineStep{{t(0), t(1)}, {t(2), t(3)}};
      case K::Subtype: return Subtype{t(0), t(1)};
      case K::TypeEq: return TypeEq{t(0), t(1)};
      case K::Join:
      case K::Meet: {
        std::vector<Term> ops;
        for (std::size_t i = 1; i < f.terms.size(); ++i) ops.push_back(t(i));
        if (f.k == K::Join) return Join{t(0), std::move(ops)};
        return Meet{t(0), std::move(ops)};
      }
      case K::Lookup: return Lookup{t(0), t(1), f.env};
      case K::NotValue: return NotValue{t(0)};
    }
    return NotValue{};
  }

 private:
  Term atom(const RawTerm& r) const {
    if (mode_ == Mode::Object) {
      if (constants_.count(r.text)) return Term::constructor(r.text);
      return Term::variable(r.text);
    }
    if (auto m = try_resolve_metavariable(r.text, spec_)) return Term::metavariable(*m);
    if (mode_ == Mode::Grammar || constants_.count(r.text)) return Term::constructor(r.text);
    throw SyntaxError{"unknown metavariable '" + r.text + "'", r.column, {}};
  }

  const LanguageSpec& spec_;
  Mode mode_;
  std::set<std::string> constants_;
};

// --- file structure -------------------------------------------------------

struct RawCategory {
  std::string name;
  std::string metavariable;
  bool identifiers = false;
  std::vector<std::pair<RawTerm, int>> productions;  // with line
  int line = 1;
};

struct RawRule {
  std::string name;
  int line = 1;
  std::vector<std::pair<RawFormula, int>> premises;
  std::optional<std::pair<RawFormula, int>> conclusion;
  bool separator = false;
  bool broken = false;
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view s) {
  auto h = s.find('#');
  return std::string(h == std::string_view::npos ? s : s.substr(0, h));
}

bool is_separator(const std::string& t) {
  return t.size() >= 3 && std::all_of(t.begin(), t.end(), [](char c) { return c == '-'; });
}

std::optional<Variance> parse_mark(const std::string& s) {
  if (s == "co" || s == "covariant") return Variance::Covariant;
  if (s == "contra" || s == "contravariant") return Variance::Contravariant;
  if (s == "inv" || s == "invariant") return Variance::Invariant;
  return std::nullopt;
}

class SpecParser {
 public:
  SpecParser(std::string_view source, std::string file) : source_(source), file_(std::move(file)) {}

  ParseResult run() {
    read_lines();
    ParseResult result;
    if (!saw_header_) {
      if (!header_error_) error(1, 1, "expected 'language' header", {"'language'"});
      result.errors = std::move(errors_);
      return result;
    }
    LanguageSpec spec = resolve();
    for (const auto& d : validate_spec(spec)) {
      ParseError e;
      e.kind = d.kind;
      e.rule = d.rule;
      e.message = d.message;
      e.span = {file_, 1, 1};
      if (!d.rule.empty() && rule_lines_.count(d.rule)) e.span.line = rule_lines_[d.rule];
      else if (!d.category.empty() && category_lines_.count(d.category)) e.span.line = category_lines_[d.category];
      else if (d.kind == "MissingVariance" || d.kind == "VarianceArity") e.span.line = variance_line_;
      errors_.push_back(std::move(e));
    }
    result.errors = std::move(errors_);
    if (result.errors.empty()) result.spec = std::move(spec);
    return result;
  }

 private:
  enum class Section { None, Grammar, Variance, SubtypeBase, Rule };

  void error(int line, int column, std::string msg, std::vector<std::string> expected = {}) {
    errors_.push_back(ParseError{{file_, line, column}, std::move(msg), std::move(expected), "ParseError", current_rule_name()});
  }

  std::string current_rule_name() const { return current_ ? current_->name : std::string(); }

  void read_lines() {
    std::size_t start = 0;
    int lineno = 0;
    while (start <= source_.size()) {
      auto end = source_.find('\n', start);
      if (end == std::string_view::npos) end = source_.size();
      ++lineno;
      handle_line(source_.substr(start, end - start), lineno);
      start = end + 1;
    }
    finish_rule();
  }

  void handle_line(std::string_view raw, int lineno) {
    std::string text = trim(strip_comment(raw));
    if (text.empty()) return;
    int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    std::string word = text.substr(0, text.find_first_of(" \t"));
    std::string rest = trim(text.substr(word.size()));

    if (!saw_header_) {
      if (word != "language" || rest.empty()) {
        if (!header_error_) error(lineno, indent, "expected 'language' header", {"'language'"});
        header_error_ = true;
        return;
      }
      saw_header_ = true;
      name_ = rest;
      return;
    }

    if (word == "language") {
      error(lineno, indent, "duplicate 'language' header");
      return;
    }
    if (word == "grammar" || word == "variance" || word == "subtype-base") {
      finish_rule();
      if (!rest.empty()) error(lineno, indent + static_cast<int>(word.size()) + 1, "unexpected text after '" + word + "'");
      section_ = word == "grammar" ? Section::Grammar : word == "variance" ? Section::Variance : Section::SubtypeBase;
      if (section_ == Section::Variance && variance_line_ == 1) variance_line_ = lineno;
      return;
    }
    if (word == "rule") {
      finish_rule();
      section_ = Section::Rule;
      current_ = RawRule{};
      current_->line = lineno;
      current_->name = rest;
      if (rest.empty() || rest.find_first_of(" \t") != std::string::npos) {
        error(lineno, indent, "expected a rule name", {"rule name"});
        current_->broken = true;
      }
      return;
    }
    if (word == "binder" || word == "contexts") {
      finish_rule();
      section_ = Section::None;
      directive(word, raw, lineno);
      return;
    }

    if (section_ == Section::Rule && is_separator(text)) {
      rule_separator(lineno, indent);
      return;
    }
    try {
      TokenStream ts(lex(raw));
      switch (section_) {
        case Section::None: error(lineno, indent, "unexpected line outside of any section"); break;
        case Section::Grammar: grammar_line(ts, lineno); break;
        case Section::Variance: variance_line(ts, lineno); break;
        case Section::SubtypeBase: base_line(ts, lineno); break;
        case Section::Rule: rule_line(ts, lineno, indent); break;
      }
    } catch (const SyntaxError& e) {
      error(lineno, e.column, e.message, e.expected);
      if (section_ == Section::Rule && current_) current_->broken = true;
    }
  }

  void directive(const std::string& word, std::string_view raw, int lineno) {
    try {
      TokenStream ts(lex(raw));
      ts.next();
      auto name = ts.expect(Tok::Ident);
      if (word == "binder") {
        auto pos = ts.expect(Tok::Number);
        binders_[name.text] = std::stoi(pos.text);
      } else {
        contexts_ = name.text;
      }
      ts.expect(Tok::End);
    } catch (const SyntaxError& e) {
      error(lineno, e.column, e.message, e.expected);
    }
  }

  void grammar_line(TokenStream& ts, int lineno) {
    if (ts.at(Tok::Bar)) {
      if (categories_.empty()) throw SyntaxError{"continuation line without a category", ts.peek().column, {}};
      productions(ts, categories_.back(), lineno);
      return;
    }
    RawCategory c;
    c.line = lineno;
    c.name = ts.expect(Tok::Ident).text;
    c.metavariable = ts.expect(Tok::Ident).text;
    ts.expect(Tok::DefEq);
    if (ts.at(Tok::End)) throw SyntaxError{"expected at least one production", ts.peek().column, {"term"}};
    categories_.push_back(std::move(c));
    production(ts, categories_.back(), lineno);
    productions(ts, categories_.back(), lineno);
  }

  void productions(TokenStream& ts, RawCategory& c, int lineno) {
    while (ts.at(Tok::Bar)) {
      ts.next();
      production(ts, c, lineno);
    }
    ts.expect(Tok::End);
  }

  void production(TokenStream& ts, RawCategory& c, int lineno) {
    if (ts.at(Tok::VarMarker)) {
      ts.next();
      c.identifiers = true;
      return;
    }
    c.productions.emplace_back(parse_raw_term(ts), lineno);
  }

  void variance_line(TokenStream& ts, int lineno) {
    auto ctor = ts.expect(Tok::Ident);
    ts.expect(Tok::Colon);
    std::vector<Variance> marks;
    while (ts.at(Tok::Ident)) {
      auto m = ts.next();
      auto v = parse_mark(m.text);
      if (!v) throw SyntaxError{"unknown variance mark '" + m.text + "'", m.column, {"co", "contra", "inv"}};
      marks.push_back(*v);
    }
    ts.expect(Tok::End);
    if (marks.empty()) throw SyntaxError{"expected at least one variance mark", ts.peek().column, {"co", "contra", "inv"}};
    if (variance_.count(ctor.text)) throw SyntaxError{"variance of '" + ctor.text + "' declared twice", ctor.column, {}};
    variance_[ctor.text] = std::move(marks);
    (void)lineno;
  }

  void base_line(TokenStream& ts, int) {
    auto a = ts.expect(Tok::Ident).text;
    ts.expect(Tok::SubtypeOp);
    auto b = ts.expect(Tok::Ident).text;
    ts.expect(Tok::End);
    base_.emplace_back(a, b);
  }

  void rule_separator(int lineno, int indent) {
    if (!current_) return;
    if (current_->separator) {
      error(lineno, indent, "second separator in rule '" + current_->name + "'");
      current_->broken = true;
    }
    current_->separator = true;
  }

  void rule_line(TokenStream& ts, int lineno, int indent) {
    if (!current_) return;
    RawFormula f = parse_raw_formula(ts);
    if (current_->conclusion) {
      error(lineno, indent, "unexpected line after the conclusion of rule '" + current_->name + "'");
      current_->broken = true;
      return;
    }
    if (current_->separator) {
      current_->conclusion.emplace(std::move(f), lineno);
    } else {
      current_->premises.emplace_back(std::move(f), lineno);
    }
  }

  void finish_rule() {
    if (!current_) return;
    RawRule r = std::move(*current_);
    current_.reset();
    if (!r.separator && !r.conclusion && !r.premises.empty()) {
      // An axiom written without a separator line: its only formula is the conclusion.
      if (r.premises.size() == 1) {
        r.conclusion = std::move(r.premises.front());
        r.premises.clear();
      }
    }
    if (!r.conclusion) {
      if (!r.broken) error(r.line, 1, "rule '" + r.name + "' has no conclusion", {"conclusion formula"});
      r.broken = true;
    }
    rules_.push_back(std::move(r));
  }

  LanguageSpec resolve() {
    LanguageSpec spec;
    spec.name = name_;
    spec.binders = binders_;
    if (contexts_) spec.context_category = *contexts_;
    spec.variance = variance_;
    spec.base_subtypes = base_;
    for (const auto& rc : categories_) {
      spec.categories.push_back(GrammarCategory{rc.name, rc.metavariable, rc.identifiers, {}});
      category_lines_.emplace(rc.name, rc.line);
    }
    Resolver grammar(spec, Mode::Grammar);
    for (std::size_t i = 0; i < categories_.size(); ++i) {
      for (const auto& [raw, line] : categories_[i].productions) {
        try {
          spec.categories[i].productions.push_back(grammar.term(raw));
        } catch (const SyntaxError& e) {
          error(line, e.column, e.message, e.expected);
        }
      }
    }
    Resolver patterns(spec, Mode::Pattern);
    for (const auto& rr : rules_) {
      rule_lines_.emplace(rr.name, rr.line);
      if (rr.broken) continue;
      InferenceRule rule{rr.name, {}, {}};
      bool ok = true;
      auto convert = [&](const RawFormula& f, int line) -> std::optional<Formula> {
        try {
          return patterns.formula(f);
        } catch (const SyntaxError& e) {
          error(line, e.column, e.message, e.expected);
          ok = false;
          return std::nullopt;
        }
      };
      for (const auto& [f, line] : rr.premises)
        if (auto x = convert(f, line)) rule.premises.push_back(std::move(*x));
      if (auto x = convert(rr.conclusion->first, rr.conclusion->second)) rule.conclusion = std::move(*x);
      if (ok) spec.rules.push_back(std::move(rule));
    }
    return spec;
  }

  std::string_view source_;
  std::string file_;
  std::vector<ParseError> errors_;
  bool saw_header_ = false;
  bool header_error_ = false;
  std::string name_;
  Section section_ = Section::None;
  std::map<std::string, int> binders_;
  std::optional<std::string> contexts_;
  std::vector<RawCategory> categories_;
  VarianceTable variance_;
  std::vector<std::pair<std::string, std::string>> base_;
  std::vector<RawRule> rules_;
  std::optional<RawRule> current_;
  std::map<std::string, int> rule_lines_;
  std::map<std::string, int> category_lines_;
  int variance_line_ = 1;
};

// --- printing -------------------------------------------------------------

bool is_list(const Term& t) {
  const Term* cur = &t;
  while (cur->kind == TermKind::Constructor && cur->name == "cons" && cur->args.size() == 2) cur = &cur->args[1];
  return cur->is_constant("nil") && &t != cur;
}

void print(std::ostream& os, const Term& t, const LanguageSpec& spec) {
  switch (t.kind) {
    case TermKind::Metavariable: os << t.meta.token(); return;
    case TermKind::Variable: os << t.name; return;
    case TermKind::Hole: os << "[.]"; return;
    case TermKind::Substitution:
      print(os, t.args[0], spec);
      os << '[';
      print(os, t.args[1], spec);
      os << '/';
      print(os, t.args[2], spec);
      os << ']';
      return;
    case TermKind::Constructor:
      if (t.args.empty()) {
        os << t.name;
        return;
      }
      if (is_list(t)) {
        os << '[';
        const Term* cur = &t;
        bool first = true;
        while (!cur->is_constant("nil")) {
          if (!first) os << ", ";
          first = false;
          print(os, cur->args[0], spec);
          cur = &cur->args[1];
        }
        os << ']';
        return;
      }
      os << '(' << t.name;
      for (const auto& a : t.args) {
        os << ' ';
        print(os, a, spec);
      }
      os << ')';
      return;
    case TermKind::Binder: {
      auto it = spec.binders.find(t.name);
      std::size_t pos = it == spec.binders.end() ? 0 : static_cast<std::size_t>(it->second - 1);
      os << '(' << t.name;
      for (std::size_t i = 0; i <= t.args.size(); ++i) {
        if (i == pos) os << ' ' << t.bound;
        if (i < t.args.size()) {
          os << ' ';
          print(os, t.args[i], spec);
        }
      }
      os << ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const ParseError& e) {
  std::ostringstream os;
  os << e.span.file << ':' << e.span.line << ':' << e.span.column << ": ";
  if (e.kind != "ParseError") os << e.kind << ": ";
  os << e.message;
  return os.str();
}

ParseResult parse_spec(std::string_view source, std::string file) {
  return SpecParser(source, std::move(file)).run();
}

namespace {

template <class Fn>
auto with_tokens(std::string_view text, Fn&& fn) {
  try {
    TokenStream ts(lex(text));
    return fn(ts);
  } catch (const SyntaxError& e) {
    throw TermSyntaxError(e.message, e.column);
  }
}

Term parse_single(std::string_view text, const LanguageSpec& spec, Mode mode) {
  return with_tokens(text, [&](TokenStream& ts) {
    RawTerm raw = parse_raw_term(ts);
    if (!ts.at(Tok::End)) throw SyntaxError{"unexpected " + ts.found() + " after term", ts.peek().column, {}};
    return Resolver(spec, mode).term(raw);
  });
}

}  // namespace

Term parse_term(std::string_view text, const LanguageSpec& spec) { return parse_single(text, spec, Mode::Object); }

Term parse_pattern(std::string_view text, const LanguageSpec& spec) { return parse_single(text, spec, Mode::Pattern); }

Formula parse_formula(std::string_view text, const LanguageSpec& spec) {
  return with_tokens(text, [&](TokenStream& ts) { return Resolver(spec, Mode::Pattern).formula(parse_raw_formula(ts)); });
}

std::string print_term(const Term& t, const LanguageSpec& spec) {
  std::ostringstream os;
  print(os, t, spec);
  return os.str();
}

std::string print_config(const MachineConfig& c, const LanguageSpec& spec) {
  return "<" + print_term(c.focus, spec) + " , " + print_term(c.continuation, spec) + ">";
}

std::string print_formula(const Formula& f, const LanguageSpec& spec) {
  auto p = [&](const Term& t) { return print_term(t, spec); };
  auto chain = [&](const Term& result, const std::vector<Term>& ops, const char* op) {
    std::string s = p(result) + " =";
    for (std::size_t i = 0; i < ops.size(); ++i) s += (i ? std::string(" ") + op + " " : " ") + p(ops[i]);
    return s;
  };
  if (const auto* x = std::get_if<Typing>(&f)) {
    std::string s = x->env.root;
    for (const auto& [v, ty] : x->env.extensions) s += ", " + v + " : " + p(ty);
    return s + " |- " + p(x->subject) + " : " + p(x->type);
  }
  if (const auto* x = std::get_if<Reduction>(&f)) return p(x->lhs) + " --> " + p(x->rhs);
  if (const auto* x = std::get_if<MachineStep>(&f))
    return print_config(x->lhs, spec) + " --> " + print_config(x->rhs, spec);
  if (const auto* x = std::get_if<Subtype>(&f)) return p(x->sub) + " <: " + p(x->super);
  if (const auto* x = std::get_if<TypeEq>(&f)) return p(x->left) + " = " + p(x->right);
  if (const auto* x = std::get_if<Join>(&f)) return chain(x->result, x->operands, "\\/");
  if (const auto* x = std::get_if<Meet>(&f)) return chain(x->result, x->operands, "/\\");
  if (const auto* x = std::get_if<Lookup>(&f)) return p(x->var) + " : " + p(x->type) + " in " + x->env;
  if (const auto* x = std::get_if<NotValue>(&f)) return "notvalue " + p(x->term);
  return {};
}

std::string print_rule(const InferenceRule& r, const LanguageSpec& spec) {
  std::string s = "rule " + r.name + "\n";
  for (const auto& p : r.premises) s += "  " + print_formula(p, spec) + "\n";
  s += "  --------------------------------\n";
  s += "  " + print_formula(r.conclusion, spec) + "\n";
  return s;
}

std::string print_spec(const LanguageSpec& spec) {
  std::ostringstream os;
  os << "language " << spec.name << "\n";
  if (!spec.binders.empty() || spec.context_category != kDefaultContextCategory) {
    os << "\n";
    for (const auto& [name, pos] : spec.binders) os << "binder " << name << ' ' << pos << "\n";
    if (spec.context_category != kDefaultContextCategory) os << "contexts " << spec.context_category << "\n";
  }
  if (!spec.categories.empty()) {
    os << "\ngrammar\n";
    for (const auto& c : spec.categories) {
      os << "  " << c.name << ' ' << c.metavariable << " ::=";
      bool first = true;
      if (c.identifiers) {
        os << " %var";
        first = false;
      }
      for (const auto& p : c.productions) {
        os << (first ? " " : " | ") << print_term(p, spec);
        first = false;
      }
      os << "\n";
    }
  }
  if (!spec.variance.empty()) {
    os << "\nvariance\n";
    for (const auto& [ctor, marks] : spec.variance) {
      os << "  " << ctor << " :";
      for (auto m : marks) os << ' ' << to_string(m);
      os << "\n";
    }
  }
  if (!spec.base_subtypes.empty()) {
    os << "\nsubtype-base\n";
    for (const auto& [a, b] : spec.base_subtypes) os << "  " << a << " <: " << b << "\n";
  }
  for (const auto& r : spec.rules) os << "\n" << print_rule(r, spec);
  return os.str();
}

}  // namespace langx
