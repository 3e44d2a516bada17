#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "kt/cli.hpp"
#include "kt/error.hpp"

namespace kt {

namespace {

struct Token {
  std::string text;
  int column = 1;
  bool quoted = false;
};

std::vector<Token> tokenize(const std::string& line, int lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    Token tok;
    if (c == '"') {
      const std::size_t end = line.find('"', i + 1);
      if (end == std::string::npos) throw ParseError("unterminated string", lineno, static_cast<int>(i) + 1);
      tok.text = line.substr(i + 1, end - i - 1);
      tok.column = static_cast<int>(i) + 2;
      tok.quoted = true;
      i = end + 1;
    } else {
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '"' &&
             line[i] != '#') {
        ++i;
      }
      tok.text = line.substr(start, i - start);
      tok.column = static_cast<int>(start) + 1;
    }
    out.push_back(tok);
  }
  return out;
}

struct Source {
  std::string text;
  int line = 0;
  int column = 0;
};

struct Statement {
  std::vector<Token> tokens;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t tok) const {
    const int col = tok < tokens.size() ? tokens[tok].column : (tokens.empty() ? 1 : tokens.back().column);
    throw ParseError(msg, line, col);
  }

  const Token& word(std::size_t i, const std::string& what) const {
    if (i >= tokens.size()) fail("expected " + what, i);
    if (tokens[i].quoted) fail("expected " + what + ", found a string", i);
    return tokens[i];
  }

  Source string(std::size_t i, const std::string& what) const {
    if (i >= tokens.size() || !tokens[i].quoted) fail("expected quoted " + what, i);
    return Source{tokens[i].text, line, tokens[i].column};
  }

  int integer(std::size_t i, const std::string& what) const {
    const Token& t = word(i, what);
    return to_int(t.text, i);
  }

  int to_int(const std::string& s, std::size_t tok) const {
    if (s.empty() || s.size() > 6 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail("expected a non-negative integer, found '" + s + "'", tok);
    }
    return std::stoi(s);
  }

  void end(std::size_t i) const {
    if (i < tokens.size()) fail("unexpected '" + tokens[i].text + "'", i);
  }
};

bool valid_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// Options after the name: key=value integers and bare flags.
struct Options {
  std::map<std::string, int> values;
  std::set<std::string> flags;
};

Options options(const Statement& st, std::size_t from, const std::set<std::string>& keys,
                const std::set<std::string>& flags) {
  Options o;
  for (std::size_t i = from; i < st.tokens.size(); ++i) {
    const Token& t = st.word(i, "option");
    const std::size_t eq = t.text.find('=');
    if (eq != std::string::npos) {
      const std::string key = t.text.substr(0, eq);
      if (keys.count(key) == 0) st.fail("unknown option '" + key + "'", i);
      if (o.values.count(key) != 0) st.fail("repeated option '" + key + "'", i);
      o.values[key] = st.to_int(t.text.substr(eq + 1), i);
    } else {
      if (flags.count(t.text) == 0) st.fail("unknown option '" + t.text + "'", i);
      if (!o.flags.insert(t.text).second) st.fail("repeated option '" + t.text + "'", i);
    }
  }
  return o;
}

Expr parse_at(const Source& s, const ExprContext& ctx) {
  try {
    return parse_expr(s.text, ctx, s.line, s.column);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), s.line, s.column);
  }
}

}  // namespace

TheorySpec parse_theory(const std::string& text) {
  TheorySpec t;
  t.coords.clear();
  std::optional<int> dim;
  int dim_line = 0;
  bool have_name = false, have_coords = false, have_internal = false, have_metric = false, have_order = false;
  std::optional<Source> lagrangian;
  std::vector<std::pair<Source, Source>> rules;
  std::vector<Source> surfaces;
  std::map<std::string, int> declared;  // name -> line

  auto declare = [&](const Statement& st, std::size_t tok) {
    const Token& n = st.word(tok, "a name");
    if (!valid_name(n.text)) st.fail("invalid name '" + n.text + "'", tok);
    auto [it, fresh] = declared.emplace(n.text, st.line);
    if (!fresh) st.fail("duplicate declaration of '" + n.text + "' (first on line " + std::to_string(it->second) + ")", tok);
    return n.text;
  };
  auto once = [](const Statement& st, bool& seen) {
    if (seen) st.fail("repeated '" + st.tokens[0].text + "' statement", 0);
    seen = true;
  };

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    Statement st{tokenize(raw, lineno), lineno};
    if (st.tokens.empty()) continue;
    const std::string key = st.word(0, "a statement").text;
    if (key == "theory") {
      once(st, have_name);
      t.name = st.word(1, "a theory name").text;
      if (!valid_name(t.name)) st.fail("invalid name '" + t.name + "'", 1);
      st.end(2);
    } else if (key == "dim") {
      bool seen = dim.has_value();
      once(st, seen);
      dim = st.integer(1, "a dimension");
      dim_line = lineno;
      st.end(2);
    } else if (key == "coords") {
      once(st, have_coords);
      std::optional<std::pair<std::string, std::size_t>> mark;
      for (std::size_t i = 1; i < st.tokens.size(); ++i) {
        const Token& w = st.word(i, "a coordinate");
        if (w.text == "@transversal") {
          if (mark) st.fail("second transversal mark", i);
          mark = {st.word(i + 1, "the transversal coordinate").text, i + 1};
          ++i;
          continue;
        }
        if (!valid_name(w.text)) st.fail("invalid coordinate '" + w.text + "'", i);
        if (std::find(t.coords.begin(), t.coords.end(), w.text) != t.coords.end()) {
          st.fail("duplicate coordinate '" + w.text + "'", i);
        }
        t.coords.push_back(w.text);
      }
      if (t.coords.empty()) st.fail("expected at least one coordinate", 1);
      if (mark) {
        const auto it = std::find(t.coords.begin(), t.coords.end(), mark->first);
        if (it == t.coords.end()) st.fail("unknown coordinate '" + mark->first + "'", mark->second);
        t.transversal = static_cast<int>(it - t.coords.begin());
      }
    } else if (key == "internal") {
      once(st, have_internal);
      t.internal_dim = st.integer(1, "the internal dimension");
      st.end(2);
    } else if (key == "field") {
      FieldDecl f;
      f.name = declare(st, 1);
      const Options o = options(st, 2, {"base", "internal"}, {"antisym", "symmetric", "positive"});
      f.base = o.values.count("base") ? o.values.at("base") : 0;
      f.internal = o.values.count("internal") ? o.values.at("internal") : 0;
      f.antisym = o.flags.count("antisym") != 0;
      f.symmetric = o.flags.count("symmetric") != 0;
      f.positive = o.flags.count("positive") != 0;
      t.fields.push_back(f);
    } else if (key == "boundary") {
      BoundaryDecl b;
      b.name = declare(st, 1);
      const Options o = options(st, 2, {"base", "internal"}, {"multiplier", "positive"});
      b.base = o.values.count("base") ? o.values.at("base") : 0;
      b.internal = o.values.count("internal") ? o.values.at("internal") : 0;
      b.multiplier = o.flags.count("multiplier") != 0;
      b.positive = o.flags.count("positive") != 0;
      t.boundary.push_back(b);
    } else if (key == "background") {
      BackgroundDecl b;
      b.name = declare(st, 1);
      const Options o =
          options(st, 2, {"base", "internal"}, {"constant", "time-independent", "symmetric", "positive"});
      b.base = o.values.count("base") ? o.values.at("base") : 0;
      b.internal = o.values.count("internal") ? o.values.at("internal") : 0;
      b.constant = o.flags.count("constant") != 0;
      b.time_independent = o.flags.count("time-independent") != 0;
      b.symmetric = o.flags.count("symmetric") != 0;
      b.positive = o.flags.count("positive") != 0;
      t.backgrounds.push_back(b);
    } else if (key == "function") {
      t.functions.push_back(declare(st, 1));
      st.end(2);
    } else if (key == "metric") {
      once(st, have_metric);
      if (st.word(1, "'split'").text != "split") st.fail("only split metrics are supported", 1);
      t.metric = declare(st, 2);
      const Options o = options(st, 3, {}, {"time-independent"});
      t.metric_time_independent = o.flags.count("time-independent") != 0;
    } else if (key == "lagrangian") {
      if (lagrangian) st.fail("repeated 'lagrangian' statement", 0);
      lagrangian = st.string(1, "expression");
      st.end(2);
    } else if (key == "restrict") {
      const Source lhs = st.string(1, "jet");
      if (st.word(2, "'='").text != "=") st.fail("expected '='", 2);
      rules.emplace_back(lhs, st.string(3, "expression"));
      st.end(4);
    } else if (key == "surface") {
      surfaces.push_back(st.string(1, "expression"));
      st.end(2);
    } else if (key == "jetorder") {
      once(st, have_order);
      t.jet_order = st.integer(1, "a jet order");
      if (t.jet_order < 1 || t.jet_order > 3) st.fail("jet order must be between 1 and 3", 1);
      st.end(2);
    } else {
      st.fail("unknown statement '" + key + "'", 0);
    }
  }
  if (!have_name) throw ParseError("missing 'theory' statement", lineno + 1, 1);
  if (!have_coords) throw ParseError("missing 'coords' statement", lineno + 1, 1);
  if (dim && *dim != t.dim()) {
    throw ParseError("dim " + std::to_string(*dim) + " does not match " + std::to_string(t.dim()) + " coordinates",
                     dim_line, 1);
  }
  if (!lagrangian) throw ParseError("missing 'lagrangian' statement", lineno + 1, 1);

  const ExprContext ctx = t.context();
  t.lagrangian = parse_at(*lagrangian, ctx);
  for (const auto& [lhs, rhs] : rules) {
    const Expr j = parse_at(lhs, ctx);
    if (j.terms().size() != 1 || j.terms()[0].coeff != 1 || j.terms()[0].factors.size() != 1 ||
        j.terms()[0].factors[0].power != 1 || !std::holds_alternative<JetVar>(j.terms()[0].factors[0].atom)) {
      throw ParseError("restriction target must be a single jet", lhs.line, lhs.column);
    }
    t.restrictions.push_back(RestrictRule{std::get<JetVar>(j.terms()[0].factors[0].atom), parse_at(rhs, ctx)});
  }
  for (const Source& s : surfaces) t.surfaces.push_back(parse_at(s, ctx));
  t.validate();
  return t;
}

std::string emit_theory(const TheorySpec& t) {
  const ExprContext ctx = t.context();
  std::ostringstream out;
  auto shape = [&out](int base, int internal) {
    if (base != 0) out << " base=" << base;
    if (internal != 0) out << " internal=" << internal;
  };
  out << "theory " << t.name << "\n";
  out << "dim " << t.dim() << "\n";
  out << "coords";
  for (const auto& c : t.coords) out << " " << c;
  out << " @transversal " << t.coords.at(static_cast<std::size_t>(t.transversal)) << "\n";
  out << "internal " << t.internal_dim << "\n";
  for (const auto& f : t.fields) {
    out << "field " << f.name;
    shape(f.base, f.internal);
    if (f.antisym) out << " antisym";
    if (f.symmetric) out << " symmetric";
    if (f.positive) out << " positive";
    out << "\n";
  }
  for (const auto& b : t.boundary) {
    out << "boundary " << b.name;
    shape(b.base, b.internal);
    if (b.multiplier) out << " multiplier";
    if (b.positive) out << " positive";
    out << "\n";
  }
  for (const auto& b : t.backgrounds) {
    out << "background " << b.name;
    shape(b.base, b.internal);
    if (b.constant) out << " constant";
    if (b.time_independent) out << " time-independent";
    if (b.symmetric) out << " symmetric";
    if (b.positive) out << " positive";
    out << "\n";
  }
  for (const auto& f : t.functions) out << "function " << f << "\n";
  if (!t.metric.empty()) {
    out << "metric split " << t.metric << (t.metric_time_independent ? " time-independent" : "") << "\n";
  }
  out << "jetorder " << t.jet_order << "\n";
  out << "lagrangian \"" << to_text(t.lagrangian, ctx) << "\"\n";
  for (const auto& r : t.restrictions) {
    out << "restrict \"" << jet_text(r.lhs, ctx) << "\" = \"" << to_text(r.rhs, ctx) << "\"\n";
  }
  for (const auto& s : t.surfaces) out << "surface \"" << to_text(s, ctx) << "\"\n";
  return out.str();
}

TheorySpec load_theory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read theory file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_theory(buf.str());
}

}  // namespace kt
