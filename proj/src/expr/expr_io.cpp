#include "kt/expr_io.hpp"

#include <cctype>
#include <sstream>

#include "kt/error.hpp"

namespace kt {

Expr make_symbol(const ExprContext& ctx, const std::string& name, std::vector<int> indices) {
  auto it = ctx.symbols.find(name);
  if (it == ctx.symbols.end()) throw SpecError("undeclared symbol '" + name + "'");
  const SymbolInfo& info = it->second;
  const int n = info.internal + info.base;
  if (static_cast<int>(indices.size()) != n) {
    throw SpecError("symbol '" + name + "' takes " + std::to_string(n) + " indices, got " +
                    std::to_string(indices.size()));
  }
  const int dim = static_cast<int>(ctx.coords.size());
  for (int k = 0; k < n; ++k) {
    const int range = k < info.internal ? ctx.internal_dim : dim;
    if (indices[k] < 0 || indices[k] >= range) {
      throw SpecError("index " + std::to_string(indices[k]) + " of '" + name + "' out of range");
    }
  }
  Rational sign = 1;
  if ((info.antisym || info.symmetric) && n >= 2) {
    if (info.antisym && indices[0] == indices[1]) return {};
    if (indices[0] > indices[1]) {
      std::swap(indices[0], indices[1]);
      if (info.antisym) sign = -1;
    }
  }
  JetVar v;
  v.name = name;
  v.component = std::move(indices);
  v.kind = info.kind;
  v.frozen = info.frozen;
  v.positive = info.positive;
  return Expr(sign) * Expr(v);
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, const ExprContext& ctx, int line, int column)
      : s_(text), ctx_(ctx), line_(line), col0_(column) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col0_ + static_cast<int>(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool peek_raw(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      fail("expected identifier");
    }
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  long integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    if (pos_ - start > 9) fail("integer literal too long");
    return std::stol(s_.substr(start, pos_ - start));
  }

  int primes() {
    int n = 0;
    while (peek_raw('\'')) {
      ++pos_;
      ++n;
    }
    return n;
  }

  Expr expr() {
    Expr e;
    skip_ws();
    if (accept('-')) {
      e = -term();
    } else {
      accept('+');
      e = term();
    }
    for (;;) {
      if (accept('+')) {
        e += term();
      } else if (accept('-')) {
        e -= term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e *= unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by zero");
        }
        if (!d.is_monomial()) {
          pos_ = at;
          fail("divisor must be a monomial");
        }
        e *= pow(d, -1);
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) {
      const bool neg = accept('-');
      const std::size_t at = pos_;
      const long n = integer();
      if (neg && !base.is_monomial()) {
        pos_ = at;
        fail("negative power of a non-monomial");
      }
      return pow(base, static_cast<int>(neg ? -n : n));
    }
    return base;
  }

  int coord_index() {
    skip_ws();
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      const long i = integer();
      if (i >= static_cast<long>(ctx_.coords.size())) fail("coordinate index out of range");
      return static_cast<int>(i);
    }
    const std::string name = ident();
    for (std::size_t i = 0; i < ctx_.coords.size(); ++i) {
      if (ctx_.coords[i] == name) return static_cast<int>(i);
    }
    fail("unknown coordinate '" + name + "'");
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return Expr(integer());
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    const std::size_t start = pos_;
    std::vector<int> derivs;
    std::string name = ident();
    while (name == "d" && peek_raw('[')) {
      ++pos_;
      derivs.push_back(coord_index());
      expect(']');
      name = ident();
    }
    if (derivs.empty() && (name == "sqrt" || ctx_.functions.count(name) != 0)) {
      const int order = primes();
      if (name == "sqrt" && order != 0) fail("sqrt takes no derivative marks");
      expect('(');
      Expr arg = expr();
      expect(')');
      return name == "sqrt" ? Expr::sqrt(arg) : Expr::call(name, order, arg);
    }
    std::vector<int> idx;
    if (peek_raw('[')) {
      ++pos_;
      do {
        skip_ws();
        idx.push_back(static_cast<int>(integer()));
      } while (accept(','));
      expect(']');
    }
    const int p = primes();
    for (int k = 0; k < p; ++k) derivs.push_back(ctx_.transversal);
    Expr sym;
    try {
      sym = make_symbol(ctx_, name, idx);
    } catch (const SpecError& err) {
      pos_ = start;
      fail(err.what());
    }
    if (derivs.empty() || sym.is_zero()) return sym;
    const Term& t = sym.terms()[0];
    const JetVar& v = std::get<JetVar>(t.factors[0].atom);
    return Expr(t.coeff) * Expr(v.with_derivs(derivs));
  }

  const std::string& s_;
  const ExprContext& ctx_;
  int line_;
  int col0_;
  std::size_t pos_ = 0;
};

std::string coord_name(const ExprContext& ctx, int i) {
  if (i >= 0 && i < static_cast<int>(ctx.coords.size())) return ctx.coords[i];
  return std::to_string(i);
}

std::string component_text(const std::vector<int>& c) {
  if (c.empty()) return "";
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(c[i]);
  }
  return s + "]";
}

template <class AtomFn>
std::string sum_text(const Expr& e, AtomFn&& atom_text, const char* mul, bool latex) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const Term& t : e.terms()) {
    Rational c = t.coeff;
    if (first) {
      if (c < 0) {
        out += "-";
        c = -c;
      }
    } else {
      out += c < 0 ? " - " : " + ";
      if (c < 0) c = -c;
    }
    first = false;
    std::string body;
    for (const Factor& f : t.factors) {
      std::string a = atom_text(f.atom);
      if (f.power != 1) {
        a = latex ? a + "^{" + std::to_string(f.power) + "}" : a + "^" + std::to_string(f.power);
      }
      if (!body.empty()) {
        if (latex) {
          if (a[0] != '\\') body += ' ';
        } else {
          body += mul;
        }
      }
      body += a;
    }
    std::string coeff;
    if (latex) {
      if (c.get_den() != 1) {
        coeff = "\\frac{" + c.get_num().get_str() + "}{" + c.get_den().get_str() + "}";
      } else if (c != 1 || body.empty()) {
        coeff = c.get_str();
      }
      if (!coeff.empty() && !body.empty() && body[0] != '\\') coeff += ' ';
    } else if (c != 1 || body.empty()) {
      coeff = c.get_str();
      if (!body.empty()) coeff += mul;
    }
    out += coeff + body;
  }
  return out;
}

const std::map<std::string, std::string>& greek() {
  static const std::map<std::string, std::string> table = {
      {"alpha", "\\alpha"}, {"beta", "\\beta"},   {"gamma", "\\gamma"}, {"lambda", "\\lambda"},
      {"Lambda", "\\Lambda"}, {"mu", "\\mu"},     {"nu", "\\nu"},       {"omega", "\\omega"},
      {"phi", "\\varphi"},  {"psi", "\\psi"},     {"rho", "\\rho"},     {"sigma", "\\sigma"},
      {"xi", "\\xi"},       {"eps", "\\epsilon"}, {"eta", "\\eta"},     {"theta", "\\theta"},
      {"sqrth", "\\sqrt{\\det h}"}};
  return table;
}

std::string latex_name(const std::string& name) {
  auto it = greek().find(name);
  if (it != greek().end()) return it->second;
  // trailing digits become a subscript: phi0 -> \varphi_{0}, F0 -> F_{0}
  std::size_t k = name.size();
  while (k > 0 && std::isdigit(static_cast<unsigned char>(name[k - 1]))) --k;
  if (k > 0 && k < name.size()) return latex_name(name.substr(0, k)) + "_{" + name.substr(k) + "}";
  if (name == "hinv") return "h^{-1}";
  return name.size() == 1 ? name : "\\mathrm{" + name + "}";
}

}  // namespace

Expr parse_expr(const std::string& text, const ExprContext& ctx, int line, int column) {
  return Parser(text, ctx, line, column).parse();
}

std::string jet_text(const JetVar& v, const ExprContext& ctx) {
  std::string s;
  int primes = 0;
  for (int d : v.deriv) {
    if (d == ctx.transversal) {
      ++primes;
    } else {
      s += "d[" + coord_name(ctx, d) + "]";
    }
  }
  s += v.name + component_text(v.component);
  s.append(static_cast<std::size_t>(primes), '\'');
  return s;
}

std::string to_text(const Expr& e, const ExprContext& ctx) {
  auto atom = [&ctx](const Atom& a) -> std::string {
    if (const auto* v = std::get_if<JetVar>(&a)) return jet_text(*v, ctx);
    const Call& c = std::get<Call>(a);
    return c.fn + std::string(static_cast<std::size_t>(c.order), '\'') + "(" +
           to_text(*c.arg, ctx) + ")";
  };
  return sum_text(e, atom, "*", false);
}

std::string jet_latex(const JetVar& v, const ExprContext& ctx) {
  std::string s = latex_name(v.name);
  int dots = 0;
  std::string partial;
  for (int d : v.deriv) {
    if (d == ctx.transversal) {
      ++dots;
    } else {
      partial += "\\partial_{" + coord_name(ctx, d) + "}";
    }
  }
  if (dots == 1) s = "\\dot " + s;
  if (dots == 2) s = "\\ddot " + s;
  if (dots > 2) s = "\\partial_{" + coord_name(ctx, ctx.transversal) + "}^{" + std::to_string(dots) + "}" + s;
  if (!v.component.empty()) {
    std::string sub;
    for (std::size_t i = 0; i < v.component.size(); ++i) {
      if (i) sub += ' ';
      sub += std::to_string(v.component[i]);
    }
    s = "{" + s + "}_{" + sub + "}";
  }
  if (!partial.empty()) s = partial + s;
  return s;
}

std::string to_latex(const Expr& e, const ExprContext& ctx) {
  auto atom = [&ctx](const Atom& a) -> std::string {
    if (const auto* v = std::get_if<JetVar>(&a)) return jet_latex(*v, ctx);
    const Call& c = std::get<Call>(a);
    if (c.fn == "sqrt") return "\\sqrt{" + to_latex(*c.arg, ctx) + "}";
    return latex_name(c.fn) + std::string(static_cast<std::size_t>(c.order), '\'') + "\\left(" +
           to_latex(*c.arg, ctx) + "\\right)";
  };
  return sum_text(e, atom, "", true);
}

}  // namespace kt
