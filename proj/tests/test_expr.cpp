#include <random>

#include "doctest.h"
#include "kt/error.hpp"
#include "kt/expr.hpp"
#include "kt/expr_io.hpp"

using namespace kt;

namespace {

ExprContext context() {
  ExprContext ctx;
  ctx.coords = {"t", "x", "y"};
  ctx.transversal = 0;
  ctx.internal_dim = 3;
  ctx.symbols["q"] = SymbolInfo{SymbolKind::Field, 1, 0};
  ctx.symbols["phi"] = SymbolInfo{};
  ctx.symbols["psi"] = SymbolInfo{};
  SymbolInfo pos;
  pos.kind = SymbolKind::Constant;
  pos.positive = true;
  pos.frozen = ~0u;
  ctx.symbols["x"] = pos;
  SymbolInfo m;
  m.kind = SymbolKind::Constant;
  m.frozen = ~0u;
  ctx.symbols["m"] = m;
  ctx.symbols["w"] = m;
  ctx.functions = {"V"};
  return ctx;
}

Expr P(const std::string& s) {
  static const ExprContext ctx = context();
  return parse_expr(s, ctx);
}

std::string T(const Expr& e) {
  static const ExprContext ctx = context();
  return to_text(e, ctx);
}

// Unnormalized expression tree evaluated by direct recursion; the oracle for
// normalization.
struct Node {
  char op;  // '+', '*', 'v', 'c', 's' (sqrt)
  std::vector<Node> kids;
  JetVar var;
  Rational value;
};

double eval_tree(const Node& n, const std::map<JetVar, Number>& pt) {
  switch (n.op) {
    case '+': {
      double s = 0;
      for (const auto& k : n.kids) s += eval_tree(k, pt);
      return s;
    }
    case '*': {
      double s = 1;
      for (const auto& k : n.kids) s *= eval_tree(k, pt);
      return s;
    }
    case 's':
      return std::sqrt(eval_tree(n.kids[0], pt));
    case 'v':
      return to_double(pt.at(n.var));
    default:
      return n.value.get_d();
  }
}

Expr tree_expr(const Node& n) {
  switch (n.op) {
    case '+': {
      Expr s;
      for (const auto& k : n.kids) s += tree_expr(k);
      return s;
    }
    case '*': {
      Expr s = 1;
      for (const auto& k : n.kids) s *= tree_expr(k);
      return s;
    }
    case 's':
      return Expr::sqrt(tree_expr(n.kids[0]));
    case 'v':
      return Expr(n.var);
    default:
      return Expr(n.value);
  }
}

std::vector<JetVar> pool() {
  std::vector<JetVar> vs;
  for (const char* name : {"phi", "psi"}) {
    JetVar v = JetVar::field(name);
    vs.push_back(v);
    vs.push_back(v.with_deriv(0));
    vs.push_back(v.with_deriv(1));
    vs.push_back(v.with_deriv(0).with_deriv(2));
  }
  return vs;
}

Node random_tree(std::mt19937& rng, int depth, bool allow_sqrt) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int r = pick(rng);
  static const std::vector<JetVar> vars = pool();
  if (depth == 0 || r < 3) {
    if (r % 2 == 0) {
      std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
      return Node{'c', {}, {}, make_rational(num(rng), den(rng))};
    }
    std::uniform_int_distribution<std::size_t> vi(0, vars.size() - 1);
    return Node{'v', {}, vars[vi(rng)], 0};
  }
  if (allow_sqrt && r == 9) {
    // sqrt of a sum of squares plus one stays in the domain
    Node a = random_tree(rng, depth - 1, false);
    Node sq{'*', {a, a}, {}, 0};
    return Node{'s', {Node{'+', {sq, Node{'c', {}, {}, 1}}, {}, 0}}, {}, 0};
  }
  Node n{r < 6 ? '+' : '*', {}, {}, 0};
  std::uniform_int_distribution<int> arity(2, 3);
  const int k = arity(rng);
  for (int i = 0; i < k; ++i) n.kids.push_back(random_tree(rng, depth - 1, allow_sqrt));
  return n;
}

std::map<JetVar, Number> random_point(std::mt19937& rng, const std::set<JetVar>& vars) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  std::map<JetVar, Number> pt;
  for (const auto& v : vars) pt[v] = Rational(make_rational(num(rng), den(rng)));
  return pt;
}

std::set<JetVar> all_pool() {
  auto vs = pool();
  std::set<JetVar> s(vs.begin(), vs.end());
  for (const auto& v : vs) {
    for (int c = 0; c < 3; ++c) {
      s.insert(v.with_deriv(c));
      for (int c2 = 0; c2 < 3; ++c2) s.insert(v.with_deriv(c).with_deriv(c2));
    }
  }
  return s;
}

double num(const Number& n) { return to_double(n); }

}  // namespace

TEST_CASE("normalize: ring identities") {
  CHECK(((P("q[0]") + P("q[0]")) - P("2*q[0]")).is_zero());
  const Expr dot = P("q[0]'*q[0]' + q[1]'*q[1]' + q[2]'*q[2]'");
  CHECK(dot.terms().size() == 3);
  CHECK(T(dot) == "q[0]'^2 + q[1]'^2 + q[2]'^2");
  CHECK(normalize(dot) == dot);
  CHECK(T(P("(phi + psi)^2 - phi^2 - psi^2")) == "2*phi*psi");
}

TEST_CASE("normalize: sqrt of a declared-positive symbol") {
  CHECK(T(P("1/2*sqrt(x)^2")) == "1/2*x");
  CHECK(T(P("sqrt(x)^3")) == "x*sqrt(x)");
  CHECK(T(P("sqrt(x)^-3")) == "x^-2*sqrt(x)");
  CHECK(T(P("sqrt(4/9)")) == "2/3");
  // no positivity declared: left alone
  CHECK(T(P("sqrt(phi)^2")) == "sqrt(phi)^2");

  std::mt19937 rng(11);
  const Expr lhs = P("1/2*sqrt(x)^2");
  const Expr rhs = P("1/2*x");
  JetVar x = JetVar::constant("x").as_positive();
  for (int i = 0; i < 20; ++i) {
    std::uniform_int_distribution<int> n(1, 50), d(1, 9);
    const Rational xv = make_rational(n(rng), d(rng));
    std::map<JetVar, Number> pt{{x, xv}};
    // oracle: floating sqrt squared
    const double oracle = 0.5 * std::sqrt(xv.get_d()) * std::sqrt(xv.get_d());
    CHECK(num(evaluate(rhs, pt)) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(num(evaluate(lhs, pt)) == doctest::Approx(oracle).epsilon(1e-14));
  }
}

TEST_CASE("normalize: resource limit") {
  NormalizeOptions small;
  small.max_coeff_bits = 64;
  Expr big = Expr(Rational(mpz_class(1) << 80)) * P("phi");
  CHECK_THROWS_AS(normalize(Expr::raw(big.terms()), small), ResourceLimitError);
}

TEST_CASE("diff_jet") {
  const JetVar qd = JetVar::field("q", {0}).with_deriv(0);
  CHECK(T(diff_jet(P("1/2*m*q[0]'^2"), qd)) == "m*q[0]'");
  const Expr speed = P("sqrt(q[0]'^2 + q[1]'^2 + q[2]'^2)");
  const JetVar q1 = JetVar::field("q", {1}).with_deriv(0);
  CHECK(diff_jet(speed, q1) == P("q[1]'") * pow(speed, -1));
  CHECK(T(diff_jet(P("V(q[0])"), JetVar::field("q", {0}))) == "V'(q[0])");
  CHECK(diff_jet(P("m*phi"), JetVar::field("psi")).is_zero());
}

TEST_CASE("total_derivative") {
  CHECK(total_derivative(P("q[0]'^2"), 0) == P("2*q[0]'*q[0]''"));
  CHECK(total_derivative(P("m*w + 3"), 0).is_zero());
  CHECK_THROWS_AS(total_derivative(P("d[x]d[y]phi'"), 0), OrderLimitError);
  CHECK_NOTHROW(total_derivative(P("d[x]d[y]phi'"), 0, 4));

  // d/dt (q'/|q'|) = q''/|q'| - q' (q'.q'')/|q'|^3
  const Expr s = P("sqrt(q[0]'^2 + q[1]'^2 + q[2]'^2)");
  const Expr qq = P("q[0]'*q[0]'' + q[1]'*q[1]'' + q[2]'*q[2]''");
  for (int i = 0; i < 3; ++i) {
    const std::string c = std::to_string(i);
    const Expr u = P("q[" + c + "]'") * pow(s, -1);
    const Expr expected = P("q[" + c + "]''") * pow(s, -1) - P("q[" + c + "]'") * qq * pow(s, -3);
    CHECK(total_derivative(u, 0) == expected);
  }
}

TEST_CASE("evaluate") {
  const std::map<JetVar, Number> pt{{JetVar::constant("m"), Rational(2)},
                                    {JetVar::field("q", {0}).with_deriv(0), Rational(3)}};
  CHECK(std::get<Rational>(evaluate(P("m*q[0]'^2"), pt)) == 18);
  const std::map<JetVar, Number> none;
  CHECK(std::get<Rational>(evaluate(Expr(), none)) == 0);
  CHECK_THROWS_AS(evaluate(P("phi"), none), UnboundError);
  CHECK_THROWS_AS(evaluate(P("sqrt(phi)"), {{JetVar::field("phi"), Rational(-1)}}), DomainError);
  CHECK(std::get<Rational>(evaluate(P("sqrt(phi)"), {{JetVar::field("phi"), Rational(9, 4)}})) ==
        Rational(3, 2));
  CHECK(std::holds_alternative<double>(evaluate(P("sqrt(phi)"), {{JetVar::field("phi"), Rational(2)}})));
}

TEST_CASE("property: evaluate(normalize(e)) equals direct tree evaluation") {
  std::mt19937 rng(2024);
  const auto vars = all_pool();
  for (int trial = 0; trial < 40; ++trial) {
    const Node tree = random_tree(rng, 4, true);
    const Expr e = tree_expr(tree);
    for (int k = 0; k < 20; ++k) {
      const auto pt = random_point(rng, vars);
      const double oracle = eval_tree(tree, pt);
      CHECK(num(evaluate(e, pt)) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: normalize is idempotent and a ring homomorphism") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const Expr a = tree_expr(random_tree(rng, 3, true));
    const Expr b = tree_expr(random_tree(rng, 3, true));
    CHECK(normalize(a) == a);
    const Expr sum_raw = Expr::raw([&] {
      auto ts = a.terms();
      ts.insert(ts.end(), b.terms().begin(), b.terms().end());
      return ts;
    }());
    CHECK(normalize(sum_raw) == a + b);
    CHECK(a * b == b * a);
    CHECK((a + b) * a == a * a + b * a);
  }
}

TEST_CASE("property: total derivatives commute") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Expr e = tree_expr(random_tree(rng, 3, false));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(total_derivative(total_derivative(e, i, 5), j, 5) ==
              total_derivative(total_derivative(e, j, 5), i, 5));
      }
    }
  }
}

TEST_CASE("property: prolongation identity") {
  // d(D_i e)/d(u_J) = D_i(de/du_J) + de/du_{J-i}
  std::mt19937 rng(5);
  const auto vars = all_pool();
  const auto base = pool();
  for (int trial = 0; trial < 20; ++trial) {
    const Expr e = tree_expr(random_tree(rng, 3, false));
    for (int i = 0; i < 3; ++i) {
      for (const JetVar& u : base) {
        const JetVar ui = u.with_deriv(i);
        const Expr lhs = diff_jet(total_derivative(e, i, 5), ui);
        const Expr rhs = total_derivative(diff_jet(e, ui), i, 5) + diff_jet(e, u);
        for (int k = 0; k < 20; ++k) {
          const auto pt = random_point(rng, vars);
          CHECK(std::get<Rational>(evaluate(lhs, pt)) == std::get<Rational>(evaluate(rhs, pt)));
        }
      }
    }
  }
}

TEST_CASE("text round trip") {
  const ExprContext ctx = context();
  for (const char* s : {"1/2*m*q[0]'^2 - V(q[0])", "d[x]phi*d[y]psi' - 3/7*sqrt(phi^2 + 1)^-1",
                        "V''(q[1] + 2)*q[1]''", "-phi"}) {
    const Expr e = P(s);
    CHECK(parse_expr(to_text(e, ctx), ctx) == e);
  }
  CHECK(to_text(P("d[1]phi"), ctx) == "d[x]phi");
  CHECK(to_latex(P("m*q[0]'"), ctx) == "m {\\dot q}_{0}");
  CHECK_THROWS_AS(P("undeclared + 1"), ParseError);
  try {
    P("phi + (psi");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.column() == 11);
  }
}
