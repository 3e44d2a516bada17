#include "kt/error.hpp"
#include "kt/theories.hpp"

namespace kt {

namespace {

JetVar jet(const TheorySpec& t, const std::string& text) {
  const Expr e = parse_expr(text, t.context());
  return std::get<JetVar>(e.terms().at(0).factors.at(0).atom);
}

void add_rule(TheorySpec& t, const std::string& lhs, const std::string& rhs) {
  t.restrictions.push_back(RestrictRule{jet(t, lhs), parse_expr(rhs, t.context())});
}

TheorySpec mechanics() {
  TheorySpec t;
  t.name = "mechanics";
  t.coords = {"t"};
  t.fields = {FieldDecl{"q"}};
  t.boundary = {BoundaryDecl{"v"}};
  BackgroundDecl m{"m"};
  m.constant = true;
  m.positive = true;
  t.backgrounds = {m};
  t.functions = {"V"};
  t.lagrangian = parse_expr("1/2*m*q'^2 - V(q)", t.context());
  add_rule(t, "q'", "v");
  return t;
}

TheorySpec length() {
  TheorySpec t;
  t.name = "length";
  t.coords = {"t"};
  t.internal_dim = 3;
  t.fields = {FieldDecl{"q", 0, 1}};
  t.boundary = {BoundaryDecl{"u", 0, 1}};
  t.lagrangian = parse_expr("sqrt(q[0]'^2 + q[1]'^2 + q[2]'^2)", t.context());
  for (int i = 0; i < 3; ++i) {
    const std::string c = std::to_string(i);
    add_rule(t, "q[" + c + "]'", "u[" + c + "]");
  }
  t.surfaces = {parse_expr("u[0]^2 + u[1]^2 + u[2]^2 - 1", t.context())};
  return t;
}

TheorySpec split_metric_base(const std::string& name) {
  TheorySpec t;
  t.name = name;
  t.coords = {"t", "x", "y", "z"};
  t.metric = "h";
  return t;
}

TheorySpec scalar() {
  TheorySpec t = split_metric_base("scalar");
  t.fields = {FieldDecl{"phi"}};
  t.boundary = {BoundaryDecl{"phi0"}};
  const ExprContext ctx = t.context();
  Expr grad;
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      grad += make_symbol(ctx, "hinv", {i, j}) * Expr(JetVar::field("phi").with_deriv(i)) *
              Expr(JetVar::field("phi").with_deriv(j));
    }
  }
  const Expr phi_t = parse_expr("phi'", ctx);
  t.lagrangian = Expr(make_rational(1, 2)) * (phi_t * phi_t - grad) * parse_expr("sqrth", ctx);
  add_rule(t, "phi'", "phi0");
  return t;
}

TheorySpec em() {
  TheorySpec t = split_metric_base("em");
  t.fields = {FieldDecl{"A", 1, 0}};
  t.boundary = {BoundaryDecl{"F0", 1, 0}};
  const ExprContext ctx = t.context();
  auto A = [](int mu) { return JetVar::field("A", {mu}); };
  auto F = [&](int mu, int nu) { return Expr(A(nu).with_deriv(mu)) - Expr(A(mu).with_deriv(nu)); };
  auto hinv = [&](int i, int j) { return make_symbol(ctx, "hinv", {i, j}); };
  Expr electric, magnetic;
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      electric += hinv(i, j) * F(0, i) * F(0, j);
      for (int k = 1; k <= 3; ++k) {
        for (int l = 1; l <= 3; ++l) magnetic += hinv(i, k) * hinv(j, l) * F(i, j) * F(k, l);
      }
    }
  }
  t.lagrangian = (Expr(make_rational(1, 2)) * electric - Expr(make_rational(1, 4)) * magnetic) *
                 parse_expr("sqrth", ctx);
  for (int i = 1; i <= 3; ++i) {
    const std::string c = std::to_string(i);
    add_rule(t, "A[" + c + "]'", "F0[" + c + "] + d[" + c + "]A[0]");
  }
  return t;
}

TheorySpec pc4() {
  TheorySpec t;
  t.name = "pc4";
  t.coords = {"t", "x", "y", "z"};
  FieldDecl e{"e", 1, 1};
  FieldDecl w{"omega", 1, 2};
  w.antisym = true;
  t.fields = {e, w};
  BoundaryDecl rho{"rho"};
  rho.multiplier = true;
  BoundaryDecl xi{"xi", 1, 0};
  xi.multiplier = true;
  t.boundary = {rho, xi, BoundaryDecl{"eps", 0, 1}};
  BackgroundDecl lambda{"Lambda"};
  lambda.constant = true;
  t.backgrounds = {lambda};
  t.lagrangian = pc_lagrangian();
  for (int a = 0; a < 4; ++a) {
    const std::string c = std::to_string(a);
    std::string rhs = "rho*eps[" + c + "]";
    for (int i = 1; i <= 3; ++i) rhs += " + xi[" + std::to_string(i) + "]*e[" + c + "," + std::to_string(i) + "]";
    add_rule(t, "e[" + c + ",0]", rhs);
  }
  return t;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"mechanics", "length", "scalar", "em", "pc4"};
  return names;
}

TheorySpec builtin(const std::string& name) {
  TheorySpec t;
  if (name == "mechanics") {
    t = mechanics();
  } else if (name == "length") {
    t = length();
  } else if (name == "scalar") {
    t = scalar();
  } else if (name == "em") {
    t = em();
  } else if (name == "pc4") {
    t = pc4();
  } else {
    throw SpecError("unknown theory '" + name + "'");
  }
  t.validate();
  return t;
}

}  // namespace kt
