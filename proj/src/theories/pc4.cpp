#include "kt/theories.hpp"

namespace kt {

namespace {

int coord_of(int n, int slot) { return n == 4 ? slot : slot + 1; }

}  // namespace

Form<Expr> pc_coframe(int n) {
  Form<Expr> e(1, 1, n, 4);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 4; ++a) e.at(Mask{1} << s, Mask{1} << a) = Expr(JetVar::field("e", {a, coord_of(n, s)}));
  }
  return e;
}

Form<Expr> pc_connection(int n) {
  Form<Expr> w(1, 2, n, 4);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        w.at(Mask{1} << s, (Mask{1} << a) | (Mask{1} << b)) =
            Expr(JetVar::field("omega", {a, b, coord_of(n, s)}));
      }
    }
  }
  return w;
}

Form<Expr> pc_curvature(const Form<Expr>& omega, int n) {
  return exterior_d(omega, [n](int s) { return coord_of(n, s); }) + lie_wedge(omega, omega);
}

Form<Expr> pc_covariant_d(const Form<Expr>& omega, const Form<Expr>& e, int n) {
  return exterior_d(e, [n](int s) { return coord_of(n, s); }) + internal_act(omega, e);
}

Expr pc_lagrangian() {
  const Form<Expr> e = pc_coframe(4);
  const Form<Expr> w = pc_connection(4);
  const Form<Expr> ee = wedge(e, e);
  const Expr lambda(JetVar::constant("Lambda"));
  const Form<Expr> top = Expr(make_rational(1, 2)) * wedge(ee, pc_curvature(w, 4)) +
                         (Expr(make_rational(1, 24)) * lambda) * wedge(ee, ee);
  return top.top();
}

}  // namespace kt
