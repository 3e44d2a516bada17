#include <cmath>

#include "kt/error.hpp"
#include "kt/lattice.hpp"

namespace kt {

TimeEnv scalar_expanding_env(std::function<double(double)> a, std::function<double(double)> a_dot) {
  return [a, a_dot](double t) {
    const double av = a(t), ad = a_dot(t);
    LatticeEnv env;
    // h_ij = a^2 delta_ij: hinv = a^-2 delta, sqrth = a^3
    env.background = [av, ad](const JetVar& v, std::size_t) -> std::optional<double> {
      const bool diag = v.name == "hinv" && v.component.size() == 2 && v.component[0] == v.component[1];
      if (v.name == "hinv" && !diag) return v.deriv.empty() ? std::optional<double>(0.0) : std::nullopt;
      if (v.deriv.empty()) {
        if (diag) return 1 / (av * av);
        if (v.name == "sqrth") return av * av * av;
        return std::nullopt;
      }
      if (v.deriv.size() == 1 && v.deriv[0] == 0) {
        if (diag) return -2 * ad / (av * av * av);
        if (v.name == "sqrth") return 3 * av * av * ad;
      }
      return std::nullopt;
    };
    return env;
  };
}

namespace {

// Time derivative of each state component: bulk fields from their restriction
// rule, boundary symbols from the restricted Euler-Lagrange equations solved
// for their single transversal derivative.
struct BoundaryFlow {
  std::vector<Expr> rate;      // per component: rate = -num / den when den is set
  std::vector<Expr> den;
};

BoundaryFlow boundary_flow(const TheorySpec& t, const StateLayout& layout) {
  BoundaryFlow f;
  f.rate.resize(static_cast<std::size_t>(layout.size()));
  f.den.resize(static_cast<std::size_t>(layout.size()));
  std::vector<bool> done(static_cast<std::size_t>(layout.size()), false);
  for (int c = 0; c < layout.size(); ++c) {
    const JetVar& v = layout.components[static_cast<std::size_t>(c)];
    if (!t.is_bulk_field(v.name)) continue;
    const JetVar dv = v.with_deriv(t.transversal);
    const Expr r = boundary_restrict(Expr(dv), t);
    if (r == Expr(dv)) throw ShapeError("no restriction rule for the velocity of " + v.name);
    f.rate[static_cast<std::size_t>(c)] = r;
    done[static_cast<std::size_t>(c)] = true;
  }
  for (const auto& eq : ibp_split(variation(t), t).el) {
    const Expr r = boundary_restrict(eq.density, t);
    int unknown = -1;
    for (const JetVar& v : r.variables()) {
      if (v.kind != SymbolKind::Field || v.count_deriv(t.transversal) == 0) continue;
      const int c = layout.index(v.base());
      if (c < 0 || t.is_bulk_field(v.name) || v.order() != 1 || (unknown >= 0 && unknown != c)) {
        throw ShapeError("restricted equation is not in first-order normal form");
      }
      unknown = c;
    }
    if (unknown < 0) continue;
    const std::size_t u = static_cast<std::size_t>(unknown);
    const JetVar dv = layout.components[u].with_deriv(t.transversal);
    const Expr den = diff_jet(r, dv);
    if (!diff_jet(den, dv).is_zero()) throw ShapeError("restricted equation is not linear in the velocity");
    f.den[u] = den;
    f.rate[u] = substitute(r, [&dv](const JetVar& v) -> std::optional<Expr> {
      if (v == dv) return Expr();
      return std::nullopt;
    });
    done[u] = true;
  }
  for (bool d : done) {
    if (!d) throw ShapeError("state component without an evolution equation");
  }
  return f;
}

Eigen::VectorXd rates(const BoundaryFlow& f, const FieldState& s, const LatticeEnv& env) {
  Eigen::VectorXd r(s.size());
  for (std::size_t x = 0; x < s.grid.sites(); ++x) {
    for (int c = 0; c < s.layout.size(); ++c) {
      const std::size_t k = static_cast<std::size_t>(c);
      double v = evaluate_at(f.rate[k], s, env, x);
      if (!f.den[k].is_zero()) v = -v / evaluate_at(f.den[k], s, env, x);
      r[static_cast<Eigen::Index>(s.offset(x, c))] = v;
    }
  }
  return r;
}

}  // namespace

FieldState evolve_scalar(const TheorySpec& t, FieldState s, const TimeEnv& env, double t0, double dt, int steps) {
  const BoundaryFlow f = boundary_flow(t, s.layout);
  double time = t0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = rates(f, s, env(time));
    FieldState mid = s;
    mid.values += dt * k1;
    const Eigen::VectorXd k2 = rates(f, mid, env(time + dt));
    s.values += 0.5 * dt * (k1 + k2);
    time = t0 + (i + 1) * dt;
  }
  return s;
}

double symplectic_current_check(const TheorySpec& t, const FieldState& x, const FieldState& y, const TimeEnv& env,
                                double ta, double tb, double dt) {
  const LocalVarForm omega = boundary_two_form(t);
  const int steps = static_cast<int>(std::lround((tb - ta) / dt));
  if (steps < 1) throw DomainError("time interval shorter than the step");
  const double wa = assemble_two_form(omega, t.name, x, env(ta)).pair(x.values, y.values);
  const FieldState xb = evolve_scalar(t, x, env, ta, dt, steps);
  const FieldState yb = evolve_scalar(t, y, env, ta, dt, steps);
  const double wb = assemble_two_form(omega, t.name, xb, env(ta + steps * dt)).pair(xb.values, yb.values);
  return std::abs(wb - wa);
}

}  // namespace kt
