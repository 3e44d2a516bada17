// Acceptance run: one PASS/FAIL line per criterion with measured values,
// tolerances and runtimes. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "kt/cli.hpp"
#include "kt/error.hpp"
#include "kt/theories.hpp"

using namespace kt;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool run(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.passed && secs < limit_s;
  std::printf("%s [%d] %s | %s | runtime %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), secs, limit_s);
  std::fflush(stdout);
  return ok;
}

BoundarySplit split_of(const TheorySpec& t) { return ibp_split(variation(t), t); }

}  // namespace

int main() {
  bool all = true;
  const std::uint64_t seed = 20240601;

  all &= run(1, "mechanics goldens and hamiltonian vector field", 1, [&] {
    const TheorySpec t = builtin("mechanics");
    const ExprContext ctx = t.context();
    const BoundarySplit s = split_of(t);
    const std::string el = to_text(s.el.at(0).density, ctx);
    const std::string alpha = to_text(s.alpha, ctx);
    const Measurements m = mechanics_point_checks(20, seed);
    const bool ok = el == "m*q'' + V'(q)" && alpha == "m*q' delta(q)" && m.at("hvf_error") <= 1e-12;
    return Outcome{ok, "el \"" + el + "\", alpha \"" + alpha + "\", max |X - (v, -V'/m)| = " +
                           num(m.at("hvf_error")) + " over 20 points (tol 1e-12)"};
  });

  all &= run(2, "length functional constrained 2-form", 5, [&] {
    const Measurements m = length_point_checks(50, seed);
    const bool ok = m.at("rank_min") == 4 && m.at("rank_max") == 4 && m.at("spectral_gap_log10") > 6 &&
                    m.at("kernel_cosine_deficit") <= 1e-10;
    return Outcome{ok, "rank " + num(m.at("rank_min")) + ".." + num(m.at("rank_max")) +
                           " at 50 points (want 4), min log10(s4/s5) = " + num(m.at("spectral_gap_log10")) +
                           " (> 6), max 1 - cos = " + num(m.at("kernel_cosine_deficit")) + " (tol 1e-10)"};
  });

  all &= run(3, "scalar field boundary form, rank and symplectic current", 30, [&] {
    const TheorySpec t = builtin("scalar");
    const std::string ab = to_text(boundary_restrict(split_of(t).alpha, t), t.context());
    const Measurements m = scalar_lattice_checks(32, seed);
    const double order = m.at("current_order");
    const bool ok = ab == "phi0*sqrth delta(phi)" && m.at("rank_deficiency") == 0 && std::abs(order - 2) <= 0.2;
    return Outcome{ok, "alpha_b \"" + ab + "\", rank deficiency " + num(m.at("rank_deficiency")) +
                           " on 32 sites, current order " + num(order) + " (2 +- 0.2)"};
  });

  all &= run(4, "electromagnetism Gauss law, generator and leapfrog", 120, [&] {
    const TheorySpec t = builtin("em");
    const ExprContext ctx = t.context();
    const std::vector<Constraint> cs = constraint_extract(t);
    Expr gauss;
    for (int i = 1; i <= 3; ++i) {
      Expr flux;
      for (int j = 1; j <= 3; ++j) {
        flux += make_symbol(ctx, "hinv", {i, j}) * Expr(JetVar::field("F0", {j})) * parse_expr("sqrth", ctx);
      }
      gauss += total_derivative(flux, i);
    }
    const bool exact = cs.size() == 1 && cs[0].density == gauss;
    const Measurements m = em_lattice_checks(16, 1000, 20, seed);
    const bool ok = exact && m.at("x_lambda_a_error") <= 1e-10 && m.at("x_lambda_f0") <= 1e-10 &&
                    m.at("bracket_max") <= 1e-10 && m.at("gauss_drift") <= 1e-12;
    return Outcome{ok, std::string("Gauss density ") + (exact ? "exact" : "MISMATCH") +
                           ", |X_A - D lambda| = " + num(m.at("x_lambda_a_error")) + ", |X_F0| = " +
                           num(m.at("x_lambda_f0")) + ", max |{J,J}| = " + num(m.at("bracket_max")) +
                           " over 20 pairs on 16^3 (tol 1e-10), Gauss drift " + num(m.at("gauss_drift")) +
                           " over 1000 steps (tol 1e-12)"};
  });

  all &= run(5, "Palatini-Cartan pointwise exact algebra", 60, [&] {
    const Measurements m = pc4_point_checks(100, seed);
    const bool ok = m.at("kernel_dim_min") == 6 && m.at("kernel_dim_max") == 6 && m.at("injective_failures") == 0 &&
                    m.at("structural_residual_failures") == 0 && m.at("v_ambiguity_max") == 0;
    std::ostringstream d;
    d << "kernel dim " << m.at("kernel_dim_min") << ".." << m.at("kernel_dim_max") << " (want 6), injective "
      << 100 - m.at("injective_failures") << "/100, exact structural fix "
      << 100 - m.at("structural_residual_failures") << "/100, max v-ambiguity " << m.at("v_ambiguity_max");
    return Outcome{ok, d.str()};
  });

  all &= run(6, "Palatini-Cartan single-site gauge fields and coisotropy", 300, [&] {
    const Measurements m = pc4_lattice_checks(20, seed);
    const bool ok = m.at("gauge_field_error") <= 1e-8 && m.at("bracket_max") <= 1e-6 &&
                    m.at("coisotropy_failures") == 0 && m.at("off_surface_accepted") == 0 &&
                    m.at("surface_violation") <= 1e-12;
    return Outcome{ok, "max |X_c(e) - c.e| = " + num(m.at("gauge_field_error")) +
                           " (tol 1e-8), max bracket " + num(m.at("bracket_max")) +
                           " (tol 1e-6) at 20 states with violation <= " + num(m.at("surface_violation")) +
                           ", off-surface states accepted " + num(m.at("off_surface_accepted"))};
  });

  all &= run(7, "pipeline properties", 60, [&] {
    int failures = 0, checks = 0;
    auto expect = [&](bool b) {
      ++checks;
      if (!b) ++failures;
    };
    for (const auto& name : builtin_names()) {
      const TheorySpec t = builtin(name);
      const LocalVarForm v = variation(t);
      const BoundarySplit s = ibp_split(v, t);
      expect(vertical_delta(vertical_delta(LocalVarForm::scalar(t.lagrangian))).is_zero());
      for (const auto& e : s.el) expect(vertical_delta(vertical_delta(e.density)).is_zero());
      for (const auto& [gens, c] : s.alpha.terms()) expect(vertical_delta(vertical_delta(c)).is_zero());
      LocalVarForm r(1);
      for (const auto& e : s.el) r.add({e.field}, -e.density);
      for (const auto& [k, d] : s.divergence) r += total_derivative(d, k, t.jet_order + 1);
      r += total_derivative(s.alpha, t.transversal, t.jet_order + 1);
      expect(r == v);
      expect(parse_theory(emit_theory(t)) == t);
    }
    const TheorySpec mech = builtin("mechanics");
    const BoundarySplit m0 = split_of(mech);
    for (const char* k : {"q^2*q'", "m*q*q'^2", "q'^3", "V(q)"}) {
      const Expr K = parse_expr(k, mech.context());
      TheorySpec u = mech;
      u.lagrangian = mech.lagrangian + total_derivative(K, 0);
      const BoundarySplit m1 = split_of(u);
      expect(m1.el.size() == 1 && m1.el[0].density == m0.el[0].density);
      expect(m1.alpha == m0.alpha + vertical_delta(K));
    }
    const TheorySpec sc = builtin("scalar");
    const BoundarySplit s0 = split_of(sc);
    for (int k = 1; k <= 3; ++k) {
      TheorySpec u = sc;
      u.lagrangian = sc.lagrangian + total_derivative(parse_expr("phi^2*phi'", sc.context()), k);
      const BoundarySplit s1 = split_of(u);
      expect(s1.el.size() == 1 && s1.el[0].density == s0.el[0].density);
    }
    return Outcome{failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                                      " exact assertions (delta^2 = 0, IBP reconstruction, divergence shifts, "
                                      "parse/emit round trip)"};
  });

  return all ? 0 : 1;
}
