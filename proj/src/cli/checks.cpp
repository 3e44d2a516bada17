#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kt/cli.hpp"
#include "kt/error.hpp"
#include "kt/lattice.hpp"
#include "kt/pointlin.hpp"
#include "kt/theories.hpp"

namespace kt {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double& worst(Measurements& m, const std::string& key, double v) {
  double& slot = m.try_emplace(key, 0.0).first->second;
  if (std::isnan(v) || v > slot) slot = v;
  return slot;
}

std::vector<double> normal_sites(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

}  // namespace

Measurements mechanics_point_checks(int points, std::uint64_t seed, double tol) {
  const TheorySpec t = builtin("mechanics");
  const double m = 1.7;
  LatticeEnv env = flat_env({{"m", m}});
  env.function = [](const std::string& fn, int order, double q) -> std::optional<double> {
    if (fn != "V") return std::nullopt;
    switch (order) {
      case 0: return q * q * q * q / 4 - q * q;
      case 1: return q * q * q - 2 * q;
      case 2: return 3 * q * q - 2;
      default: return std::nullopt;
    }
  };
  const LocalFunctional h("H", parse_expr("1/2*m*v^2 + V(q)", t.context()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2, 2);
  Measurements out{{"hvf_error", 0.0}, {"hvf_residual", 0.0}, {"points", points}};
  for (int i = 0; i < points; ++i) {
    const double q = u(rng), v = u(rng);
    const FieldState s = mechanics_state(t, q, v);
    const HamiltonianField x = hamiltonian_vector_field(assemble_two_form(t, s, env), h.gradient(s, env), tol);
    worst(out, "hvf_residual", x.residual);
    worst(out, "hvf_error", std::abs(x.x[s.layout.index(JetVar::field("q"))] - v));
    worst(out, "hvf_error", std::abs(x.x[s.layout.index(JetVar::field("v"))] + (q * q * q - 2 * q) / m));
  }
  return out;
}

Measurements length_point_checks(int points, std::uint64_t seed, double tol) {
  const TheorySpec t = builtin("length");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Measurements out{{"kernel_cosine_deficit", 0.0}, {"points", points}};
  double gap = std::numeric_limits<double>::infinity();
  int rank_min = std::numeric_limits<int>::max(), rank_max = 0;
  for (int p = 0; p < points; ++p) {
    FieldState s(t, LatticeGrid::point(), two_form_layout(boundary_two_form(t)));
    Eigen::Vector3d u(normal(rng), normal(rng), normal(rng));
    u.normalize();
    for (int i = 0; i < 3; ++i) {
      s.at(0, s.layout.index(JetVar::field("q", {i}))) = normal(rng);
      s.at(0, s.layout.index(JetVar::field("u", {i}))) = u[i];
    }
    Eigen::MatrixXd basis;
    const Eigen::MatrixXd r = constrained_two_form(t, s, LatticeEnv{}, basis);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > tol * sv[0] ? 1 : 0;
    rank_min = std::min(rank_min, rank);
    rank_max = std::max(rank_max, rank);
    gap = std::min(gap, sv[3] / std::max(sv[sv.size() - 1], 1e-300));
    const Eigen::VectorXd k = basis * svd.matrixV().col(sv.size() - 1);
    Eigen::VectorXd along = Eigen::VectorXd::Zero(k.size());
    for (int i = 0; i < 3; ++i) along[s.layout.index(JetVar::field("q", {i}))] = u[i];
    worst(out, "kernel_cosine_deficit", 1 - std::abs(k.dot(along)) / k.norm());
  }
  out["spectral_gap_log10"] = std::log10(gap);
  out["rank_min"] = rank_min;
  out["rank_max"] = rank_max;
  return out;
}

Measurements pc4_point_checks(int samples, std::uint64_t seed) {
  ExactSampler s(seed);
  Measurements out{{"injective_failures", 0.0}, {"structural_residual_failures", 0.0}, {"v_ambiguity_max", 0.0},
                   {"samples", samples}};
  int dim_min = std::numeric_limits<int>::max(), dim_max = 0;
  for (int i = 0; i < samples; ++i) {
    const PForm e = s.spacelike_coframe();
    const int dim = coframe_kernel_dim(e);
    dim_min = std::min(dim_min, dim);
    dim_max = std::max(dim_max, dim);
    if (!injective_w21(e)) out["injective_failures"] += 1;
    const PForm eps = normal_section(e);
    const PForm torsion = s.random_form(2, 1);
    const StructuralFix fix = structural_fix(e, eps, torsion);
    const bool exact = wedge(e, fix.v).is_zero() &&
                       (wedge(eps, torsion + internal_act(fix.v, e)) - wedge(e, fix.sigma)).is_zero();
    if (!exact) out["structural_residual_failures"] += 1;
    worst(out, "v_ambiguity_max", fix.v_ambiguity);
  }
  out["kernel_dim_min"] = dim_min;
  out["kernel_dim_max"] = dim_max;
  return out;
}

Measurements scalar_lattice_checks(int n, std::uint64_t seed, double tol) {
  const TheorySpec t = builtin("scalar");
  const LatticeGrid g = LatticeGrid::periodic(1, n, kTwoPi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  // smooth random data: low Fourier modes with normal coefficients
  auto state = [&]() {
    FieldState s(t, g, two_form_layout(boundary_two_form(t)));
    for (int c = 0; c < s.layout.size(); ++c) {
      double coef[6];
      for (double& v : coef) v = normal(rng);
      for (std::size_t x = 0; x < g.sites(); ++x) {
        const double p = static_cast<double>(x) * g.spacing;
        double v = 0;
        for (int k = 1; k <= 3; ++k) v += coef[2 * k - 2] * std::cos(k * p) + coef[2 * k - 1] * std::sin(k * p);
        s.at(x, c) = v;
      }
    }
    return s;
  };
  const FieldState x = state();
  const FieldState y = state();
  const TimeEnv env = scalar_expanding_env([](double s) { return 1 + 0.5 * s; }, [](double) { return 0.5; });
  Measurements out;
  const int rank = two_form_rank(assemble_two_form(t, x, env(0)), tol);
  out["rank_deficiency"] = static_cast<double>(x.size() - rank);
  out["current_same_pair"] = symplectic_current_check(t, x, x, env, 0, 1, 0.01);
  std::vector<double> diffs;
  for (double dt : {0.02, 0.01, 0.005}) diffs.push_back(symplectic_current_check(t, x, y, env, 0, 1, dt));
  out["current_order_coarse"] = std::log2(diffs[0] / diffs[1]);
  out["current_order"] = std::log2(diffs[1] / diffs[2]);
  out["current_finest"] = diffs[2];
  return out;
}

Measurements em_lattice_checks(int n, int steps, int pairs, std::uint64_t seed, double tol) {
  const TheorySpec t = builtin("em");
  const LatticeGrid g = LatticeGrid::periodic(3, n, kTwoPi);
  const Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  const LatticeEnv env = flat_env();
  std::mt19937_64 rng(seed);
  const FieldState s = em_random_gauss_state(t, g, h, rng);
  const TwoFormMatrix w = assemble_two_form(t, s, env);
  Measurements out{{"x_lambda_a_error", 0.0}, {"x_lambda_f0", 0.0}, {"hvf_residual", 0.0}, {"bracket_max", 0.0}};
  out["rank_deficiency"] = static_cast<double>(s.size() - two_form_rank(w, tol));
  for (int p = 0; p < pairs; ++p) {
    const std::vector<double> lambda = normal_sites(g.sites(), rng);
    const std::vector<double> mu = normal_sites(g.sites(), rng);
    const LocalFunctional jl = gauss_functional(t, lambda);
    const LocalFunctional jm = gauss_functional(t, mu);
    const HamiltonianField x = hamiltonian_vector_field(w, jl.gradient(s, env), tol);
    worst(out, "hvf_residual", x.residual);
    for (int i = 1; i <= 3; ++i) {
      const std::vector<double> dl = grid_derivative(g, lambda, i - 1);
      const int a = s.layout.index(JetVar::field("A", {i}));
      const int f = s.layout.index(JetVar::field("F0", {i}));
      for (std::size_t site = 0; site < g.sites(); ++site) {
        worst(out, "x_lambda_a_error", std::abs(x.x[static_cast<Eigen::Index>(s.offset(site, a))] - dl[site]));
        worst(out, "x_lambda_f0", std::abs(x.x[static_cast<Eigen::Index>(s.offset(site, f))]));
      }
    }
    worst(out, "bracket_max", std::abs(poisson_bracket(jl, jm, w, s, env).value));
  }
  const double dt = 0.1;
  const EmEvolution ev = evolve_em(t, s, h, dt, steps);
  double drift = 0, peak = 0;
  for (double r : ev.gauss) {
    drift = std::max(drift, r - ev.gauss.front());
    peak = std::max(peak, r);
  }
  out["gauss_initial"] = ev.gauss.front();
  out["gauss_drift"] = drift;
  out["gauss_max"] = peak;
  out["gauss_final_symbolic"] = gauss_residual(t, ev.state, env);
  out["steps"] = steps;
  return out;
}

Measurements pc4_lattice_checks(int states, std::uint64_t seed, double tol) {
  const TheorySpec t = builtin("pc4");
  const double lambda = 0.7;
  const LatticeEnv env = pc_env(lambda);
  const std::vector<Expr> densities = pc_constraint_densities(t);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  auto random_c = [&]() {
    Eigen::Matrix4d c;
    for (int i = 0; i < 16; ++i) c(i / 4, i % 4) = u(rng);
    return c;
  };
  auto random_mu = [&]() { return Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)); };
  int dim_min = std::numeric_limits<int>::max(), dim_max = 0;
  Measurements out{{"gauge_field_error", 0.0}, {"gauge_hvf_residual", 0.0},
                   {"bracket_max", 0.0}, {"surface_violation", 0.0}, {"coisotropy_failures", 0.0},
                   {"off_surface_accepted", 0.0}, {"states", states}};
  for (int k = 0; k < states; ++k) {
    const PcSurfaceState ps = pc_surface_state(t, lambda, rng);
    worst(out, "surface_violation", ps.violation);
    const TwoFormMatrix w = assemble_two_form(t, ps.state, env);
    const int dim = static_cast<int>(ps.state.size()) - two_form_rank(w, tol);
    dim_min = std::min(dim_min, dim);
    dim_max = std::max(dim_max, dim);

    const Eigen::Matrix4d c = random_c();
    const LocalFunctional p = pc_gauge_functional(t, c);
    // iota_X omega = delta P
    const HamiltonianField x = hamiltonian_vector_field(w, -p.gradient(ps.state, env), tol);
    worst(out, "gauge_hvf_residual", x.residual);
    const Eigen::VectorXd ce = pc_gauge_action(ps.state, c);
    for (int i = 0; i < ps.state.layout.size(); ++i) {
      if (ps.state.layout.components[static_cast<std::size_t>(i)].name == "e") {
        worst(out, "gauge_field_error", std::abs(x.x[i] - ce[i]));
      }
    }

    const std::vector<LocalFunctional> cs = {p, pc_gauge_functional(t, random_c()),
                                             pc_energy_functional(t, random_mu()),
                                             pc_energy_functional(t, random_mu())};
    const CoisotropyResult on = coisotropy_check(cs, densities, w, ps.state, env, 1e-6, 1e-10);
    worst(out, "bracket_max", on.max_bracket);
    if (!on.passed) out["coisotropy_failures"] += 1;

    FieldState off = ps.state;
    off.values[off.layout.index(JetVar::field("omega", {0, 1, 1}))] += 0.1;
    const CoisotropyResult bad =
        coisotropy_check(cs, densities, assemble_two_form(t, off, env), off, env, 1e-6, 1e-10);
    if (bad.passed) out["off_surface_accepted"] += 1;
  }
  out["kernel_dim_min"] = dim_min;
  out["kernel_dim_max"] = dim_max;
  return out;
}

}  // namespace kt
