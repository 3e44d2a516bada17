#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kt/error.hpp"
#include "kt/lattice.hpp"
#include "kt/theories.hpp"

using namespace kt;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

LatticeEnv mechanics_env(double m) {
  LatticeEnv env = flat_env({{"m", m}});
  // V(q) = q^4/4 - q^2
  env.function = [](const std::string& fn, int order, double q) -> std::optional<double> {
    if (fn != "V") return std::nullopt;
    switch (order) {
      case 0: return q * q * q * q / 4 - q * q;
      case 1: return q * q * q - 2 * q;
      case 2: return 3 * q * q - 2;
      default: return std::nullopt;
    }
  };
  return env;
}

// centered finite differences of a functional along every state entry
Eigen::VectorXd fd_gradient(const LocalFunctional& f, FieldState s, const LatticeEnv& env, double step) {
  Eigen::VectorXd g(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double x = s.values[i];
    s.values[i] = x + step;
    const double up = f.value(s, env);
    s.values[i] = x - step;
    const double down = f.value(s, env);
    s.values[i] = x;
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

FieldState scalar_state(const TheorySpec& t, const LatticeGrid& g, std::mt19937_64& rng) {
  FieldState s(t, g, two_form_layout(boundary_two_form(t)));
  std::normal_distribution<double> normal;
  for (int c = 0; c < 2; ++c) {
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
}

std::vector<double> random_sites(const LatticeGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> out(g.sites());
  for (double& v : out) v = normal(rng);
  return out;
}

}  // namespace

TEST_CASE("grids") {
  const LatticeGrid g = LatticeGrid::periodic(2, 5, 10.0);
  CHECK(g.sites() == 25);
  CHECK(g.spacing == doctest::Approx(2.0));
  CHECK(g.shift(g.site({4, 0, 0}), 0, 1) == g.site({0, 0, 0}));
  CHECK(g.shift(g.site({0, 0, 0}), 1, -1) == g.site({0, 4, 0}));
  for (std::size_t s = 0; s < g.sites(); ++s) CHECK(g.site(g.position(s)) == s);
  CHECK(LatticeGrid::point().sites() == 1);
  CHECK_THROWS_AS(LatticeGrid::periodic(1, 3, 1.0), ShapeError);
  CHECK_THROWS_AS(LatticeGrid::periodic(4, 8, 1.0), ShapeError);
  CHECK_THROWS_AS(LatticeGrid::periodic(1, 8, -1.0), DomainError);
}

TEST_CASE("mechanics: two-form and hamiltonian vector field") {
  const TheorySpec t = builtin("mechanics");
  const double m = 1.7;
  const LatticeEnv env = mechanics_env(m);
  const FieldState s0 = mechanics_state(t, 0.2, -0.4);
  const TwoFormMatrix w = assemble_two_form(t, s0, env);
  Eigen::Matrix2d expect;
  expect << 0, m, -m, 0;
  CHECK((w.blocks[0] - expect).norm() == 0);
  CHECK(two_form_rank(w) == 2);

  const LocalFunctional h("H", parse_expr("1/2*m*v^2 + V(q)", t.context()));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20; ++i) {
    const double q = u(rng), v = u(rng);
    const FieldState s = mechanics_state(t, q, v);
    const HamiltonianField x = hamiltonian_vector_field(assemble_two_form(t, s, env), h.gradient(s, env));
    CHECK(x.residual <= 1e-12);
    CHECK(std::abs(x.x[s.layout.index(JetVar::field("q"))] - v) <= 1e-12);
    CHECK(std::abs(x.x[s.layout.index(JetVar::field("v"))] + (q * q * q - 2 * q) / m) <= 1e-12);
  }
}

TEST_CASE("length functional: constrained two-form on the unit sphere") {
  const TheorySpec t = builtin("length");
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    FieldState s(t, LatticeGrid::point(), two_form_layout(boundary_two_form(t)));
    Eigen::Vector3d u(normal(rng), normal(rng), normal(rng));
    u.normalize();
    for (int i = 0; i < 3; ++i) {
      s.at(0, s.layout.index(JetVar::field("q", {i}))) = normal(rng);
      s.at(0, s.layout.index(JetVar::field("u", {i}))) = u[i];
    }
    Eigen::MatrixXd basis;
    const Eigen::MatrixXd r = constrained_two_form(t, s, LatticeEnv{}, basis);
    REQUIRE(r.rows() == 5);
    CHECK((r + r.transpose()).norm() <= 1e-14);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    const auto sv = svd.singularValues();
    CHECK(sv[3] / std::max(sv[4], 1e-300) > 1e6);
    // brute-force oracle: the unconstrained 6x6 form has rank 6 off the
    // sphere's normal directions only through delta(1/|u|)
    Eigen::VectorXd k = basis * svd.matrixV().col(4);
    Eigen::VectorXd along = Eigen::VectorXd::Zero(6);
    for (int i = 0; i < 3; ++i) along[s.layout.index(JetVar::field("q", {i}))] = u[i];
    CHECK(std::abs(k.dot(along)) / k.norm() >= 1 - 1e-10);
  }
}

TEST_CASE("scalar field: assembly, rank and unit rescaling") {
  const TheorySpec t = builtin("scalar");
  const LatticeGrid g = LatticeGrid::periodic(1, 32, kTwoPi);
  std::mt19937_64 rng(3);
  const FieldState s = scalar_state(t, g, rng);
  const TwoFormMatrix w = assemble_two_form(t, s, flat_env());
  const int phi = s.layout.index(JetVar::field("phi"));
  const int phi0 = s.layout.index(JetVar::field("phi0"));
  // sqrth delta(phi0) ^ delta(phi) per site, weighted by the cell volume
  CHECK(w.blocks[7](phi, phi0) == doctest::Approx(g.spacing));
  CHECK(w.blocks[7](phi0, phi) == doctest::Approx(-g.spacing));
  CHECK(two_form_rank(w) == 64);
  const Eigen::MatrixXd d = w.dense();
  CHECK((d + d.transpose()).norm() == 0);

  TwoFormMatrix scaled = w;
  std::uniform_real_distribution<double> u(0.1, 10);
  const Eigen::Vector2d unit(u(rng), u(rng));
  for (auto& b : scaled.blocks) b = unit.asDiagonal() * b * unit.asDiagonal();
  CHECK(two_form_rank(scaled) == 64);
}

TEST_CASE("scalar field: symplectic current") {
  const TheorySpec t = builtin("scalar");
  const LatticeGrid g = LatticeGrid::periodic(1, 32, kTwoPi);
  const TimeEnv env = scalar_expanding_env([](double s) { return 1 + 0.5 * s; }, [](double) { return 0.5; });
  std::mt19937_64 rng(1);
  const FieldState x = scalar_state(t, g, rng);
  const FieldState y = scalar_state(t, g, rng);
  CHECK(symplectic_current_check(t, x, x, env, 0, 1, 0.01) <= 1e-14);

  std::vector<double> diffs;
  for (double dt : {0.02, 0.01, 0.005}) diffs.push_back(symplectic_current_check(t, x, y, env, 0, 1, dt));
  const double order = std::log2(diffs[1] / diffs[2]);
  CHECK(diffs[0] > diffs[1]);
  CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("functional gradients match finite differences") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  SUBCASE("electromagnetism, curved uniform metric") {
    const TheorySpec t = builtin("em");
    const LatticeGrid g = LatticeGrid::periodic(3, 4, 4.0);
    Eigen::Matrix3d h;
    h << 1.3, 0.2, 0.0, 0.2, 0.9, 0.1, 0.0, 0.1, 1.1;
    const LatticeEnv env = uniform_metric_env(h);
    FieldState s = em_state(t, g);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.values[i] = normal(rng);
    const LocalFunctional j = gauss_functional(t, random_sites(g, rng));
    const Eigen::VectorXd exact = j.gradient(s, env);
    CHECK((exact - fd_gradient(j, s, env, 1e-4)).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("Palatini-Cartan smeared constraints") {
    const TheorySpec t = builtin("pc4");
    const LatticeEnv env = pc_env(0.3);
    FieldState s = pc_state(t);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.values[i] = normal(rng);
    const Eigen::Matrix4d c = Eigen::Matrix4d::Random();
    const Eigen::Vector4d mu = Eigen::Vector4d::Random();
    for (const LocalFunctional& f : {pc_gauge_functional(t, c), pc_energy_functional(t, mu)}) {
      CAPTURE(f.name());
      const Eigen::VectorXd exact = f.gradient(s, env);
      CHECK((exact - fd_gradient(f, s, env, 1e-4)).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("constant functional") {
    const TheorySpec t = builtin("mechanics");
    const LocalFunctional c("c", Expr(3));
    CHECK(c.gradient(mechanics_state(t, 1, 2), flat_env()).isZero(0));
  }
}

TEST_CASE("electromagnetism: Gauss generator, brackets and gauge directions") {
  const TheorySpec t = builtin("em");
  const LatticeGrid g = LatticeGrid::periodic(3, 6, kTwoPi);
  const LatticeEnv env = flat_env();
  std::mt19937_64 rng(21);
  const FieldState s = em_random_gauss_state(t, g, Eigen::Matrix3d::Identity(), rng);
  CHECK(gauss_residual(t, s, env) <= 1e-12);
  const TwoFormMatrix w = assemble_two_form(t, s, env);
  CHECK(two_form_rank(w) == static_cast<int>(6 * g.sites()));

  const std::vector<double> lambda = random_sites(g, rng);
  const std::vector<double> mu = random_sites(g, rng);
  const LocalFunctional jl = gauss_functional(t, lambda);
  const LocalFunctional jm = gauss_functional(t, mu);
  const HamiltonianField x = hamiltonian_vector_field(w, jl.gradient(s, env));
  CHECK(x.residual <= 1e-10);
  double worst_a = 0, worst_f = 0;
  for (int i = 1; i <= 3; ++i) {
    const std::vector<double> dl = grid_derivative(g, lambda, i - 1);
    const int a = s.layout.index(JetVar::field("A", {i}));
    const int f = s.layout.index(JetVar::field("F0", {i}));
    for (std::size_t site = 0; site < g.sites(); ++site) {
      worst_a = std::max(worst_a, std::abs(x.x[static_cast<Eigen::Index>(s.offset(site, a))] - dl[site]));
      worst_f = std::max(worst_f, std::abs(x.x[static_cast<Eigen::Index>(s.offset(site, f))]));
    }
  }
  CHECK(worst_a <= 1e-10);
  CHECK(worst_f <= 1e-10);

  const Bracket lm = poisson_bracket(jl, jm, w, s, env);
  const Bracket ml = poisson_bracket(jm, jl, w, s, env);
  CHECK(std::abs(lm.value) <= 1e-10);
  CHECK(std::abs(lm.value + ml.value) <= 1e-10);
  CHECK(std::abs(poisson_bracket(jl, jl, w, s, env).value) <= 1e-10);

  // gauge directions are null against perturbations keeping the Gauss law
  const FieldState pert = em_random_gauss_state(t, g, Eigen::Matrix3d::Identity(), rng);
  CHECK(std::abs(w.pair(pert.values, x.x)) <= 1e-10);

  const CoisotropyResult co = coisotropy_check({jl, jm}, {constraint_extract(t)[0].density}, w, s, env, 1e-10, 1e-10);
  CHECK(co.passed);
}

TEST_CASE("property: Gauss generator residual stays at roundoff under refinement") {
  const TheorySpec t = builtin("em");
  std::mt19937_64 rng(4);
  for (int n : {4, 6, 8}) {
    CAPTURE(n);
    const LatticeGrid g = LatticeGrid::periodic(3, n, kTwoPi);
    const FieldState s = em_random_gauss_state(t, g, Eigen::Matrix3d::Identity(), rng);
    const TwoFormMatrix w = assemble_two_form(t, s, flat_env());
    const HamiltonianField x = hamiltonian_vector_field(w, gauss_functional(t, random_sites(g, rng)).gradient(s, flat_env()));
    CHECK(x.residual <= 1e-12);
  }
}

TEST_CASE("electromagnetism: leapfrog evolution") {
  const TheorySpec t = builtin("em");
  const LatticeGrid g = LatticeGrid::periodic(3, 6, kTwoPi);
  const Eigen::Matrix3d flat = Eigen::Matrix3d::Identity();

  SUBCASE("zero data stays zero") {
    const EmEvolution ev = evolve_em(t, em_state(t, g), flat, 0.2, 50);
    CHECK(ev.state.values.isZero(0));
  }
  SUBCASE("time step above the spacing is rejected") {
    CHECK_THROWS_AS(evolve_em(t, em_state(t, g), flat, 1.5 * g.spacing, 1), DomainError);
  }
  SUBCASE("Gauss law is conserved, also for a curved uniform metric") {
    Eigen::Matrix3d h;
    h << 1.2, 0.1, -0.2, 0.1, 0.8, 0.0, -0.2, 0.0, 1.5;
    std::mt19937_64 rng(8);
    for (const Eigen::Matrix3d& m : {flat, h}) {
      const FieldState s = em_random_gauss_state(t, g, m, rng);
      const EmEvolution ev = evolve_em(t, s, m, 0.3, 300);
      CHECK(ev.gauss.size() == 301);
      CHECK(ev.gauss.front() == doctest::Approx(gauss_residual(t, s, uniform_metric_env(m))).epsilon(1e-6));
      double worst = 0;
      for (double r : ev.gauss) worst = std::max(worst, r - ev.gauss.front());
      CHECK(worst <= 1e-12);
      CHECK(gauss_residual(t, ev.state, uniform_metric_env(m)) <= 1e-12);
    }
  }
  SUBCASE("plane wave follows the discrete dispersion relation") {
    const LatticeGrid big = LatticeGrid::periodic(3, 8, kTwoPi);
    const std::array<int, 3> k{1, 2, 0};
    const double dt = 0.1;
    FieldState s = em_state(t, big);
    // polarization orthogonal to the discrete wave vector sin(kappa h)/h
    Eigen::Vector3d sk;
    for (int r = 0; r < 3; ++r) sk[r] = std::sin(k[static_cast<std::size_t>(r)] * big.spacing) / big.spacing;
    const Eigen::Vector3d pol = sk.cross(Eigen::Vector3d(0, 0, 1)).normalized();
    auto phase = [&](std::size_t site) {
      const auto p = big.position(site);
      return (k[0] * p[0] + k[1] * p[1] + k[2] * p[2]) * big.spacing;
    };
    for (std::size_t x = 0; x < big.sites(); ++x) {
      for (int i = 1; i <= 3; ++i) s.at(x, s.layout.index(JetVar::field("A", {i}))) = pol[i - 1] * std::cos(phase(x));
    }
    const int steps = 200;
    const EmEvolution ev = evolve_em(t, s, flat, dt, steps);
    const double omega = em_discrete_frequency(big, k, dt);
    double worst = 0;
    for (std::size_t x = 0; x < big.sites(); ++x) {
      for (int i = 1; i <= 3; ++i) {
        const double expect = pol[i - 1] * std::cos(phase(x)) * std::cos(omega * steps * dt);
        worst = std::max(worst, std::abs(ev.state.at(x, s.layout.index(JetVar::field("A", {i}))) - expect));
      }
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("Palatini-Cartan single site") {
  const TheorySpec t = builtin("pc4");
  const double lambda = 0.7;
  const LatticeEnv env = pc_env(lambda);
  std::mt19937_64 rng(17);
  const std::vector<Expr> densities = pc_constraint_densities(t);
  for (int trial = 0; trial < 5; ++trial) {
    const PcSurfaceState ps = pc_surface_state(t, lambda, rng);
    CHECK(ps.violation <= 1e-12);
    const TwoFormMatrix w = assemble_two_form(t, ps.state, env);
    CHECK(two_form_rank(w) == 24);

    const Eigen::Matrix4d c = Eigen::Matrix4d::Random();
    const LocalFunctional p = pc_gauge_functional(t, c);
    // iota_X omega = delta P: the field of -P under iota_X omega + dF = 0
    const HamiltonianField x = hamiltonian_vector_field(w, -p.gradient(ps.state, env));
    CHECK(x.residual <= 1e-8);
    const Eigen::VectorXd ce = pc_gauge_action(ps.state, c);
    double worst = 0;
    for (int k = 0; k < ps.state.layout.size(); ++k) {
      if (ps.state.layout.components[static_cast<std::size_t>(k)].name == "e") {
        worst = std::max(worst, std::abs(x.x[k] - ce[k]));
      }
    }
    CHECK(worst <= 1e-8);

    const std::vector<LocalFunctional> cs = {p, pc_gauge_functional(t, Eigen::Matrix4d::Random()),
                                             pc_energy_functional(t, Eigen::Vector4d::Random()),
                                             pc_energy_functional(t, Eigen::Vector4d::Random())};
    const CoisotropyResult on = coisotropy_check(cs, densities, w, ps.state, env, 1e-6, 1e-10);
    CHECK(on.on_surface);
    CHECK(on.passed);
    CHECK(on.max_bracket <= 1e-6);

    FieldState off = ps.state;
    off.values[20] += 0.1;
    const CoisotropyResult bad =
        coisotropy_check(cs, densities, assemble_two_form(t, off, env), off, env, 1e-6, 1e-10);
    CHECK_FALSE(bad.passed);
    CHECK(bad.violation > 1e-3);
  }
}

TEST_CASE("assembly rejects non-ultralocal forms and missing generators") {
  const TheorySpec t = builtin("mechanics");
  const FieldState s = mechanics_state(t, 0, 0);
  LocalVarForm w(2);
  w.add({JetVar::field("q"), JetVar::field("v")}, Expr(JetVar::field("q").with_deriv(0)));
  CHECK_THROWS_AS(assemble_two_form(w, "x", s, flat_env()), ShapeError);
  LocalVarForm u(2);
  u.add({JetVar::field("q"), JetVar::field("z")}, Expr(1));
  CHECK_THROWS_AS(assemble_two_form(u, "x", s, flat_env()), ShapeError);
}
