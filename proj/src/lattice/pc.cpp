#include <cmath>

#include "kt/error.hpp"
#include "kt/forms.hpp"
#include "kt/lattice.hpp"
#include "kt/theories.hpp"

namespace kt {

namespace {

const Constraint* find_constraint(const std::vector<Constraint>& cs, const JetVar& field) {
  for (const auto& c : cs) {
    if (c.field == field) return &c;
  }
  throw InternalLogicError("missing constraint el[" + field.name + "]");
}

JetVar eps_symbol(int a) { return JetVar::background("eps", {a}); }
JetVar sigma_symbol(int a, int i) { return JetVar::field("sigma", {a, i}); }

}  // namespace

FieldState pc_state(const TheorySpec& t) {
  FieldState s(t, LatticeGrid::point(), two_form_layout(boundary_two_form(t)));
  if (s.layout.size() != 30) throw InternalLogicError("unexpected Palatini-Cartan boundary state");
  return s;
}

LatticeEnv pc_env(double lambda) { return flat_env({{"Lambda", lambda}}); }

std::vector<Expr> pc_constraint_densities(const TheorySpec& t) {
  std::vector<Expr> out;
  for (const auto& c : constraint_extract(t)) out.push_back(c.density);
  return out;
}

// The constraint density of omega[a,b,0] is minus the complementary component
// of c e d_omega e per unit c_ab; that of e[a,0] is the complementary
// component of mu (e F + Lambda/6 e^3) per unit mu_a.
LocalFunctional pc_gauge_functional(const TheorySpec& t, const Eigen::Matrix4d& c) {
  const std::vector<Constraint> cs = constraint_extract(t);
  Expr density;
  std::map<JetVar, std::vector<double>> smear;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const JetVar s = JetVar::background("c", {a, b});
      smear[s] = {c(a, b)};
      density -= Expr(s) * find_constraint(cs, JetVar::field("omega", {a, b, 0}))->density;
    }
  }
  return LocalFunctional("P", density, smear);
}

LocalFunctional pc_energy_functional(const TheorySpec& t, const Eigen::Vector4d& mu) {
  const std::vector<Constraint> cs = constraint_extract(t);
  Expr density;
  std::map<JetVar, std::vector<double>> smear;
  for (int a = 0; a < 4; ++a) {
    const JetVar s = JetVar::background("mu", {a});
    smear[s] = {mu[a]};
    density += Expr(s) * find_constraint(cs, JetVar::field("e", {a, 0}))->density;
  }
  return LocalFunctional("T", density, smear);
}

namespace {

Eigen::Matrix<double, 3, 4> legs(const FieldState& s) {
  Eigen::Matrix<double, 3, 4> e;
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 4; ++a) e(i, a) = s.at(0, s.layout.index(JetVar::field("e", {a, i + 1})));
  }
  return e;
}

}  // namespace

Eigen::Vector4d pc_normal(const FieldState& s) {
  const Eigen::Vector4d eta(-1, 1, 1, 1);
  const Eigen::Matrix<double, 3, 4> m = legs(s) * eta.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::Vector4d v = svd.matrixV().col(3);
  const double norm = -(v.cwiseProduct(eta)).dot(v);
  if (!(norm > 0)) throw DegeneracyError("normal of the boundary legs is not time-like");
  v /= std::sqrt(norm);
  if (v[0] < 0) v = -v;
  return v;
}

Eigen::VectorXd pc_gauge_action(const FieldState& s, const Eigen::Matrix4d& c) {
  const Eigen::Vector4d eta(-1, 1, 1, 1);
  auto cc = [&c](int a, int r) { return a < r ? c(a, r) : (a > r ? -c(r, a) : 0.0); };
  const Eigen::Matrix<double, 3, 4> e = legs(s);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.size());
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 4; ++a) {
      double v = 0;
      for (int r = 0; r < 4; ++r) v += cc(a, r) * eta[r] * e(i, r);
      out[s.layout.index(JetVar::field("e", {a, i + 1}))] = v;
    }
  }
  return out;
}

PcSurfaceState pc_surface_state(const TheorySpec& t, double lambda, std::mt19937_64& rng) {
  const std::vector<Expr> constraints = pc_constraint_densities(t);
  // structural constraint eps d_omega e - e sigma, as (2,2)-components
  Form<Expr> eps(0, 1, 3, 4), sigma(1, 1, 3, 4);
  for (int a = 0; a < 4; ++a) {
    eps.at(0, Mask{1} << a) = Expr(eps_symbol(a));
    for (int i = 0; i < 3; ++i) sigma.at(Mask{1} << i, Mask{1} << a) = Expr(sigma_symbol(a, i + 1));
  }
  const Form<Expr> e = pc_coframe(3);
  const Form<Expr> structural =
      wedge(eps, pc_covariant_d(pc_connection(3), e, 3)) - wedge(e, sigma);
  std::vector<Expr> residual = constraints;
  for (Mask I : masks_of(3, 2)) {
    for (Mask A : masks_of(4, 2)) residual.push_back(structural.at(I, A));
  }

  PcSurfaceState out{pc_state(t), Eigen::VectorXd::Zero(12), 0, 0};
  FieldState& s = out.state;
  std::vector<JetVar> unknowns;
  for (const JetVar& v : s.layout.components) {
    if (v.name == "omega") unknowns.push_back(v);
  }
  for (int a = 0; a < 4; ++a) {
    for (int i = 1; i <= 3; ++i) unknowns.push_back(sigma_symbol(a, i));
  }
  std::vector<std::vector<Expr>> jac(residual.size());
  for (std::size_t r = 0; r < residual.size(); ++r) {
    for (const JetVar& u : unknowns) jac[r].push_back(diff_jet(residual[r], u));
  }

  std::normal_distribution<double> normal(0.0, 0.3);
  const Eigen::Vector4d eta(-1, 1, 1, 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int a = 0; a < 4; ++a) {
      for (int i = 1; i <= 3; ++i) {
        s.at(0, s.layout.index(JetVar::field("e", {a, i}))) = (a == i ? 1.0 : 0.0) + normal(rng);
      }
    }
    const Eigen::Matrix<double, 3, 4> l = legs(s);
    const Eigen::Matrix3d g = l * eta.asDiagonal() * l.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(g);
    if (eig.eigenvalues().minCoeff() < 0.05) continue;  // boundary metric must be riemannian

    const Eigen::Vector4d n = pc_normal(s);
    Eigen::VectorXd z(static_cast<Eigen::Index>(unknowns.size()));
    for (std::size_t k = 0; k < 18; ++k) z[static_cast<Eigen::Index>(k)] = normal(rng);
    z.tail(12).setZero();

    const LatticeEnv base = pc_env(lambda);
    auto load = [&](const Eigen::VectorXd& zz) {
      for (std::size_t k = 0; k < 18; ++k) s.at(0, s.layout.index(unknowns[k])) = zz[static_cast<Eigen::Index>(k)];
    };
    auto env_for = [&](const Eigen::VectorXd& zz) {
      LatticeEnv env = base;
      env.background = [&, zz](const JetVar& v, std::size_t site) -> std::optional<double> {
        if (v.deriv.empty() && v.name == "eps") return n[v.component[0]];
        if (v.deriv.empty() && v.name == "sigma") return zz[18 + 3 * v.component[0] + v.component[1] - 1];
        return base.background(v, site);
      };
      return env;
    };
    double worst = 0;
    for (int it = 0; it < 60; ++it) {
      load(z);
      const LatticeEnv env = env_for(z);
      Eigen::VectorXd r(static_cast<Eigen::Index>(residual.size()));
      for (std::size_t k = 0; k < residual.size(); ++k) r[static_cast<Eigen::Index>(k)] = evaluate_at(residual[k], s, env, 0);
      worst = r.cwiseAbs().maxCoeff();
      out.iterations = it;
      if (worst < 1e-14) break;
      Eigen::MatrixXd j(r.size(), z.size());
      for (std::size_t a = 0; a < residual.size(); ++a) {
        for (std::size_t b = 0; b < unknowns.size(); ++b) {
          j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = evaluate_at(jac[a][b], s, env, 0);
        }
      }
      z -= j.completeOrthogonalDecomposition().solve(r);
    }
    if (worst > 1e-12) continue;
    load(z);
    out.sigma = z.tail(12);
    out.violation = worst;
    return out;
  }
  throw DegeneracyError("no on-surface Palatini-Cartan state found");
}

}  // namespace kt
