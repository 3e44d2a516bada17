#include <algorithm>
#include <cmath>

#include "kt/error.hpp"
#include "kt/lattice.hpp"

namespace kt {

std::vector<double> singular_values(const TwoFormMatrix& m) {
  std::vector<double> out;
  for (const auto& b : m.blocks) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) out.push_back(svd.singularValues()[i]);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

int two_form_rank(const TwoFormMatrix& m, double tol) {
  const std::vector<double> sv = singular_values(m);
  if (sv.empty() || sv[0] == 0) return 0;
  return static_cast<int>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > tol * sv[0]; }));
}

HamiltonianField hamiltonian_vector_field(const TwoFormMatrix& m, const Eigen::VectorXd& df, double tol) {
  const Eigen::Index b = m.block;
  if (df.size() != b * static_cast<Eigen::Index>(m.blocks.size())) throw ShapeError("covector size differs from state");
  std::vector<Eigen::JacobiSVD<Eigen::MatrixXd>> svds;
  svds.reserve(m.blocks.size());
  double smax = 0;
  for (const auto& blk : m.blocks) {
    svds.emplace_back(blk, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svds.back().singularValues().size() > 0) smax = std::max(smax, svds.back().singularValues()[0]);
  }
  HamiltonianField out;
  out.x = Eigen::VectorXd::Zero(df.size());
  for (std::size_t s = 0; s < m.blocks.size(); ++s) {
    const auto& svd = svds[s];
    const Eigen::Index o = static_cast<Eigen::Index>(s) * b;
    const Eigen::VectorXd rhs = -df.segment(o, b);
    const Eigen::VectorXd ut = svd.matrixU().transpose() * rhs;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(b);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double sv = svd.singularValues()[i];
      if (sv > tol * smax) y[i] = ut[i] / sv;
    }
    out.x.segment(o, b) = svd.matrixV() * y;
  }
  out.residual = (m.apply(out.x) + df).norm();
  return out;
}

Bracket poisson_bracket(const LocalFunctional& f, const LocalFunctional& g, const TwoFormMatrix& m,
                        const FieldState& s, const LatticeEnv& env) {
  const HamiltonianField xf = hamiltonian_vector_field(m, f.gradient(s, env));
  return Bracket{g.gradient(s, env).dot(xf.x), xf.residual};
}

CoisotropyResult coisotropy_check(const std::vector<LocalFunctional>& cs, const std::vector<Expr>& densities,
                                  const TwoFormMatrix& m, const FieldState& s, const LatticeEnv& env,
                                  double tol, double surface_tol) {
  CoisotropyResult r;
  for (const Expr& d : densities) {
    for (std::size_t site = 0; site < s.grid.sites(); ++site) {
      r.violation = std::max(r.violation, std::abs(evaluate_at(d, s, env, site)));
    }
  }
  r.on_surface = r.violation <= surface_tol;
  std::vector<Eigen::VectorXd> grads;
  std::vector<HamiltonianField> fields;
  for (const auto& c : cs) {
    grads.push_back(c.gradient(s, env));
    fields.push_back(hamiltonian_vector_field(m, grads.back()));
    r.max_residual = std::max(r.max_residual, fields.back().residual);
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      r.max_bracket = std::max(r.max_bracket, std::abs(grads[j].dot(fields[i].x)));
    }
  }
  r.passed = r.on_surface && r.max_bracket <= tol && r.max_residual <= tol;
  return r;
}

}  // namespace kt
