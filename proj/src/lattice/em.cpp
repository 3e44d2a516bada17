#include <cmath>
#include <numbers>

#include "kt/error.hpp"
#include "kt/lattice.hpp"

namespace kt {

namespace {

using Field3 = std::array<std::vector<double>, 3>;

Expr gauss_density(const TheorySpec& t) {
  const std::vector<Constraint> cs = constraint_extract(t);
  if (cs.size() != 1) throw InternalLogicError("em theory should have a single constraint");
  return cs[0].density;
}

Field3 component_arrays(const FieldState& s, const std::string& name) {
  Field3 out;
  for (int i = 0; i < 3; ++i) {
    const int c = s.layout.index(JetVar::field(name, {i + 1}));
    if (c < 0) throw ShapeError("em state lacks " + name);
    out[static_cast<std::size_t>(i)].resize(s.grid.sites());
    for (std::size_t x = 0; x < s.grid.sites(); ++x) out[static_cast<std::size_t>(i)][x] = s.at(x, c);
  }
  return out;
}

void store(FieldState& s, const std::string& name, const Field3& f) {
  for (int i = 0; i < 3; ++i) {
    const int c = s.layout.index(JetVar::field(name, {i + 1}));
    for (std::size_t x = 0; x < s.grid.sites(); ++x) s.at(x, c) = f[static_cast<std::size_t>(i)][x];
  }
}

// h^{kj} dF0_j/dt = sum_i D_i (h^ij h^kl F_jl), F_jl = D_j A_l - D_l A_j.
Field3 curl_curl(const LatticeGrid& g, const Field3& a, const Eigen::Matrix3d& h, const Eigen::Matrix3d& hinv) {
  const std::size_t n = g.sites();
  std::array<Field3, 3> da;  // da[j][l] = D_j A_l
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) da[j][l] = grid_derivative(g, a[l], j);
  }
  Field3 rhs;
  for (auto& r : rhs) r.assign(n, 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      std::vector<double> b(n, 0.0);
      for (int j = 0; j < 3; ++j) {
        for (int l = 0; l < 3; ++l) {
          const double w = hinv(i, j) * hinv(k, l);
          if (w == 0) continue;
          for (std::size_t x = 0; x < n; ++x) b[x] += w * (da[j][l][x] - da[l][j][x]);
        }
      }
      const std::vector<double> db = grid_derivative(g, b, i);
      for (std::size_t x = 0; x < n; ++x) rhs[k][x] += db[x];
    }
  }
  Field3 out;
  for (auto& r : out) r.assign(n, 0.0);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      for (std::size_t x = 0; x < n; ++x) out[j][x] += h(j, k) * rhs[k][x];
    }
  }
  return out;
}

double fast_gauss(const LatticeGrid& g, const Field3& f0, const Eigen::Matrix3d& hinv, double sqrth) {
  std::vector<double> div(g.sites(), 0.0);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> flux(g.sites(), 0.0);
    for (int j = 0; j < 3; ++j) {
      for (std::size_t x = 0; x < g.sites(); ++x) flux[x] += hinv(i, j) * f0[j][x] * sqrth;
    }
    const auto d = grid_derivative(g, flux, i);
    for (std::size_t x = 0; x < g.sites(); ++x) div[x] += d[x];
  }
  double m = 0;
  for (double v : div) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<double> grid_derivative(const LatticeGrid& g, const std::vector<double>& f, int axis) {
  std::vector<double> out(g.sites());
  if (axis >= g.dim) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double w = 1.0 / (2.0 * g.spacing);
  for (std::size_t x = 0; x < g.sites(); ++x) out[x] = w * (f[g.shift(x, axis, 1)] - f[g.shift(x, axis, -1)]);
  return out;
}

FieldState em_state(const TheorySpec& t, const LatticeGrid& g) {
  if (g.dim != 3) throw ShapeError("em lattice needs three axes");
  return FieldState(t, g, two_form_layout(boundary_two_form(t)));
}

LocalFunctional gauss_functional(const TheorySpec& t, const std::vector<double>& lambda) {
  const JetVar l = JetVar::background("lambda");
  return LocalFunctional("J", Expr(-1) * Expr(l) * gauss_density(t), {{l, lambda}});
}

double gauss_residual(const TheorySpec& t, const FieldState& s, const LatticeEnv& env) {
  const Expr d = gauss_density(t);
  double m = 0;
  for (std::size_t x = 0; x < s.grid.sites(); ++x) m = std::max(m, std::abs(evaluate_at(d, s, env, x)));
  return m;
}

EmEvolution evolve_em(const TheorySpec&, FieldState s, const Eigen::Matrix3d& h, double dt, int steps) {
  if (dt > s.grid.spacing) throw DomainError("time step exceeds the grid spacing");
  const Eigen::Matrix3d hinv = h.inverse();
  const double sqrth = std::sqrt(h.determinant());
  Field3 a = component_arrays(s, "A");
  Field3 f0 = component_arrays(s, "F0");
  const std::size_t n = s.grid.sites();
  EmEvolution out;
  out.gauss.push_back(fast_gauss(s.grid, f0, hinv, sqrth));
  for (int step = 0; step < steps; ++step) {
    Field3 r = curl_curl(s.grid, a, h, hinv);
    for (int j = 0; j < 3; ++j) {
      for (std::size_t x = 0; x < n; ++x) f0[j][x] += 0.5 * dt * r[j][x];
    }
    // temporal gauge: dA_r/dt = F0_r
    for (int j = 0; j < 3; ++j) {
      for (std::size_t x = 0; x < n; ++x) a[j][x] += dt * f0[j][x];
    }
    r = curl_curl(s.grid, a, h, hinv);
    for (int j = 0; j < 3; ++j) {
      for (std::size_t x = 0; x < n; ++x) f0[j][x] += 0.5 * dt * r[j][x];
    }
    out.gauss.push_back(fast_gauss(s.grid, f0, hinv, sqrth));
  }
  store(s, "A", a);
  store(s, "F0", f0);
  out.state = std::move(s);
  return out;
}

FieldState em_random_gauss_state(const TheorySpec& t, const LatticeGrid& g, const Eigen::Matrix3d& h,
                                 std::mt19937_64& rng) {
  FieldState s = em_state(t, g);
  std::normal_distribution<double> normal;
  Field3 a, w;
  for (int i = 0; i < 3; ++i) {
    a[i].resize(g.sites());
    w[i].resize(g.sites());
    for (std::size_t x = 0; x < g.sites(); ++x) {
      a[i][x] = normal(rng);
      w[i][x] = normal(rng);
    }
  }
  // raised F0 = curl w
  Field3 curl;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const auto dj = grid_derivative(g, w[k], j);
    const auto dk = grid_derivative(g, w[j], k);
    curl[i].resize(g.sites());
    for (std::size_t x = 0; x < g.sites(); ++x) curl[i][x] = dj[x] - dk[x];
  }
  Field3 f0;
  for (int i = 0; i < 3; ++i) {
    f0[i].assign(g.sites(), 0.0);
    for (int j = 0; j < 3; ++j) {
      for (std::size_t x = 0; x < g.sites(); ++x) f0[i][x] += h(i, j) * curl[j][x];
    }
  }
  store(s, "A", a);
  store(s, "F0", f0);
  return s;
}

double em_discrete_frequency(const LatticeGrid& g, const std::array<int, 3>& k, double dt) {
  const double len = g.n * g.spacing;
  double w2 = 0;
  for (int r = 0; r < 3; ++r) {
    const double kappa = 2 * std::numbers::pi * k[static_cast<std::size_t>(r)] / len;
    const double s = std::sin(kappa * g.spacing) / g.spacing;
    w2 += s * s;
  }
  return std::acos(1 - 0.5 * w2 * dt * dt) / dt;
}

}  // namespace kt
