#include <algorithm>
#include <cmath>
#include <set>

#include "kt/error.hpp"
#include "kt/lattice.hpp"

namespace kt {

LatticeGrid LatticeGrid::point() { return LatticeGrid{}; }

LatticeGrid LatticeGrid::periodic(int dim, int n, double length) {
  if (dim < 1 || dim > 3) throw ShapeError("grid dimension must be 1, 2 or 3");
  if (n < 4) throw ShapeError("a grid needs at least 4 sites per axis");
  if (!(length > 0)) throw DomainError("grid length must be positive");
  return LatticeGrid{dim, n, length / n};
}

std::size_t LatticeGrid::sites() const {
  std::size_t s = 1;
  for (int r = 0; r < dim; ++r) s *= static_cast<std::size_t>(n);
  return s;
}

double LatticeGrid::volume() const { return std::pow(spacing, dim); }

std::array<int, 3> LatticeGrid::position(std::size_t site) const {
  std::array<int, 3> p{0, 0, 0};
  for (int r = 0; r < dim; ++r) {
    p[static_cast<std::size_t>(r)] = static_cast<int>(site % static_cast<std::size_t>(n));
    site /= static_cast<std::size_t>(n);
  }
  return p;
}

std::size_t LatticeGrid::site(const std::array<int, 3>& pos) const {
  std::size_t s = 0;
  for (int r = dim - 1; r >= 0; --r) {
    const int x = ((pos[static_cast<std::size_t>(r)] % n) + n) % n;
    s = s * static_cast<std::size_t>(n) + static_cast<std::size_t>(x);
  }
  return s;
}

std::size_t LatticeGrid::shift(std::size_t s, int axis, int offset) const {
  auto p = position(s);
  p[static_cast<std::size_t>(axis)] += offset;
  return site(p);
}

int StateLayout::index(const JetVar& v) const {
  const auto it = std::find(components.begin(), components.end(), v);
  return it == components.end() ? -1 : static_cast<int>(it - components.begin());
}

StateLayout two_form_layout(const LocalVarForm& omega) {
  std::set<JetVar> gens;
  for (const auto& [g, c] : omega.terms()) gens.insert(g.begin(), g.end());
  return StateLayout{std::vector<JetVar>(gens.begin(), gens.end())};
}

FieldState::FieldState(const TheorySpec& t, const LatticeGrid& g, StateLayout l)
    : grid(g), layout(std::move(l)) {
  int axis = 0;
  for (int c = 0; c < t.dim(); ++c) {
    if (c == t.transversal) {
      axis_of_coord.push_back(-2);
    } else {
      axis_of_coord.push_back(axis < g.dim ? axis : -1);
      ++axis;
    }
  }
  if (g.dim > axis) throw ShapeError("grid has more axes than the boundary has coordinates");
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.sites() * static_cast<std::size_t>(layout.size())));
}

namespace {

std::map<std::string, double> metric_constants(const Eigen::Matrix3d& h, std::map<std::string, double> out) {
  const Eigen::Matrix3d hinv = h.inverse();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out["hinv[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]"] = hinv(i, j);
  }
  out["sqrth"] = std::sqrt(h.determinant());
  return out;
}

std::string key_of(const JetVar& v) {
  std::string k = v.name;
  if (!v.component.empty()) {
    k += "[";
    for (std::size_t i = 0; i < v.component.size(); ++i) {
      if (i) k += ",";
      k += std::to_string(v.component[i]);
    }
    k += "]";
  }
  return k;
}

LatticeEnv constant_env(std::map<std::string, double> values) {
  LatticeEnv env;
  env.background = [values = std::move(values)](const JetVar& v, std::size_t) -> std::optional<double> {
    if (!v.deriv.empty()) return std::nullopt;
    const auto it = values.find(key_of(v));
    if (it == values.end()) return std::nullopt;
    return it->second;
  };
  return env;
}

}  // namespace

LatticeEnv flat_env(const std::map<std::string, double>& constants) {
  return constant_env(metric_constants(Eigen::Matrix3d::Identity(), constants));
}

LatticeEnv uniform_metric_env(const Eigen::Matrix3d& h, const std::map<std::string, double>& constants) {
  return constant_env(metric_constants(h, constants));
}

namespace {

// Stencil of a derivative multi-index: (site, weight) pairs, empty if the
// derivative is along a constant direction.
std::vector<std::pair<std::size_t, double>> stencil(const JetVar& v, const FieldState& s, std::size_t site) {
  std::vector<std::pair<std::size_t, double>> cur{{site, 1.0}};
  const double w = 1.0 / (2.0 * s.grid.spacing);
  for (int c : v.deriv) {
    if (c < 0 || c >= static_cast<int>(s.axis_of_coord.size())) throw ShapeError("derivative along unknown coordinate");
    const int axis = s.axis_of_coord[static_cast<std::size_t>(c)];
    if (axis == -2) throw ShapeError("transversal derivative of " + v.name + " on the boundary grid");
    if (axis == -1) return {};
    std::vector<std::pair<std::size_t, double>> next;
    next.reserve(cur.size() * 2);
    for (const auto& [x, a] : cur) {
      next.emplace_back(s.grid.shift(x, axis, 1), a * w);
      next.emplace_back(s.grid.shift(x, axis, -1), -a * w);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

double jet_value(const JetVar& v, const FieldState& s, const LatticeEnv& env, std::size_t site) {
  const JetVar base = v.base();
  const int comp = s.layout.index(base);
  if (comp >= 0) {
    double r = 0;
    for (const auto& [x, w] : stencil(v, s, site)) r += w * s.at(x, comp);
    return r;
  }
  if (env.background) {
    if (auto direct = env.background(v, site)) return *direct;
    if (!v.deriv.empty()) {
      double r = 0;
      for (const auto& [x, w] : stencil(v, s, site)) {
        const auto b = env.background(base, x);
        if (!b) throw UnboundError("no lattice value for " + base.name);
        r += w * *b;
      }
      return r;
    }
  }
  throw UnboundError("no lattice value for " + key_of(v));
}

double evaluate_at(const Expr& e, const FieldState& s, const LatticeEnv& env, std::size_t site) {
  EvalEnv ev;
  ev.var = [&](const JetVar& v) -> std::optional<Number> { return Number(jet_value(v, s, env, site)); };
  ev.fn = [&](const std::string& fn, int order, const Number& arg) -> std::optional<Number> {
    if (!env.function) return std::nullopt;
    if (auto r = env.function(fn, order, to_double(arg))) return Number(*r);
    return std::nullopt;
  };
  return to_double(evaluate(e, ev));
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd TwoFormMatrix::dense() const {
  const Eigen::Index b = block;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b * static_cast<Eigen::Index>(blocks.size()),
                                            b * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    m.block(static_cast<Eigen::Index>(s) * b, static_cast<Eigen::Index>(s) * b, b, b) = blocks[s];
  }
  return m;
}

Eigen::VectorXd TwoFormMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const Eigen::Index o = static_cast<Eigen::Index>(s) * block;
    y.segment(o, block) = blocks[s] * x.segment(o, block);
  }
  return y;
}

double TwoFormMatrix::pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return y.dot(apply(x)); }

LocalVarForm boundary_two_form(const TheorySpec& t) {
  return vertical_delta(boundary_restrict(ibp_split(variation(t), t).alpha, t));
}

TwoFormMatrix assemble_two_form(const LocalVarForm& omega, const std::string& theory, const FieldState& s,
                                const LatticeEnv& env) {
  if (omega.degree() != 2) throw ShapeError("two-form expected");
  struct Entry {
    int i, j;
    Expr c;
  };
  std::vector<Entry> entries;
  for (const auto& [g, c] : omega.terms()) {
    const int i = s.layout.index(g[0]);
    const int j = s.layout.index(g[1]);
    if (i < 0 || j < 0) throw ShapeError("generator missing from the lattice state");
    for (const JetVar& v : c.variables()) {
      if (v.kind == SymbolKind::Field && !v.deriv.empty()) throw ShapeError("two-form is not ultralocal");
    }
    entries.push_back({i, j, c});
  }
  TwoFormMatrix m;
  m.theory = theory;
  m.grid = s.grid;
  m.block = s.layout.size();
  const double vol = s.grid.volume();
  m.blocks.assign(s.grid.sites(), Eigen::MatrixXd::Zero(m.block, m.block));
  for (std::size_t site = 0; site < s.grid.sites(); ++site) {
    Eigen::MatrixXd& b = m.blocks[site];
    for (const auto& e : entries) {
      const double v = vol * evaluate_at(e.c, s, env, site);
      b(e.j, e.i) += v;
      b(e.i, e.j) -= v;
    }
  }
  return m;
}

TwoFormMatrix assemble_two_form(const TheorySpec& t, const FieldState& s, const LatticeEnv& env) {
  return assemble_two_form(boundary_two_form(t), t.name, s, env);
}

// ---------------------------------------------------------------------------

LocalFunctional::LocalFunctional(std::string name, Expr density, std::map<JetVar, std::vector<double>> smearing)
    : name_(std::move(name)), density_(std::move(density)), smearing_(std::move(smearing)) {
  for (const JetVar& v : density_.variables()) {
    if (v.kind != SymbolKind::Field) continue;
    state_jets_.push_back(v);
    partials_.push_back(diff_jet(density_, v));
  }
}

LatticeEnv LocalFunctional::with_smearing(const LatticeEnv& env) const {
  if (smearing_.empty()) return env;
  LatticeEnv out = env;
  out.background = [this, inner = env.background](const JetVar& v, std::size_t site) -> std::optional<double> {
    if (v.deriv.empty()) {
      const auto it = smearing_.find(v);
      if (it != smearing_.end()) return it->second.size() == 1 ? it->second[0] : it->second.at(site);
    } else if (smearing_.count(v.base())) {
      return std::nullopt;
    }
    return inner ? inner(v, site) : std::nullopt;
  };
  return out;
}

double LocalFunctional::value(const FieldState& s, const LatticeEnv& env) const {
  const LatticeEnv e = with_smearing(env);
  double r = 0;
  for (std::size_t site = 0; site < s.grid.sites(); ++site) r += evaluate_at(density_, s, e, site);
  return r * s.grid.volume();
}

Eigen::VectorXd LocalFunctional::gradient(const FieldState& s, const LatticeEnv& env) const {
  const LatticeEnv e = with_smearing(env);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(s.size());
  const double vol = s.grid.volume();
  for (std::size_t k = 0; k < state_jets_.size(); ++k) {
    const JetVar& v = state_jets_[k];
    const int comp = s.layout.index(v.base());
    if (comp < 0) throw ShapeError("functional depends on " + v.name + ", which is not a state component");
    for (std::size_t site = 0; site < s.grid.sites(); ++site) {
      const auto st = stencil(v, s, site);
      if (st.empty()) continue;
      const double p = vol * evaluate_at(partials_[k], s, e, site);
      if (p == 0) continue;
      for (const auto& [x, w] : st) g[static_cast<Eigen::Index>(s.offset(x, comp))] += p * w;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

FieldState mechanics_state(const TheorySpec& t, double q, double v) {
  FieldState s(t, LatticeGrid::point(), two_form_layout(boundary_two_form(t)));
  s.at(0, s.layout.index(JetVar::field("q"))) = q;
  s.at(0, s.layout.index(JetVar::field("v"))) = v;
  return s;
}

Eigen::MatrixXd constrained_two_form(const TheorySpec& t, const FieldState& s, const LatticeEnv& env,
                                     Eigen::MatrixXd& basis) {
  if (s.grid.sites() != 1) throw ShapeError("constrained two-form needs a single point");
  const TwoFormMatrix m = assemble_two_form(t, s, env);
  const int n = s.layout.size();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.surfaces.size()), n);
  for (std::size_t r = 0; r < t.surfaces.size(); ++r) {
    for (int c = 0; c < n; ++c) {
      grad(static_cast<Eigen::Index>(r), c) = evaluate_at(diff_jet(t.surfaces[r], s.layout.components[c]), s, env, 0);
    }
  }
  if (t.surfaces.empty()) {
    basis = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(grad, Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const Eigen::Index r = svd.rank();
    basis = svd.matrixV().rightCols(n - r);
  }
  return basis.transpose() * m.blocks[0] * basis;
}

}  // namespace kt
