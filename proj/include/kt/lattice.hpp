#pragma once

// Numeric backend: periodic grids standing in for the boundary, ultralocal
// two-forms as per-site matrix blocks, discretized local functionals with
// exact gradients, hamiltonian vector fields and the model-specific checks
// (Maxwell evolution, symplectic current, Palatini-Cartan coisotropy).

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kt/calc_var.hpp"

namespace kt {

/// Periodic cubic grid. Axis r carries the r-th tangential coordinate of the
/// theory; tangential coordinates without an axis are directions along which
/// every field is constant. dim = 0 is a single point.
struct LatticeGrid {
  int dim = 0;
  int n = 1;
  double spacing = 1.0;

  static LatticeGrid point();
  /// n sites per axis on a box of side `length`. Needs n >= 4.
  static LatticeGrid periodic(int dim, int n, double length);

  std::size_t sites() const;
  double volume() const;  // spacing^dim
  std::array<int, 3> position(std::size_t site) const;
  std::size_t site(const std::array<int, 3>& pos) const;
  /// Site reached by moving `offset` steps along `axis` (with wrap).
  std::size_t shift(std::size_t site, int axis, int offset) const;
};

/// Names of the state components at one site, in index order.
struct StateLayout {
  std::vector<JetVar> components;

  int size() const { return static_cast<int>(components.size()); }
  /// -1 if absent.
  int index(const JetVar& v) const;
};

/// Generators of a boundary two-form, in generator order.
StateLayout two_form_layout(const LocalVarForm& omega);

struct FieldState {
  LatticeGrid grid;
  StateLayout layout;
  /// Theory coordinate -> grid axis; -1 for constant directions, -2 for the
  /// transversal coordinate.
  std::vector<int> axis_of_coord;
  Eigen::VectorXd values;  // site-major: values[site * layout.size() + component]

  FieldState() = default;
  FieldState(const TheorySpec& t, const LatticeGrid& g, StateLayout layout);

  double& at(std::size_t site, int comp) { return values[static_cast<Eigen::Index>(offset(site, comp))]; }
  double at(std::size_t site, int comp) const { return values[static_cast<Eigen::Index>(offset(site, comp))]; }
  std::size_t offset(std::size_t site, int comp) const {
    return site * static_cast<std::size_t>(layout.size()) + static_cast<std::size_t>(comp);
  }
  Eigen::Index size() const { return values.size(); }
};

/// Values of non-state symbols. `background` may answer derivative jets
/// itself; if it does not, derivatives along grid axes are taken by stencils
/// from the underived values and derivatives along other directions are zero.
struct LatticeEnv {
  std::function<std::optional<double>(const JetVar&, std::size_t site)> background;
  std::function<std::optional<double>(const std::string& fn, int order, double arg)> function;
};

/// Flat split metric (hinv = identity, sqrth = 1), plus named constants.
LatticeEnv flat_env(const std::map<std::string, double>& constants = {});
/// Uniform split metric given by the symmetric positive matrix h.
LatticeEnv uniform_metric_env(const Eigen::Matrix3d& h, const std::map<std::string, double>& constants = {});

/// Value of a jet at a site; centered differences along grid axes.
double jet_value(const JetVar& v, const FieldState& s, const LatticeEnv& env, std::size_t site);
double evaluate_at(const Expr& e, const FieldState& s, const LatticeEnv& env, std::size_t site);

// ---------------------------------------------------------------------------
// Two-forms

/// Antisymmetric matrix of an ultralocal two-form, one block per site.
/// Convention: (iota_X omega)_j = sum_i M_ji X_i, so M_ji = omega(e_i, e_j).
struct TwoFormMatrix {
  std::string theory;
  LatticeGrid grid;
  int block = 0;
  std::vector<Eigen::MatrixXd> blocks;

  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// omega(X, Y).
  double pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

/// Restricted boundary two-form delta(alpha restricted) of a theory.
LocalVarForm boundary_two_form(const TheorySpec& t);

/// Throws ShapeError if a coefficient is not ultralocal or a generator is
/// missing from the state layout.
TwoFormMatrix assemble_two_form(const LocalVarForm& omega, const std::string& theory, const FieldState& s,
                                const LatticeEnv& env);
TwoFormMatrix assemble_two_form(const TheorySpec& t, const FieldState& s, const LatticeEnv& env);

/// Singular values of all blocks, sorted decreasing.
std::vector<double> singular_values(const TwoFormMatrix& m);
/// Number of singular values above tol * sigma_max.
int two_form_rank(const TwoFormMatrix& m, double tol = 1e-8);

struct HamiltonianField {
  Eigen::VectorXd x;
  double residual = 0;  // |iota_X omega + dF|
};

/// Minimum-norm least-squares solution of iota_X omega + dF = 0.
HamiltonianField hamiltonian_vector_field(const TwoFormMatrix& m, const Eigen::VectorXd& df, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Local functionals

/// F(s) = volume * sum over sites of density(s). Smearings are background
/// symbols with per-site values owned by the functional.
class LocalFunctional {
 public:
  LocalFunctional() = default;
  LocalFunctional(std::string name, Expr density, std::map<JetVar, std::vector<double>> smearing = {});

  const std::string& name() const { return name_; }
  const Expr& density() const { return density_; }

  double value(const FieldState& s, const LatticeEnv& env) const;
  /// Exact derivative with respect to every state entry.
  Eigen::VectorXd gradient(const FieldState& s, const LatticeEnv& env) const;

 private:
  LatticeEnv with_smearing(const LatticeEnv& env) const;

  std::string name_;
  Expr density_;
  std::map<JetVar, std::vector<double>> smearing_;
  std::vector<JetVar> state_jets_;
  std::vector<Expr> partials_;
};

struct Bracket {
  double value = 0;     // dg(X_f)
  double residual = 0;  // defect of X_f
};

Bracket poisson_bracket(const LocalFunctional& f, const LocalFunctional& g, const TwoFormMatrix& m,
                        const FieldState& s, const LatticeEnv& env);

struct CoisotropyResult {
  double max_bracket = 0;
  double max_residual = 0;
  double violation = 0;  // max |constraint density| over sites
  bool on_surface = false;
  bool passed = false;
};

/// Max |{C_i, C_j}| over all pairs of the given smeared constraints. Fails
/// without judging the brackets when the state violates the constraints by
/// more than surface_tol.
CoisotropyResult coisotropy_check(const std::vector<LocalFunctional>& cs, const std::vector<Expr>& densities,
                                  const TwoFormMatrix& m, const FieldState& s, const LatticeEnv& env,
                                  double tol, double surface_tol);

// ---------------------------------------------------------------------------
// Mechanics and the length functional (single point)

/// (q, v) state of the mechanics theory.
FieldState mechanics_state(const TheorySpec& t, double q, double v);

/// Restriction of the two-form to the tangent space of the theory's surfaces
/// at s (single point); returns the ambient basis as columns of `basis`.
Eigen::MatrixXd constrained_two_form(const TheorySpec& t, const FieldState& s, const LatticeEnv& env,
                                     Eigen::MatrixXd& basis);

// ---------------------------------------------------------------------------
// Electromagnetism

/// State (A[1..3], F0[1..3]) of the em theory on a three-dimensional grid.
FieldState em_state(const TheorySpec& t, const LatticeGrid& g);

/// J_lambda = - sum lambda * Gauss, which equals the smeared electric flux
/// int d_i lambda h^ij F0_j sqrth after summation by parts.
LocalFunctional gauss_functional(const TheorySpec& t, const std::vector<double>& lambda);

/// Centered derivative of a site array along an axis.
std::vector<double> grid_derivative(const LatticeGrid& g, const std::vector<double>& f, int axis);

/// Max-norm of the Gauss density.
double gauss_residual(const TheorySpec& t, const FieldState& s, const LatticeEnv& env);

struct EmEvolution {
  FieldState state;           // after the last step
  std::vector<double> gauss;  // residual before the first step and after each step
};

/// Leapfrog in temporal gauge with a uniform time-independent metric: A at
/// integer steps, F0 at half steps. Throws DomainError if dt > spacing.
EmEvolution evolve_em(const TheorySpec& t, FieldState s, const Eigen::Matrix3d& h, double dt, int steps);

/// Random A and an F0 whose raised form is a discrete curl, so the Gauss
/// density vanishes up to roundoff.
FieldState em_random_gauss_state(const TheorySpec& t, const LatticeGrid& g, const Eigen::Matrix3d& h,
                                 std::mt19937_64& rng);

/// Frequency of a transverse plane wave of integer wave vector k under the
/// leapfrog scheme with flat metric: cos(Omega dt) = 1 - w^2 dt^2 / 2 with
/// w^2 = sum_r sin^2(kappa_r h) / h^2.
double em_discrete_frequency(const LatticeGrid& g, const std::array<int, 3>& k, double dt);

// ---------------------------------------------------------------------------
// Scalar field: symplectic current on a one-dimensional grid

/// Background quantities as functions of time (for the scalar check).
using TimeEnv = std::function<LatticeEnv(double t)>;

/// Split metric h = a(t)^2 on a one-dimensional grid (other axes flat).
TimeEnv scalar_expanding_env(std::function<double(double)> a, std::function<double(double)> a_dot);

/// Heun integration of the boundary evolution: phi' from the restriction rule,
/// phi0' from the restricted Euler-Lagrange equation.
FieldState evolve_scalar(const TheorySpec& t, FieldState s, const TimeEnv& env, double t0, double dt, int steps);

/// |omega_b(X, Y) - omega_a(X, Y)| for two solutions evolved from time a to b.
double symplectic_current_check(const TheorySpec& t, const FieldState& x, const FieldState& y, const TimeEnv& env,
                                double ta, double tb, double dt);

// ---------------------------------------------------------------------------
// Palatini-Cartan gravity, single site

/// State (e[a,i], omega[a,b,i]) at one site.
FieldState pc_state(const TheorySpec& t);
LatticeEnv pc_env(double lambda);

/// P_c = int c e d_omega e for a constant (0,2)-form c (upper-triangular part used).
LocalFunctional pc_gauge_functional(const TheorySpec& t, const Eigen::Matrix4d& c);
/// T_mu = int mu (e F + Lambda/6 e^3) for a constant (0,1)-form mu.
LocalFunctional pc_energy_functional(const TheorySpec& t, const Eigen::Vector4d& mu);

/// Constraint densities of the theory, restricted to the state symbols.
std::vector<Expr> pc_constraint_densities(const TheorySpec& t);

/// Time-like eta-normal of the three legs, unit length, eps^0 > 0.
Eigen::Vector4d pc_normal(const FieldState& s);

/// (c . e)^a_i = eta_rs c^ar e^s_i, laid out like the e-part of the state.
Eigen::VectorXd pc_gauge_action(const FieldState& s, const Eigen::Matrix4d& c);

struct PcSurfaceState {
  FieldState state;
  Eigen::VectorXd sigma;  // (1,1)-form of the structural constraint
  double violation = 0;   // max residual of constraints and structural equations
  int iterations = 0;
};

/// Samples e with a positive-definite boundary metric, then solves the
/// constraints and the structural constraint for (omega, sigma) by
/// Gauss-Newton with e fixed.
PcSurfaceState pc_surface_state(const TheorySpec& t, double lambda, std::mt19937_64& rng);

}  // namespace kt
