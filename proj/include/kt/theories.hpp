#pragma once

// Built-in theories and their stored reference results.

#include <map>
#include <string>
#include <vector>

#include "kt/calc_var.hpp"
#include "kt/forms.hpp"

namespace kt {

const std::vector<std::string>& builtin_names();

/// Throws SpecError for an unknown name.
TheorySpec builtin(const std::string& name);

/// Numeric target with its tolerance.
struct GoldenTarget {
  double value = 0;
  double tol = 0;
  std::string compare = "abs";  // "abs": |x - value| <= tol; "max": x <= value; "min": x >= value
};

struct GoldenReport {
  std::string theory;
  std::map<std::string, std::string> el;           // field component -> el density
  std::string alpha;                               // bulk jets
  std::string alpha_boundary;                      // restricted
  std::string omega;
  std::string omega_boundary;
  std::map<std::string, std::string> constraints;  // name -> restricted density
  std::map<std::string, long> integers;            // ranks, kernel dimensions, counts
  std::map<std::string, GoldenTarget> targets;     // lattice checks
  std::map<std::string, std::string> origin;       // entry -> how the value was obtained
};

/// Reads data/golden/<name>.json. Throws SpecError for an unknown name.
GoldenReport golden(const std::string& name);

/// Directory holding shipped data (theory files, golden reports).
std::string data_dir();

// ---------------------------------------------------------------------------
// Palatini-Cartan theory in four dimensions.

/// Symbolic coframe and connection on the bulk (n = 4) or boundary (n = 3).
/// Base slot i of a boundary form is coordinate i + 1.
Form<Expr> pc_coframe(int n);
Form<Expr> pc_connection(int n);

/// Curvature F = d omega + omega ^ omega.
Form<Expr> pc_curvature(const Form<Expr>& omega, int n);
/// Covariant differential d_omega e = d e + omega . e.
Form<Expr> pc_covariant_d(const Form<Expr>& omega, const Form<Expr>& e, int n);

/// Lagrangian density: top coefficient of 1/2 e^e^F + Lambda/24 e^e^e^e.
Expr pc_lagrangian();

}  // namespace kt
