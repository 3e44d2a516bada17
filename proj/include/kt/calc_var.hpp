#pragma once

// Variational calculus on jets: variation, integration by parts into
// Euler-Lagrange densities and a boundary 1-form, the vertical differential,
// restriction to boundary fields, and extraction of constraint densities.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kt/expr.hpp"
#include "kt/expr_io.hpp"

namespace kt {

struct FieldDecl {
  std::string name;
  int base = 0;
  int internal = 0;
  bool antisym = false;
  bool symmetric = false;
  bool positive = false;

  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

/// Symbol living only on the boundary (phi0, F0[i], rho, xi[i], ...).
/// Multipliers parametrize non-dynamical data (lapse/shift-like components).
struct BoundaryDecl {
  std::string name;
  int base = 0;
  int internal = 0;
  bool multiplier = false;
  bool positive = false;

  friend bool operator==(const BoundaryDecl&, const BoundaryDecl&) = default;
};

struct BackgroundDecl {
  std::string name;
  int base = 0;
  int internal = 0;
  bool constant = false;          // position independent
  bool time_independent = false;  // constant along the transversal coordinate
  bool symmetric = false;
  bool positive = false;

  friend bool operator==(const BackgroundDecl&, const BackgroundDecl&) = default;
};

/// Boundary value of a field jet: lhs (a field jet) is replaced by rhs; a jet
/// carrying additional derivatives is replaced by the total derivative of rhs.
struct RestrictRule {
  JetVar lhs;
  Expr rhs;

  friend bool operator==(const RestrictRule&, const RestrictRule&) = default;
};

struct TheorySpec {
  std::string name;
  std::vector<std::string> coords;
  int transversal = 0;
  int internal_dim = 4;
  std::vector<FieldDecl> fields;
  std::vector<BoundaryDecl> boundary;
  std::vector<BackgroundDecl> backgrounds;
  std::vector<std::string> functions;
  std::string metric;  // non-empty: split metric declared (hinv, sqrth)
  bool metric_time_independent = false;
  Expr lagrangian;
  int jet_order = 3;
  std::vector<RestrictRule> restrictions;
  std::vector<Expr> surfaces;

  int dim() const { return static_cast<int>(coords.size()); }

  /// Symbol table for parsing and printing expressions of this theory.
  ExprContext context() const;

  /// Throws SpecError on undeclared symbols, jet order overflow, duplicates.
  void validate() const;

  bool is_bulk_field(const std::string& name) const;
  const BoundaryDecl* boundary_decl(const std::string& name) const;

  friend bool operator==(const TheorySpec& a, const TheorySpec& b);
};

// ---------------------------------------------------------------------------
// Local variational forms

/// Sum of coefficient * (delta g1 ^ ... ^ delta gp) with p <= 2. Generators are
/// kept strictly increasing; swapping two generators flips the sign.
class LocalVarForm {
 public:
  explicit LocalVarForm(int degree = 0) : degree_(degree) {}

  static LocalVarForm scalar(const Expr& f);

  int degree() const { return degree_; }
  const std::map<std::vector<JetVar>, Expr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Add coeff * delta g1 ^ ... (generators in any order).
  void add(std::vector<JetVar> gens, const Expr& coeff);
  Expr coefficient(const std::vector<JetVar>& gens) const;
  /// Degree-0 value.
  Expr value() const { return coefficient({}); }

  LocalVarForm& operator+=(const LocalVarForm& o);
  LocalVarForm& operator-=(const LocalVarForm& o);
  friend LocalVarForm operator+(LocalVarForm a, const LocalVarForm& b) { return a += b; }
  friend LocalVarForm operator-(LocalVarForm a, const LocalVarForm& b) { return a -= b; }
  friend LocalVarForm operator*(const Expr& c, const LocalVarForm& f);
  friend bool operator==(const LocalVarForm& a, const LocalVarForm& b) {
    return a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

 private:
  int degree_;
  std::map<std::vector<JetVar>, Expr> terms_;
};

LocalVarForm wedge(const LocalVarForm& a, const LocalVarForm& b);

/// Total derivative along `coord`: D(c dg) = (Dc) dg + c d(D g).
LocalVarForm total_derivative(const LocalVarForm& f, int coord, int max_order = 3);

/// Vertical exterior derivative; varied symbols are those of kind Field.
LocalVarForm vertical_delta(const LocalVarForm& f);
/// delta of a function: sum over varied jets of (d f / d v) delta v.
LocalVarForm vertical_delta(const Expr& f);

/// Variation of the Lagrangian: sum over field jets of dL/dv delta v.
LocalVarForm variation(const TheorySpec& t);

struct ElEquation {
  JetVar field;   // field component (no derivatives)
  Expr density;   // el = -(coefficient of delta field after integration by parts)
};

struct BoundarySplit {
  std::vector<ElEquation> el;
  LocalVarForm alpha{1};                      // transversal boundary term
  std::map<int, LocalVarForm> divergence;     // recorded tangential divergences
  /// The boundary density carries + at the upper end of the transversal
  /// coordinate and - at the lower end; alpha is the upper-end copy.
  int orientation = +1;
};

/// Integrate by parts: v = -sum el delta phi + sum_i D_i div_i + D_t alpha.
BoundarySplit ibp_split(const LocalVarForm& v, const TheorySpec& t);

/// Replace field jets by their boundary values.
Expr boundary_restrict(const Expr& e, const TheorySpec& t);
LocalVarForm boundary_restrict(const LocalVarForm& f, const TheorySpec& t);

/// True if the restricted density uses only boundary data: no transversal
/// derivatives, no multipliers, no field components along the transversal.
bool is_boundary_density(const Expr& e, const TheorySpec& t);

struct Constraint {
  std::string name;
  JetVar field;
  Expr density;  // restricted coefficient of delta field (= -el)
};

std::vector<Constraint> constraint_extract(const TheorySpec& t, const BoundarySplit& split);
std::vector<Constraint> constraint_extract(const TheorySpec& t);

/// Text of a local variational form, e.g. "m*q' delta(q)" or "m delta(v) ^ delta(q)".
std::string to_text(const LocalVarForm& f, const ExprContext& ctx);
std::string to_latex(const LocalVarForm& f, const ExprContext& ctx);

}  // namespace kt
