#pragma once

// Exact-rational expressions over jet variables.
//
// An Expr is a sum of monomials, each a rational coefficient times a product of
// integer powers of atoms. An atom is either a jet variable (a field component
// with a sorted multiset of coordinate derivatives) or a scalar function applied
// to a nested Expr. Every public operation returns the canonical normal form, so
// equality of expressions is equality of their term lists.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "kt/rational.hpp"

namespace kt {

enum class SymbolKind : std::uint8_t {
  Field,       // varied by the vertical differential
  Background,  // fixed, may depend on position
  Constant,    // fixed, position independent
};

struct JetVar {
  std::string name;
  std::vector<int> component;  // internal indices first, then base indices
  std::vector<int> deriv;      // coordinate indices, kept sorted
  SymbolKind kind = SymbolKind::Field;
  std::uint32_t frozen = 0;  // bit i set: constant along coordinate i
  bool positive = false;

  static JetVar field(std::string name, std::vector<int> component = {});
  static JetVar background(std::string name, std::vector<int> component = {},
                           std::uint32_t frozen = 0);
  static JetVar constant(std::string name);

  JetVar with_deriv(int coord) const;
  JetVar with_derivs(const std::vector<int>& coords) const;
  JetVar base() const;  // same symbol with the derivative multi-index cleared
  JetVar as_positive() const;
  int order() const { return static_cast<int>(deriv.size()); }
  int count_deriv(int coord) const;
  bool is_varied() const { return kind == SymbolKind::Field; }

  friend std::strong_ordering operator<=>(const JetVar& a, const JetVar& b);
  friend bool operator==(const JetVar& a, const JetVar& b) { return (a <=> b) == 0; }
};

class Expr;

/// Scalar function applied to an argument. `order` counts derivatives of the
/// function itself (V, V', V'', ...). The only built-in is "sqrt".
struct Call {
  std::string fn;
  int order = 0;
  std::shared_ptr<const Expr> arg;
};

using Atom = std::variant<JetVar, Call>;

struct Factor {
  Atom atom;
  int power = 1;
};

struct Term {
  Rational coeff;
  std::vector<Factor> factors;
};

int compare(const Expr& a, const Expr& b);
int compare(const Atom& a, const Atom& b);
int compare_factors(const std::vector<Factor>& a, const std::vector<Factor>& b);

struct NormalizeOptions {
  std::size_t max_coeff_bits = 1u << 16;
};

class Expr {
 public:
  Expr() = default;
  Expr(long c);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& c);  // NOLINT(google-explicit-constructor)
  explicit Expr(const JetVar& v);

  static Expr call(const std::string& fn, int order, const Expr& arg);
  static Expr sqrt(const Expr& arg);

  /// Wrap terms without canonicalizing; pass the result to normalize().
  static Expr raw(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()
  bool is_monomial() const { return terms_.size() == 1; }

  /// All jet variables, including those inside function arguments.
  std::set<JetVar> variables() const;

  Expr operator-() const;
  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(const Expr& o);
  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(const Expr& a, const Expr& b);

  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

 private:
  std::vector<Term> terms_;
  friend Expr normalize(const Expr& e, const NormalizeOptions& opts);
};

Expr normalize(const Expr& e, const NormalizeOptions& opts = {});

/// Integer power; negative exponents require a monomial.
Expr pow(const Expr& e, int n);

/// Partial derivative in a single jet variable.
Expr diff_jet(const Expr& e, const JetVar& v);

/// Total derivative along coordinate `coord`: every varying jet variable
/// gains the derivative index. Throws OrderLimitError past `max_order`.
Expr total_derivative(const Expr& e, int coord, int max_order = 3);

/// Replace jet variables (exact match) by expressions.
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const JetVar&)>& rule);

// ---------------------------------------------------------------------------
// Evaluation

using Number = std::variant<Rational, double>;

double to_double(const Number& n);
bool is_exact(const Number& n);
Number operator+(const Number& a, const Number& b);
Number operator*(const Number& a, const Number& b);

struct EvalEnv {
  std::function<std::optional<Number>(const JetVar&)> var;
  /// User-declared scalar functions: (name, derivative order, argument).
  std::function<std::optional<Number>(const std::string&, int, const Number&)> fn;
};

Number evaluate(const Expr& e, const EvalEnv& env);
Number evaluate(const Expr& e, const std::map<JetVar, Number>& point);

}  // namespace kt
