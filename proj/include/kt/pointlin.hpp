#pragma once

// Exact linear algebra of (k,l)-forms at a single boundary point.

#include <cstdint>
#include <random>
#include <vector>

#include "kt/forms.hpp"
#include "kt/rational.hpp"

namespace kt {

using PForm = Form<Rational>;

/// Dense exact matrix, row-major.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<Rational> apply(const std::vector<Rational>& x) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// Reduced row echelon form; `pivots[r]` is the pivot column of row r.
struct Rref {
  QMatrix m;
  std::vector<std::size_t> pivots;
};

Rref rref(QMatrix m);
std::size_t rank(const QMatrix& m);

/// Exact kernel basis (one vector per free column).
std::vector<std::vector<Rational>> linmap_kernel(const QMatrix& m);

/// Linear map between form spaces together with its shapes.
struct LinMap {
  int in_k = 0, in_l = 0, out_k = 0, out_l = 0;
  QMatrix matrix;
};

/// x -> a ^ x from (k,l)-forms.
LinMap wedge_map(const PForm& a, int k, int l);
/// v -> v . e from (k,2)-forms.
LinMap act_map(const PForm& e, int k);

std::vector<Rational> to_vector(const PForm& f);
PForm from_vector(const std::vector<Rational>& x, int k, int l, int n = 3, int d = 4);

/// e^a_i = delta^a_i: the boundary legs are the spatial basis vectors of V.
PForm canonical_coframe();

/// Leg i of a (1,1)-form as a vector in V.
std::vector<Rational> leg(const PForm& e, int i);

/// The three spatial legs are linearly independent.
bool boundary_nondegenerate(const PForm& e);
/// Induced metric g_ij = eta(e_i, e_j) (weight of the pulled-back metric).
QMatrix boundary_metric(const PForm& e);
/// det g nonzero.
bool metric_nondegenerate(const PForm& e);

/// A nonzero vector eta-orthogonal to every leg (time-like when g is positive
/// definite). Not normalized.
PForm normal_section(const PForm& e);

/// dim ker (e ^ .) on (1,2)-forms. Throws DegeneracyError unless the legs are
/// independent.
int coframe_kernel_dim(const PForm& e);

/// e ^ . from (2,1) to (3,2) on the four-dimensional base: a boundary coframe is
/// completed by the normal section as the transversal leg.
bool injective_w21(const PForm& e);

/// Bulk (n = 4) coframe with slot 0 = eps and slots 1..3 = the legs of e.
PForm bulk_coframe(const PForm& e, const PForm& eps);

struct StructuralFix {
  PForm v;      // (1,2), e ^ v = 0
  PForm sigma;  // (1,1), one solution
  int v_ambiguity = 0;      // dim of the v-projection of the homogeneous kernel
  int sigma_kernel_dim = 0; // dim of the homogeneous kernel with v = 0
};

/// Solve e ^ v = 0 and eps ^ (T + v . e) = e ^ sigma for (v, sigma).
StructuralFix structural_fix(const PForm& e, const PForm& eps, const PForm& T);

/// Random exact data for tests and checks.
class ExactSampler {
 public:
  explicit ExactSampler(std::uint64_t seed) : rng_(seed) {}

  Rational small_rational();
  PForm random_form(int k, int l, int n = 3, int d = 4);
  /// Coframe with positive-definite boundary metric (rejection sampled).
  PForm spacelike_coframe();
  /// Random invertible (exact) change of basis of V applied to the legs of e.
  PForm transform_internal(const PForm& e);

 private:
  std::mt19937_64 rng_;
};

}  // namespace kt
