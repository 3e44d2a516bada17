#pragma once

// (k,l)-forms: k-forms on an n-dimensional base with values in the l-th
// exterior power of an internal space V of dimension d with metric
// eta = diag(-1, +1, ..., +1).
//
// A form is stored by its components on strictly increasing multi-indices
// (dx^I tensor v_A), indexed by bitmasks. The product convention is
//   (dx^I v_A) ^ (dx^J v_B) = (dx^I ^ dx^J) (v_A ^ v_B),
// which gives wedge(a, b) = (-1)^(k k' + l l') wedge(b, a).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "kt/error.hpp"
#include "kt/expr.hpp"
#include "kt/rational.hpp"

namespace kt {

using Mask = std::uint32_t;

/// Sign of the permutation sorting the concatenation of I then J (disjoint).
inline int merge_sign(Mask I, Mask J) {
  int swaps = 0;
  for (Mask j = J; j != 0; j &= j - 1) {
    const int bit = std::countr_zero(j);
    swaps += std::popcount(I >> (bit + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

/// All masks over `n` bits with `k` bits set, in increasing numeric order.
inline std::vector<Mask> masks_of(int n, int k) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << n); ++m) {
    if (std::popcount(m) == k) out.push_back(m);
  }
  return out;
}

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline int eta_diag(int a) { return a == 0 ? -1 : 1; }

namespace detail {
inline bool is_zero_value(const Rational& x) { return x == 0; }
inline bool is_zero_value(double x) { return x == 0.0; }
inline bool is_zero_value(const Expr& x) { return x.is_zero(); }
template <class T>
void accumulate(T& slot, const T& v, int sign) {
  if (sign > 0) {
    slot += v;
  } else {
    slot -= v;
  }
}
}  // namespace detail

template <class T>
class Form {
 public:
  Form() = default;
  Form(int k, int l, int n = 3, int d = 4)
      : k_(k), l_(l), n_(n), d_(d), base_(masks_of(n, k)), internal_(masks_of(d, l)) {
    if (k < 0 || k > n || l < 0 || l > d) throw ShapeError("form degree out of range");
    data_.assign(base_.size() * internal_.size(), T(0L));
  }

  int k() const { return k_; }
  int l() const { return l_; }
  int n() const { return n_; }
  int d() const { return d_; }
  std::size_t size() const { return data_.size(); }

  const std::vector<Mask>& base_masks() const { return base_; }
  const std::vector<Mask>& internal_masks() const { return internal_; }

  /// Flat storage: position = base rank * C(d,l) + internal rank.
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }
  Mask base_of(std::size_t i) const { return base_[i / internal_.size()]; }
  Mask internal_of(std::size_t i) const { return internal_[i % internal_.size()]; }

  std::size_t position(Mask I, Mask A) const {
    return rank_of(base_, I) * internal_.size() + rank_of(internal_, A);
  }
  const T& at(Mask I, Mask A) const { return data_[position(I, A)]; }
  T& at(Mask I, Mask A) { return data_[position(I, A)]; }

  /// Component with index lists in arbitrary order; returns the signed value.
  T component(const std::vector<int>& base, const std::vector<int>& internal) const {
    int sign = 1;
    Mask I = 0, A = 0;
    if (!gather(base, I, sign) || !gather(internal, A, sign)) return T(0L);
    if (sign > 0) return at(I, A);
    return T(T(0L) - at(I, A));
  }
  /// Add `value` to the component with the given (unordered) index lists.
  void add_component(const std::vector<int>& base, const std::vector<int>& internal, const T& value) {
    int sign = 1;
    Mask I = 0, A = 0;
    if (!gather(base, I, sign) || !gather(internal, A, sign)) return;
    detail::accumulate(at(I, A), value, sign);
  }

  bool is_zero() const {
    for (const auto& x : data_) {
      if (!detail::is_zero_value(x)) return false;
    }
    return true;
  }

  Form& operator+=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = data_[i] + o.data_[i];
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = data_[i] - o.data_[i];
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(const T& s, Form a) {
    for (auto& x : a.data_) x = s * x;
    return a;
  }
  friend bool operator==(const Form& a, const Form& b) {
    return a.k_ == b.k_ && a.l_ == b.l_ && a.n_ == b.n_ && a.d_ == b.d_ && a.data_ == b.data_;
  }

  /// Coefficient of dx^{1..n} v_{0..d-1}; requires k = n, l = d.
  const T& top() const {
    if (k_ != n_ || l_ != d_) throw ShapeError("top coefficient needs a (n,d)-form");
    return data_[0];
  }

 private:
  static std::size_t rank_of(const std::vector<Mask>& list, Mask m) {
    auto it = std::lower_bound(list.begin(), list.end(), m);
    if (it == list.end() || *it != m) throw ShapeError("multi-index not in this form");
    return static_cast<std::size_t>(it - list.begin());
  }
  static bool gather(const std::vector<int>& idx, Mask& m, int& sign) {
    for (int i : idx) {
      const Mask bit = Mask{1} << i;
      if (m & bit) return false;
      if (std::popcount(m >> (i + 1)) & 1) sign = -sign;
      m |= bit;
    }
    return true;
  }
  void check_same(const Form& o) const {
    if (k_ != o.k_ || l_ != o.l_ || n_ != o.n_ || d_ != o.d_) throw ShapeError("form shapes differ");
  }

  int k_ = 0, l_ = 0, n_ = 3, d_ = 4;
  std::vector<Mask> base_, internal_;
  std::vector<T> data_;
};

template <class T>
Form<T> wedge(const Form<T>& a, const Form<T>& b) {
  if (a.n() != b.n() || a.d() != b.d()) throw ShapeError("wedge of forms over different spaces");
  if (a.k() + b.k() > a.n() || a.l() + b.l() > a.d()) throw ShapeError("wedge degree overflow");
  Form<T> r(a.k() + b.k(), a.l() + b.l(), a.n(), a.d());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (detail::is_zero_value(a[i])) continue;
    const Mask I = a.base_of(i), A = a.internal_of(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (detail::is_zero_value(b[j])) continue;
      const Mask J = b.base_of(j), B = b.internal_of(j);
      if ((I & J) || (A & B)) continue;
      detail::accumulate(r.at(I | J, A | B), T(a[i] * b[j]), merge_sign(I, J) * merge_sign(A, B));
    }
  }
  return r;
}

/// Component X^{ab} of a form with l = 2, antisymmetric in (a,b).
template <class T>
T pair_component(const Form<T>& x, std::size_t base_rank, int a, int b) {
  if (a == b) return T(0L);
  const Mask A = (Mask{1} << a) | (Mask{1} << b);
  const std::size_t pos =
      base_rank * x.internal_masks().size() +
      static_cast<std::size_t>(std::lower_bound(x.internal_masks().begin(), x.internal_masks().end(), A) -
                               x.internal_masks().begin());
  if (a < b) return x[pos];
  return T(T(0L) - x[pos]);
}

/// (X . Y)^a = X^{ab} eta_{bc} Y^c with the form parts wedged:
/// (k,2) x (k',1) -> (k+k',1).
template <class T>
Form<T> internal_act(const Form<T>& x, const Form<T>& y) {
  if (x.l() != 2 || y.l() != 1) throw ShapeError("internal_act needs a (k,2) and a (k',1) form");
  if (x.k() + y.k() > x.n()) throw ShapeError("internal_act degree overflow");
  const int d = x.d();
  Form<T> r(x.k() + y.k(), 1, x.n(), d);
  const std::size_t nb_x = x.base_masks().size(), nb_y = y.base_masks().size();
  for (std::size_t bi = 0; bi < nb_x; ++bi) {
    const Mask I = x.base_masks()[bi];
    for (std::size_t bj = 0; bj < nb_y; ++bj) {
      const Mask J = y.base_masks()[bj];
      if (I & J) continue;
      const int s = merge_sign(I, J);
      for (int a = 0; a < d; ++a) {
        T acc(0L);
        for (int b = 0; b < d; ++b) {
          const T& yb = y[bj * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)];
          if (a == b || detail::is_zero_value(yb)) continue;
          const T xab = pair_component(x, bi, a, b);
          if (detail::is_zero_value(xab)) continue;
          detail::accumulate(acc, T(xab * yb), eta_diag(b));
        }
        if (detail::is_zero_value(acc)) continue;
        detail::accumulate(r.at(I | J, Mask{1} << a), acc, s);
      }
    }
  }
  return r;
}

/// (X ^ Y)^{ab} = X^a_c ^ Y^{cb}, indices lowered with eta: (k,2) x (k',2) -> (k+k',2).
template <class T>
Form<T> lie_wedge(const Form<T>& x, const Form<T>& y) {
  if (x.l() != 2 || y.l() != 2) throw ShapeError("lie_wedge needs two (k,2) forms");
  if (x.k() + y.k() > x.n()) throw ShapeError("lie_wedge degree overflow");
  const int d = x.d();
  Form<T> r(x.k() + y.k(), 2, x.n(), d);
  for (std::size_t bi = 0; bi < x.base_masks().size(); ++bi) {
    const Mask I = x.base_masks()[bi];
    for (std::size_t bj = 0; bj < y.base_masks().size(); ++bj) {
      const Mask J = y.base_masks()[bj];
      if (I & J) continue;
      const int s = merge_sign(I, J);
      for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
          T acc(0L);
          for (int c = 0; c < d; ++c) {
            const T xac = pair_component(x, bi, a, c);
            if (detail::is_zero_value(xac)) continue;
            const T ycb = pair_component(y, bj, c, b);
            if (detail::is_zero_value(ycb)) continue;
            detail::accumulate(acc, T(xac * ycb), eta_diag(c));
          }
          if (detail::is_zero_value(acc)) continue;
          detail::accumulate(r.at(I | J, (Mask{1} << a) | (Mask{1} << b)), acc, s);
        }
      }
    }
  }
  return r;
}

/// Exterior derivative along the base for forms with symbolic coefficients;
/// `coord_of(i)` maps base slot i to the coordinate index used by
/// total_derivative.
template <class CoordOf>
Form<Expr> exterior_d(const Form<Expr>& x, CoordOf&& coord_of, int max_order = 3) {
  if (x.k() + 1 > x.n()) throw ShapeError("exterior derivative degree overflow");
  Form<Expr> r(x.k() + 1, x.l(), x.n(), x.d());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_zero()) continue;
    const Mask I = x.base_of(i), A = x.internal_of(i);
    for (int m = 0; m < x.n(); ++m) {
      const Mask bit = Mask{1} << m;
      if (I & bit) continue;
      Expr dv = total_derivative(x[i], coord_of(m), max_order);
      if (dv.is_zero()) continue;
      detail::accumulate(r.at(I | bit, A), dv, merge_sign(bit, I));
    }
  }
  return r;
}

}  // namespace kt
