#include "kt/pointlin.hpp"

#include "kt/error.hpp"

namespace kt {

std::vector<Rational> QMatrix::apply(const std::vector<Rational>& x) const {
  if (x.size() != cols_) throw ShapeError("matrix-vector size mismatch");
  std::vector<Rational> y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const Rational& a = (*this)(i, j);
      if (a != 0 && x[j] != 0) y[i] += a * x[j];
    }
  }
  return y;
}

Rref rref(QMatrix m) {
  Rref out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t piv = row;
    while (piv < m.rows() && m(piv, col) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != row) {
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(row, j));
    }
    const Rational inv = 1 / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      const Rational f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) {
        if (m(row, j) != 0) m(i, j) -= f * m(row, j);
      }
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.m = std::move(m);
  return out;
}

std::size_t rank(const QMatrix& m) { return rref(m).pivots.size(); }

std::vector<std::vector<Rational>> linmap_kernel(const QMatrix& m) {
  const Rref r = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : r.pivots) is_pivot[p] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(m.cols());
    v[free] = 1;
    for (std::size_t row = 0; row < r.pivots.size(); ++row) v[r.pivots[row]] = -r.m(row, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<Rational> to_vector(const PForm& f) {
  std::vector<Rational> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i];
  return v;
}

PForm from_vector(const std::vector<Rational>& x, int k, int l, int n, int d) {
  PForm f(k, l, n, d);
  if (x.size() != f.size()) throw ShapeError("vector length does not match form shape");
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = x[i];
  return f;
}

namespace {

template <class Apply>
LinMap build_map(int k, int l, int n, int d, int out_k, int out_l, Apply&& apply) {
  LinMap map{k, l, out_k, out_l, {}};
  PForm unit(k, l, n, d);
  PForm probe = apply(unit);
  map.matrix = QMatrix(probe.size(), unit.size());
  for (std::size_t j = 0; j < unit.size(); ++j) {
    PForm basis(k, l, n, d);
    basis[j] = 1;
    const PForm image = apply(basis);
    for (std::size_t i = 0; i < image.size(); ++i) map.matrix(i, j) = image[i];
  }
  return map;
}

Rational det(QMatrix m) {
  const std::size_t n = m.rows();
  Rational d = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      d = -d;
    }
    d *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      const Rational f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return d;
}

}  // namespace

LinMap wedge_map(const PForm& a, int k, int l) {
  return build_map(k, l, a.n(), a.d(), a.k() + k, a.l() + l,
                   [&a](const PForm& x) { return wedge(a, x); });
}

LinMap act_map(const PForm& e, int k) {
  return build_map(k, 2, e.n(), e.d(), k + e.k(), 1,
                   [&e](const PForm& v) { return internal_act(v, e); });
}

PForm canonical_coframe() {
  PForm e(1, 1);
  for (int i = 0; i < 3; ++i) e.add_component({i}, {i + 1}, Rational(1));
  return e;
}

std::vector<Rational> leg(const PForm& e, int i) {
  if (e.k() != 1 || e.l() != 1) throw ShapeError("coframe must be a (1,1)-form");
  std::vector<Rational> v(static_cast<std::size_t>(e.d()));
  for (int a = 0; a < e.d(); ++a) v[static_cast<std::size_t>(a)] = e.component({i}, {a});
  return v;
}

bool boundary_nondegenerate(const PForm& e) {
  QMatrix m(static_cast<std::size_t>(e.n()), static_cast<std::size_t>(e.d()));
  for (int i = 0; i < e.n(); ++i) {
    const auto v = leg(e, i);
    for (int a = 0; a < e.d(); ++a) m(static_cast<std::size_t>(i), static_cast<std::size_t>(a)) = v[static_cast<std::size_t>(a)];
  }
  return rank(m) == static_cast<std::size_t>(e.n());
}

QMatrix boundary_metric(const PForm& e) {
  const auto n = static_cast<std::size_t>(e.n());
  QMatrix g(n, n);
  std::vector<std::vector<Rational>> legs;
  for (int i = 0; i < e.n(); ++i) legs.push_back(leg(e, i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Rational s = 0;
      for (int a = 0; a < e.d(); ++a) s += eta_diag(a) * legs[i][static_cast<std::size_t>(a)] * legs[j][static_cast<std::size_t>(a)];
      g(i, j) = s;
    }
  }
  return g;
}

bool metric_nondegenerate(const PForm& e) { return det(boundary_metric(e)) != 0; }

PForm normal_section(const PForm& e) {
  const auto d = static_cast<std::size_t>(e.d());
  QMatrix m(static_cast<std::size_t>(e.n()), d);
  for (int i = 0; i < e.n(); ++i) {
    const auto v = leg(e, i);
    for (std::size_t a = 0; a < d; ++a) m(static_cast<std::size_t>(i), a) = eta_diag(static_cast<int>(a)) * v[a];
  }
  const auto ker = linmap_kernel(m);
  PForm eps(0, 1, e.n(), e.d());
  for (std::size_t a = 0; a < d; ++a) eps[a] = ker.front()[a];
  if (eps[0] < 0) eps = Rational(-1) * eps;
  return eps;
}

int coframe_kernel_dim(const PForm& e) {
  if (!boundary_nondegenerate(e)) throw DegeneracyError("coframe legs are linearly dependent");
  const LinMap w = wedge_map(e, 1, 2);
  return static_cast<int>(w.matrix.cols() - rank(w.matrix));
}

PForm bulk_coframe(const PForm& e, const PForm& eps) {
  if (e.k() != 1 || e.l() != 1 || eps.k() != 0 || eps.l() != 1) throw ShapeError("bulk_coframe shapes");
  PForm b(1, 1, e.n() + 1, e.d());
  for (int a = 0; a < e.d(); ++a) {
    b.add_component({0}, {a}, eps.component({}, {a}));
    for (int i = 0; i < e.n(); ++i) b.add_component({i + 1}, {a}, e.component({i}, {a}));
  }
  return b;
}

bool injective_w21(const PForm& e) {
  const PForm bulk = e.n() == 4 ? e : bulk_coframe(e, normal_section(e));
  const LinMap w = wedge_map(bulk, 2, 1);
  return rank(w.matrix) == w.matrix.cols();
}

StructuralFix structural_fix(const PForm& e, const PForm& eps, const PForm& T) {
  if (e.k() != 1 || e.l() != 1 || eps.k() != 0 || eps.l() != 1 || T.k() != 2 || T.l() != 1) {
    throw ShapeError("structural_fix expects e (1,1), eps (0,1), T (2,1)");
  }
  if (!metric_nondegenerate(e)) throw DegeneracyError("boundary metric is degenerate");
  Rational eps_norm = 0;
  for (int a = 0; a < e.d(); ++a) eps_norm += eta_diag(a) * eps[static_cast<std::size_t>(a)] * eps[static_cast<std::size_t>(a)];
  if (eps_norm >= 0) throw DegeneracyError("eps is not time-like");
  if (!injective_w21(bulk_coframe(e, eps))) throw DegeneracyError("eps and e do not span V");

  // unknowns: v (1,2) then sigma (1,1); equations: e^v (2,3) then eps^(v.e) - e^sigma (2,2)
  const QMatrix ev = wedge_map(e, 1, 2).matrix;
  const LinMap ve = act_map(e, 1);
  const QMatrix eps_wedge = wedge_map(eps, 2, 1).matrix;
  const QMatrix es = wedge_map(e, 1, 1).matrix;
  const std::size_t nv = ev.cols(), ns = es.cols();
  const std::size_t r1 = ev.rows(), r2 = es.rows();

  QMatrix sys(r1 + r2, nv + ns + 1);
  for (std::size_t i = 0; i < r1; ++i) {
    for (std::size_t j = 0; j < nv; ++j) sys(i, j) = ev(i, j);
  }
  // eps ^ (v . e): compose the two maps
  for (std::size_t i = 0; i < r2; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      Rational s = 0;
      for (std::size_t m = 0; m < ve.matrix.rows(); ++m) {
        if (eps_wedge(i, m) != 0 && ve.matrix(m, j) != 0) s += eps_wedge(i, m) * ve.matrix(m, j);
      }
      sys(r1 + i, j) = s;
    }
    for (std::size_t j = 0; j < ns; ++j) sys(r1 + i, nv + j) = -es(i, j);
  }
  const PForm rhs = wedge(eps, T);
  for (std::size_t i = 0; i < r2; ++i) sys(r1 + i, nv + ns) = -rhs[i];

  const Rref r = rref(sys);
  if (!r.pivots.empty() && r.pivots.back() == nv + ns) {
    throw InternalLogicError("structural constraint system is inconsistent");
  }
  std::vector<Rational> sol(nv + ns);
  for (std::size_t row = 0; row < r.pivots.size(); ++row) sol[r.pivots[row]] = r.m(row, nv + ns);

  StructuralFix out;
  out.v = from_vector({sol.begin(), sol.begin() + static_cast<long>(nv)}, 1, 2, e.n(), e.d());
  out.sigma = from_vector({sol.begin() + static_cast<long>(nv), sol.end()}, 1, 1, e.n(), e.d());

  // homogeneous kernel: free columns among the unknowns
  QMatrix hom(sys.rows(), nv + ns);
  for (std::size_t i = 0; i < sys.rows(); ++i) {
    for (std::size_t j = 0; j < nv + ns; ++j) hom(i, j) = sys(i, j);
  }
  const auto ker = linmap_kernel(hom);
  QMatrix vpart(ker.size(), nv);
  for (std::size_t i = 0; i < ker.size(); ++i) {
    for (std::size_t j = 0; j < nv; ++j) vpart(i, j) = ker[i][j];
  }
  out.v_ambiguity = static_cast<int>(rank(vpart));
  out.sigma_kernel_dim = static_cast<int>(ker.size()) - out.v_ambiguity;
  return out;
}

Rational ExactSampler::small_rational() {
  std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
  return make_rational(num(rng_), den(rng_));
}

PForm ExactSampler::random_form(int k, int l, int n, int d) {
  PForm f(k, l, n, d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = small_rational();
  return f;
}

PForm ExactSampler::spacelike_coframe() {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    PForm e = random_form(1, 1);
    const QMatrix g = boundary_metric(e);
    // Sylvester: leading principal minors positive
    bool ok = g(0, 0) > 0;
    if (ok) {
      QMatrix m2(2, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) m2(i, j) = g(i, j);
      }
      ok = det(m2) > 0 && det(g) > 0;
    }
    if (ok) return e;
  }
  throw DegeneracyError("could not sample a space-like coframe");
}

PForm ExactSampler::transform_internal(const PForm& e) {
  const auto d = static_cast<std::size_t>(e.d());
  QMatrix g(d, d);
  do {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) g(i, j) = small_rational();
    }
  } while (det(g) == 0);
  PForm out(e.k(), e.l(), e.n(), e.d());
  for (int i = 0; i < e.n(); ++i) {
    const auto v = leg(e, i);
    for (std::size_t a = 0; a < d; ++a) {
      Rational s = 0;
      for (std::size_t b = 0; b < d; ++b) s += g(a, b) * v[b];
      out.add_component({i}, {static_cast<int>(a)}, s);
    }
  }
  return out;
}

}  // namespace kt
