#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "kt/error.hpp"
#include "kt/pointlin.hpp"

using namespace kt;

namespace {

int perm_sign(std::vector<int> p) {
  int s = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (p[i] > p[j]) s = -s;
    }
  }
  return s;
}

// Tensor component (v . e)^c_{ij} = v^{cb}_i eta_bb e^b_j - (i <-> j).
Rational act_oracle(const PForm& v, const PForm& e, int c, int i, int j) {
  Rational s = 0;
  for (int b = 0; b < 4; ++b) {
    s += v.component({i}, {c, b}) * eta_diag(b) * e.component({j}, {b});
    s -= v.component({j}, {c, b}) * eta_diag(b) * e.component({i}, {b});
  }
  return s;
}

bool is_zero_vec(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
}

}  // namespace

TEST_CASE("dimension bookkeeping") {
  CHECK(PForm(1, 2).size() == 18);
  CHECK(PForm(2, 3).size() == 12);
  CHECK(PForm(2, 2).size() == 18);
  CHECK(PForm(1, 1).size() == 12);
  for (int k = 0; k <= 3; ++k) {
    for (int l = 0; l <= 4; ++l) CHECK(PForm(k, l).size() == static_cast<std::size_t>(binomial(3, k) * binomial(4, l)));
  }
}

TEST_CASE("wedge") {
  ExactSampler s(1);
  const PForm x = s.random_form(1, 2);
  CHECK(wedge(x, PForm(1, 1)).is_zero());

  // e^e^e by direct expansion over all ordered index triples
  const PForm e = canonical_coframe();
  const PForm eee = wedge(e, wedge(e, e));
  std::vector<int> legs{0, 1, 2};
  for (Mask A : masks_of(4, 3)) {
    std::vector<int> inner;
    for (int a = 0; a < 4; ++a) {
      if (A & (1u << a)) inner.push_back(a);
    }
    Rational expect = 0;
    std::vector<int> p = legs;
    do {
      std::vector<int> q = inner;
      do {
        expect += perm_sign(p) * perm_sign(q) * e.component({p[0]}, {q[0]}) * e.component({p[1]}, {q[1]}) *
                  e.component({p[2]}, {q[2]});
      } while (std::next_permutation(q.begin(), q.end()));
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(eee.at(7, A) == expect);
  }
  CHECK(eee.at(7, 0b1110) == 6);
  CHECK(!eee.is_zero());

  for (int trial = 0; trial < 20; ++trial) {
    const int k1 = trial % 2, l1 = 1 + trial % 2, k2 = 1, l2 = trial % 3;
    const PForm a = s.random_form(k1, l1), b = s.random_form(k2, l2);
    const int sign = ((k1 * k2 + l1 * l2) % 2) ? -1 : 1;
    CHECK(wedge(a, b) == Rational(sign) * wedge(b, a));
    const PForm c = s.random_form(1, 0);
    CHECK(wedge(wedge(a, b), c) == wedge(a, wedge(b, c)));
  }
  CHECK_THROWS_AS(wedge(PForm(2, 1), PForm(2, 1)), ShapeError);
}

TEST_CASE("internal_act") {
  const PForm e = canonical_coframe();
  CHECK(internal_act(PForm(1, 2), e).is_zero());

  PForm v(1, 2);
  v.add_component({0}, {0, 2}, Rational(1));
  const PForm r = internal_act(v, e);
  int nonzero = 0;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        CHECK(r.component({i, j}, {c}) == act_oracle(v, e, c, i, j));
        if (r.component({i, j}, {c}) != 0) ++nonzero;
      }
    }
  }
  CHECK(nonzero == 1);

  ExactSampler s(2);
  for (int trial = 0; trial < 10; ++trial) {
    const PForm v1 = s.random_form(1, 2), v2 = s.random_form(1, 2), f = s.random_form(1, 1);
    const Rational a = s.small_rational();
    CHECK(internal_act(v1 + a * v2, f) == internal_act(v1, f) + a * internal_act(v2, f));
    for (int c = 0; c < 4; ++c) {
      CHECK(internal_act(v1, f).component({0, 2}, {c}) == act_oracle(v1, f, c, 0, 2));
    }
  }
}

TEST_CASE("linmap_kernel") {
  QMatrix id(4, 4), zero(3, 5);
  for (std::size_t i = 0; i < 4; ++i) id(i, i) = 1;
  CHECK(linmap_kernel(id).empty());
  CHECK(linmap_kernel(zero).size() == 5);

  const LinMap w = wedge_map(canonical_coframe(), 1, 2);
  const auto ker = linmap_kernel(w.matrix);
  CHECK(ker.size() == 6);
  for (const auto& v : ker) CHECK(is_zero_vec(w.matrix.apply(v)));
}

TEST_CASE("coframe_kernel_dim") {
  const PForm e = canonical_coframe();
  CHECK(coframe_kernel_dim(e) == 6);
  ExactSampler s(3);
  for (int trial = 0; trial < 5; ++trial) CHECK(coframe_kernel_dim(s.transform_internal(e)) == 6);
  PForm bad(1, 1);
  bad.add_component({0}, {1}, Rational(1));
  bad.add_component({1}, {1}, Rational(1));
  bad.add_component({2}, {3}, Rational(1));
  CHECK_THROWS_AS(coframe_kernel_dim(bad), DegeneracyError);
}

TEST_CASE("injective_w21") {
  const PForm e = canonical_coframe();
  CHECK(injective_w21(e));
  CHECK(injective_w21(Rational(2) * e));

  PForm bad(1, 1);
  bad.add_component({0}, {1}, Rational(1));
  bad.add_component({1}, {1}, Rational(1));
  bad.add_component({2}, {3}, Rational(1));
  CHECK(!injective_w21(bad));
  const PForm bulk = bulk_coframe(bad, normal_section(bad));
  const LinMap w = wedge_map(bulk, 2, 1);
  const auto ker = linmap_kernel(w.matrix);
  REQUIRE(!ker.empty());
  CHECK(!is_zero_vec(ker[0]));
  CHECK(is_zero_vec(w.matrix.apply(ker[0])));
}

TEST_CASE("structural_fix") {
  const PForm e = canonical_coframe();
  const PForm eps = normal_section(e);
  CHECK(eps.component({}, {0}) == 1);

  // T = e ^ tau satisfies eps ^ T = e ^ sigma0 with sigma0 = -eps ^ tau
  ExactSampler s(4);
  const PForm tau = s.random_form(1, 0);
  const PForm T0 = wedge(e, tau);
  REQUIRE(!T0.is_zero());
  const StructuralFix trivial = structural_fix(e, eps, T0);
  CHECK(trivial.v.is_zero());
  CHECK(trivial.v_ambiguity == 0);
  CHECK((wedge(eps, T0) - wedge(e, trivial.sigma)).is_zero());

  for (int trial = 0; trial < 10; ++trial) {
    const PForm ee = s.spacelike_coframe();
    const PForm ep = normal_section(ee);
    const PForm T = s.random_form(2, 1);
    const StructuralFix fix = structural_fix(ee, ep, T);
    CHECK(wedge(ee, fix.v).is_zero());
    CHECK((wedge(ep, T + internal_act(fix.v, ee)) - wedge(ee, fix.sigma)).is_zero());
    CHECK(fix.v_ambiguity == 0);
    CHECK(fix.sigma_kernel_dim == 0);

    // class invariance: shifting T by v0 . e with e ^ v0 = 0 shifts v by -v0
    const auto ker = linmap_kernel(wedge_map(ee, 1, 2).matrix);
    std::vector<Rational> v0vec(18);
    for (const auto& k : ker) {
      const Rational c = s.small_rational();
      for (std::size_t i = 0; i < 18; ++i) v0vec[i] += c * k[i];
    }
    const PForm v0 = from_vector(v0vec, 1, 2);
    const StructuralFix shifted = structural_fix(ee, ep, T + internal_act(v0, ee));
    CHECK((shifted.v - (fix.v - v0)).is_zero());
  }

  PForm spacelike_eps(0, 1);
  spacelike_eps[1] = 1;
  CHECK_THROWS_AS(structural_fix(e, spacelike_eps, T0), DegeneracyError);
}

TEST_CASE("property: randomized coframes") {
  ExactSampler s(2025);
  for (int trial = 0; trial < 100; ++trial) {
    const PForm e = s.spacelike_coframe();
    CHECK(coframe_kernel_dim(e) == 6);
    CHECK(injective_w21(e));
  }
}
