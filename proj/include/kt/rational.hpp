#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>

namespace kt {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// "p" or "p/q" in lowest terms.
inline std::string to_string(const Rational& r) { return r.get_str(); }

/// Size in bits of numerator plus denominator.
inline std::size_t bit_size(const Rational& r) {
  return mpz_sizeinbase(r.get_num_mpz_t(), 2) + mpz_sizeinbase(r.get_den_mpz_t(), 2);
}

inline bool is_perfect_square(const mpz_class& z) { return mpz_perfect_square_p(z.get_mpz_t()) != 0; }

}  // namespace kt
