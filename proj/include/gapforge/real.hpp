#pragma once

#include <cstdint>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gmpxx.h>

#include "u64_math.hpp"

namespace gapforge {

// Software quad float: 113-bit mantissa, identical results on every
// platform. All bound evaluation and constant fitting runs at this
// precision and only narrows to double at the reporting edge.
using real_t = boost::multiprecision::cpp_bin_float_quad;

inline const real_t& ln2_quad() {
    static const real_t v = log(real_t(2));
    return v;
}

// Nonnegative mpz to quad, correctly rounded by limb accumulation.
inline real_t real_from_mpz(const mpz_class& n) {
    static const real_t two64 = real_t(18446744073709551616.0); // 2^64
    real_t x = 0;
    for (std::size_t i = mpz_size(n.get_mpz_t()); i-- > 0;)
        x = x * two64 + real_t(static_cast<u64>(mpz_getlimbn(n.get_mpz_t(), static_cast<mp_size_t>(i))));
    return x;
}

// Natural log of n >= 1. For wide n only the top 128 bits enter the
// mantissa; the tail perturbs the result by less than 2^-127 relative, far
// inside the precision the bound comparisons rely on.
inline real_t log_mpz(const mpz_class& n) {
    if (n < 1) throw std::invalid_argument("log_mpz: n must be >= 1");
    const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    if (bits <= 128) return log(real_from_mpz(n));
    mpz_class top = n >> (bits - 128);
    return log(real_from_mpz(top)) + real_t(static_cast<u64>(bits - 128)) * ln2_quad();
}

// l_1 of an integer argument: max(1, log n).
inline real_t log_star1(const mpz_class& n) {
    real_t l = log_mpz(n);
    return l > 1 ? l : real_t(1);
}

// l_k(n): the k-fold composition of log_* starting from the integer n.
inline real_t log_star_iter(const mpz_class& n, unsigned k) {
    if (k == 0) throw std::invalid_argument("log_star_iter: k must be >= 1");
    real_t v = log_star1(n);
    for (unsigned i = 1; i < k; ++i) {
        real_t l = log(v);
        v = l > 1 ? l : real_t(1);
    }
    return v;
}

} // namespace gapforge
