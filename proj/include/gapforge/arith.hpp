#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "errors.hpp"
#include "u64_math.hpp"

namespace gapforge {

// log_* x = max{1, log x}; the universal clamp that keeps every bound shape
// total. Defined for x > 0.
template <class Real>
Real log_star(const Real& x) {
    if (!(x > 0)) throw std::invalid_argument("log_star: argument must be positive");
    using std::log;
    Real l = log(x);
    return l > Real(1) ? l : Real(1);
}

// All primes <= limit, ascending. Meant for trial tables and p-bound
// stripping, not bulk number theory; limit is capped accordingly.
inline std::vector<u32> sieve_primes(u64 limit) {
    if (limit > (1ULL << 31)) throw std::invalid_argument("sieve_primes: limit too large");
    std::vector<u32> out;
    if (limit < 2) return out;
    std::vector<bool> comp(limit + 1, false);
    for (u64 i = 2; i * i <= limit; ++i)
        if (!comp[i])
            for (u64 j = i * i; j <= limit; j += i) comp[j] = true;
    for (u64 i = 2; i <= limit; ++i)
        if (!comp[i]) out.push_back(static_cast<u32>(i));
    return out;
}

// Fixed trial-division table: all primes below 10^4.
inline const std::vector<u32>& small_primes() {
    static const std::vector<u32> table = sieve_primes(9999);
    return table;
}

struct primality_result {
    bool prime = false;
    bool probabilistic = false; // prime verdict rests on randomized rounds
};

namespace detail {

inline bool miller_rabin_round(const mpz_class& n, const mpz_class& d, unsigned long s,
                               const mpz_class& a) {
    mpz_class x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return true;
    for (unsigned long r = 1; r < s; ++r) {
        x = x * x % n;
        if (x == n - 1) return true;
    }
    return false;
}

} // namespace detail

// Primality with certainty bookkeeping: deterministic (12-witness
// Miller-Rabin) below 2^64, else 64 rounds with bases seeded from n itself,
// so the verdict is reproducible and the error probability is below 2^-128.
// Composite verdicts are always certain.
inline primality_result classify_prime(const mpz_class& n) {
    if (n < 2) return {false, false};
    if (mpz_fits_ulong_p(n.get_mpz_t()))
        return {is_prime_u64(mpz_get_ui(n.get_mpz_t())), false};
    if (mpz_even_p(n.get_mpz_t())) return {false, false};
    mpz_class d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    d >>= s;
    u64 seed = mpz_fdiv_ui(n.get_mpz_t(), ~0ULL) ^
               (static_cast<u64>(mpz_sizeinbase(n.get_mpz_t(), 2)) * 0x9e3779b97f4a7c15ULL);
    for (int i = 0; i < 64; ++i) {
        mpz_class a = 2 + mpz_class(splitmix64(seed + static_cast<u64>(i)));
        if (!detail::miller_rabin_round(n, d, s, a)) return {false, false};
    }
    return {true, true};
}

inline bool is_prime(const mpz_class& n) { return classify_prime(n).prime; }

struct power_witness {
    mpz_class base;   // not itself a perfect power
    u32 exponent = 1; // maximal: n = base^exponent
};

// Floor d-th root plus exactness flag. n >= 0, d >= 1.
inline std::pair<mpz_class, bool> integer_root(const mpz_class& n, u32 d) {
    if (d == 0) throw std::invalid_argument("integer_root: d must be >= 1");
    if (n < 0) throw std::invalid_argument("integer_root: n must be >= 0");
    if (d == 1) return {n, true};
    mpz_class r;
    int exact = mpz_root(r.get_mpz_t(), n.get_mpz_t(), d);
    return {r, exact != 0};
}

// Canonical power decomposition of n >= 2: extracts exact p-th roots for
// ascending primes p, exhausting each. The returned exponent is the largest d
// with n a d-th power; the base is not a perfect power. nullopt when n has no
// representation with exponent >= 2.
inline std::optional<power_witness> perfect_power_witness(const mpz_class& n) {
    if (n < 2) throw std::invalid_argument("perfect_power_witness: n must be >= 2");
    mpz_class v = n;
    u32 total = 1;
    const std::size_t bits0 = mpz_sizeinbase(v.get_mpz_t(), 2);
    for (u32 p : sieve_primes(bits0)) {
        while (mpz_sizeinbase(v.get_mpz_t(), 2) >= p + 1) {
            mpz_class root;
            if (!mpz_root(root.get_mpz_t(), v.get_mpz_t(), p)) break;
            v = root;
            total *= p;
        }
    }
    if (total == 1) return std::nullopt;
    return power_witness{v, total};
}

struct factor_options {
    // Combined iteration budget for all rho stages of one factor() call.
    u64 effort_limit = 4'000'000;
};

// Signed factorization: value = sign * prod p^e with primes ascending.
// `probabilistic` marks any prime certified only by randomized rounds.
struct factorization {
    int sign = 0;
    std::vector<std::pair<mpz_class, u32>> factors;
    bool probabilistic = false;

    mpz_class value() const {
        if (sign == 0) return 0;
        mpz_class v = sign;
        mpz_class pw;
        for (const auto& [p, e] : factors) {
            mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), e);
            v *= pw;
        }
        return v;
    }

    // P[value]: greatest prime factor, with the conventional value 1 for
    // 0 and units.
    mpz_class greatest_prime() const {
        if (factors.empty()) return 1;
        return factors.back().first;
    }
};

namespace detail {

// Brent-cycle Pollard rho on u64; returns a nontrivial factor of odd
// composite n, or 0 if the budget ran dry. Fully deterministic: parameters
// derive from n and the attempt counter.
inline u64 brent_rho_u64(u64 n, u64& budget) {
    for (u64 attempt = 0;; ++attempt) {
        const u64 c = 1 + splitmix64(n ^ (attempt * 0xd1342543de82ef95ULL)) % (n - 1);
        u64 y = 1 + splitmix64(~n ^ attempt) % (n - 1);
        u64 g = 1, r = 1, q = 1, x = 0, ys = 0;
        const u64 m = 128;
        while (g == 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = (mul_mod(y, y, n) + c) % n;
            for (u64 k = 0; k < r && g == 1; k += m) {
                ys = y;
                const u64 span = std::min(m, r - k);
                if (budget < span) return 0;
                budget -= span;
                for (u64 i = 0; i < span; ++i) {
                    y = (mul_mod(y, y, n) + c) % n;
                    q = mul_mod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
            }
            r <<= 1;
        }
        if (g == n) {
            do {
                if (budget == 0) return 0;
                --budget;
                ys = (mul_mod(ys, ys, n) + c) % n;
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

// Same scheme over mpz, for cofactors beyond 64 bits.
inline mpz_class brent_rho_mpz(const mpz_class& n, u64& budget) {
    const u64 base_seed = mpz_fdiv_ui(n.get_mpz_t(), ~0ULL);
    for (u64 attempt = 0;; ++attempt) {
        mpz_class c = 1 + mpz_class(splitmix64(base_seed ^ (attempt * 0xd1342543de82ef95ULL)));
        mpz_class y = 1 + mpz_class(splitmix64(~base_seed ^ attempt));
        mpz_class g = 1, q = 1, x = 0, ys = 0, diff;
        u64 r = 1;
        const u64 m = 128;
        while (g == 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = (y * y + c) % n;
            for (u64 k = 0; k < r && g == 1; k += m) {
                ys = y;
                const u64 span = std::min(m, r - k);
                if (budget < span) return 0;
                budget -= span;
                for (u64 i = 0; i < span; ++i) {
                    y = (y * y + c) % n;
                    diff = x > y ? x - y : y - x;
                    q = q * diff % n;
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            }
            r <<= 1;
        }
        if (g == n) {
            do {
                if (budget == 0) return 0;
                --budget;
                ys = (ys * ys + c) % n;
                diff = x > ys ? x - ys : ys - x;
                mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

inline void factor_u64_into(u64 m, u32 mult, std::map<mpz_class, u32>& acc, u64& budget) {
    std::vector<std::pair<u64, u32>> stack{{m, mult}};
    while (!stack.empty()) {
        auto [v, k] = stack.back();
        stack.pop_back();
        if (v == 1) continue;
        if (is_prime_u64(v)) {
            acc[mpz_class(v)] += k;
            continue;
        }
        bool reduced = false;
        for (unsigned p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u, 41u, 43u, 47u, 53u, 59u, 61u}) {
            if ((v >> p) == 0) break;
            if (auto root = exact_root_u64(v, p)) {
                stack.emplace_back(*root, k * p);
                reduced = true;
                break;
            }
        }
        if (reduced) continue;
        u64 g = brent_rho_u64(v, budget);
        if (g == 0) throw factor_exhausted("factor: effort limit reached on a 64-bit cofactor");
        stack.emplace_back(g, k);
        stack.emplace_back(v / g, k);
    }
}

inline void factor_mpz_into(const mpz_class& m, u32 mult, std::map<mpz_class, u32>& acc,
                            u64& budget, bool& probabilistic) {
    std::vector<std::pair<mpz_class, u32>> stack{{m, mult}};
    while (!stack.empty()) {
        auto [v, k] = stack.back();
        stack.pop_back();
        if (v == 1) continue;
        if (mpz_fits_ulong_p(v.get_mpz_t())) {
            factor_u64_into(mpz_get_ui(v.get_mpz_t()), k, acc, budget);
            continue;
        }
        primality_result pr = classify_prime(v);
        if (pr.prime) {
            probabilistic = probabilistic || pr.probabilistic;
            acc[v] += k;
            continue;
        }
        if (auto w = perfect_power_witness(v)) {
            stack.emplace_back(w->base, k * w->exponent);
            continue;
        }
        mpz_class g = brent_rho_mpz(v, budget);
        if (g == 0) throw factor_exhausted("factor: effort limit reached on a large cofactor");
        stack.emplace_back(g, k);
        stack.emplace_back(v / g, k);
    }
}

} // namespace detail

// Complete factorization of n. Deterministic for every input; the effort
// limit only decides between success and factor_exhausted, never the result.
inline factorization factor(const mpz_class& n, const factor_options& opt = {}) {
    factorization out;
    out.sign = sgn(n);
    if (out.sign == 0) return out;
    mpz_class m = abs(n);
    if (m == 1) return out;

    std::map<mpz_class, u32> acc;
    u64 budget = opt.effort_limit;
    if (mpz_fits_ulong_p(m.get_mpz_t())) {
        u64 mm = mpz_get_ui(m.get_mpz_t());
        for (u32 q : small_primes()) {
            if (static_cast<u64>(q) * q > mm) break;
            if (mm % q == 0) {
                u32 e = 0;
                do { mm /= q; ++e; } while (mm % q == 0);
                acc[mpz_class(q)] += e;
            }
        }
        if (mm > 1) detail::factor_u64_into(mm, 1, acc, budget);
    } else {
        for (u32 q : small_primes()) {
            unsigned long e = mpz_remove(m.get_mpz_t(), m.get_mpz_t(), mpz_class(q).get_mpz_t());
            if (e) acc[mpz_class(q)] += static_cast<u32>(e);
        }
        if (m > 1) detail::factor_mpz_into(m, 1, acc, budget, out.probabilistic);
    }

    out.factors.assign(acc.begin(), acc.end());
    return out;
}

// P[n] with P[0] = P[-1] = P[1] = 1.
inline mpz_class greatest_prime_factor(const mpz_class& n, const factor_options& opt = {}) {
    if (n >= -1 && n <= 1) return 1;
    return factor(n, opt).greatest_prime();
}

} // namespace gapforge
