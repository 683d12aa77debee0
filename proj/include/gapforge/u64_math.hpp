#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

namespace gapforge {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

// splitmix64: tiny deterministic PRNG step, used wherever an algorithm needs
// "arbitrary" values that must not vary across runs or platforms.
constexpr u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

constexpr u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 r = m == 1 ? 0 : 1;
    base %= m;
    while (exp) {
        if (exp & 1) r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin for the full 64-bit range: the first twelve
// primes as witnesses cover every n < 2^64.
constexpr bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

// Floor of the d-th root, exact for all u64 inputs (float seed, then fix up).
inline u64 iroot_u64(u64 n, unsigned d) {
    if (d == 0) return 0;
    if (d == 1 || n < 2) return n;
    if (d >= 64) return 1;
    auto pow_fits = [&](u64 r) -> std::optional<u64> {
        // r^d if it fits in u64, nullopt on overflow.
        u128 acc = 1;
        for (unsigned i = 0; i < d; ++i) {
            acc *= r;
            if (acc > ~0ULL) return std::nullopt;
        }
        return static_cast<u64>(acc);
    };
    u64 r = static_cast<u64>(std::pow(static_cast<double>(n), 1.0 / d));
    while (r > 1) {
        auto p = pow_fits(r);
        if (p && *p <= n) break;
        --r;
    }
    while (true) {
        auto p = pow_fits(r + 1);
        if (!p || *p > n) break;
        ++r;
    }
    return r;
}

// Exact d-th power test; returns the root when n = r^d.
inline std::optional<u64> exact_root_u64(u64 n, unsigned d) {
    u64 r = iroot_u64(n, d);
    u128 acc = 1;
    for (unsigned i = 0; i < d; ++i) acc *= r;
    if (acc == n) return r;
    return std::nullopt;
}

// True when n = z^k for some k >= 2 (n >= 2). Checking prime k up to
// log2(n) suffices.
inline bool is_perfect_power_u64(u64 n) {
    if (n < 4) return false;
    for (unsigned p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u, 41u, 43u, 47u, 53u, 59u, 61u}) {
        if ((n >> p) == 0) break; // 2^p > n: no base >= 2 can reach n
        if (exact_root_u64(n, p)) return true;
    }
    return false;
}

} // namespace gapforge
