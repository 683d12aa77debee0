#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "arith.hpp"
#include "u64_math.hpp"

namespace gapforge {

// The prime set T that defines both sequences: S-units are T-smooth, powers
// are coprime with rad(T).
struct prime_set {
    std::vector<u64> primes; // strictly increasing, each certified prime
    mpz_class radical;       // prod primes
    u64 radical_u64 = 0;     // radical when it fits in 64 bits, else 0

    static prime_set make(std::vector<u64> qs) {
        if (qs.empty()) throw std::invalid_argument("prime_set: at least one prime required");
        std::sort(qs.begin(), qs.end());
        prime_set out;
        out.radical = 1;
        u64 rad64 = 1;
        bool fits = true;
        u64 prev = 0;
        for (u64 q : qs) {
            if (q == prev) throw std::invalid_argument("prime_set: duplicate prime");
            if (!is_prime_u64(q)) throw std::invalid_argument("prime_set: element is not prime");
            prev = q;
            out.primes.push_back(q);
            out.radical *= mpz_class(q);
            if (fits && rad64 > ~0ULL / q) fits = false;
            if (fits) rad64 *= q;
        }
        out.radical_u64 = fits ? rad64 : 0;
        return out;
    }

    std::size_t size() const { return primes.size(); }
};

// Member of the S-unit sequence: value = prod q_i^{e_i} >= 2, not all e_i zero.
struct sunit {
    std::vector<u32> exponents; // aligned with prime_set::primes
    mpz_class value;
};

// Member of the coprime power set, in canonical form: base is not itself a
// perfect power and exponent is maximal. all_exponents lists every d >= 2
// with value a d-th power of an integer, i.e. the divisors >= 2 of exponent.
struct power_value {
    mpz_class base;
    u32 exponent = 0;
    mpz_class value;
    std::vector<u32> all_exponents;
};

inline std::vector<u32> exponent_divisors(u32 d) {
    std::vector<u32> out;
    for (u32 k = 2; k <= d; ++k)
        if (d % k == 0) out.push_back(k);
    return out;
}

namespace detail {

inline bool mul_within(u64 a, u64 b, u64 limit, u64& out) {
    if (a > limit / b) return false;
    out = a * b;
    return true;
}

inline bool mul_within(const mpz_class& a, u64 b, const mpz_class& limit, mpz_class& out) {
    out = a * mpz_class(b);
    return out <= limit;
}

inline bool coprime_with(u64 z, const prime_set& T) {
    if (T.radical_u64) return std::gcd(z, T.radical_u64) == 1;
    for (u64 q : T.primes)
        if (z % q == 0) return false;
    return true;
}

inline bool coprime_with(const mpz_class& z, const prime_set& T) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), z.get_mpz_t(), T.radical.get_mpz_t());
    return g == 1;
}

inline bool nontrivial_power(u64 z) { return is_perfect_power_u64(z); }
inline bool nontrivial_power(const mpz_class& z) {
    return z >= 4 && mpz_perfect_power_p(z.get_mpz_t()) != 0;
}

// z^d if it stays <= limit.
template <class Int>
bool pow_within(const Int& z, u32 d, const Int& limit, Int& out) {
    Int acc = z;
    if (acc > limit) return false;
    for (u32 i = 1; i < d; ++i) {
        Int next;
        bool ok;
        if constexpr (std::is_same_v<Int, u64>) ok = mul_within(acc, z, limit, next);
        else { next = acc * z; ok = next <= limit; }
        if (!ok) return false;
        acc = next;
    }
    out = acc;
    return true;
}

// Least z with z^d >= lo.
inline u64 root_ceil(u64 lo, u32 d) {
    if (lo <= 1) return 1;
    u64 r = iroot_u64(lo, d);
    u128 acc = 1;
    for (u32 i = 0; i < d; ++i) acc *= r;
    return acc == lo ? r : r + 1;
}

inline mpz_class root_ceil(const mpz_class& lo, u32 d) {
    if (lo <= 1) return 1;
    auto [r, exact] = integer_root(lo, d);
    return exact ? r : mpz_class(r + 1);
}

inline mpz_class to_mpz(u64 v) { return mpz_class(v); }
inline const mpz_class& to_mpz(const mpz_class& v) { return v; }

} // namespace detail

// Strictly increasing enumeration of T-smooth integers >= 2 up to limit,
// via a pointer-based multiway merge over one virtual seed value 1. Memory
// is the sliding window between the slowest pointer and the head; the
// frontier metrics expose its size for the sublinearity tests.
template <class Int>
class smooth_stream {
public:
    smooth_stream(const prime_set& T, Int limit) : T_(&T), limit_(std::move(limit)) {
        ptr_.assign(T_->primes.size(), 0);
        window_.push_back(node{Int(1), std::vector<u32>(T_->primes.size(), 0)});
    }

    std::optional<sunit> next() {
        bool any = false;
        Int best{};
        for (std::size_t i = 0; i < ptr_.size(); ++i) {
            Int cand;
            if (!detail::mul_within(at(ptr_[i]).value, T_->primes[i], limit_, cand)) continue;
            if (!any || cand < best) {
                best = cand;
                any = true;
            }
        }
        if (!any) return std::nullopt;

        node nd;
        for (std::size_t i = 0; i < ptr_.size(); ++i) {
            Int cand;
            if (!detail::mul_within(at(ptr_[i]).value, T_->primes[i], limit_, cand)) continue;
            if (cand == best) {
                if (nd.exps.empty()) {
                    nd.exps = at(ptr_[i]).exps;
                    ++nd.exps[i];
                    nd.value = best;
                }
                ++ptr_[i]; // every pointer achieving the minimum advances: dedup
            }
        }
        window_.push_back(nd);
        const u64 min_ptr = *std::min_element(ptr_.begin(), ptr_.end());
        while (base_ < min_ptr) {
            window_.pop_front();
            ++base_;
        }
        max_frontier_ = std::max(max_frontier_, window_.size());

        sunit out;
        out.exponents = nd.exps;
        out.value = detail::to_mpz(nd.value);
        return out;
    }

    std::size_t frontier_size() const { return window_.size(); }
    std::size_t max_frontier_size() const { return max_frontier_; }

private:
    struct node {
        Int value;
        std::vector<u32> exps;
    };

    const node& at(u64 index) const { return window_[static_cast<std::size_t>(index - base_)]; }

    const prime_set* T_;
    Int limit_;
    std::deque<node> window_;
    u64 base_ = 0;
    std::vector<u64> ptr_;
    std::size_t max_frontier_ = 1;
};

// Ascending enumeration of the coprime perfect powers in [lo, limit]. One
// substream per exponent d; in full mode a substream only emits bases that
// are not themselves perfect powers, so every value appears exactly once, in
// canonical form. With fixed_d set, all coprime bases are admitted (the
// witness is still canonicalized on emission) and values are exactly the
// d-th powers in range.
template <class Int>
class power_stream {
public:
    power_stream(const prime_set& T, Int limit, u32 fixed_d = 0, Int lo = Int(4))
        : T_(&T), limit_(std::move(limit)), fixed_d_(fixed_d) {
        if (lo < Int(4)) lo = Int(4);
        if (fixed_d_) {
            add_substream(fixed_d_, lo);
        } else {
            for (u32 d = 2;; ++d) {
                Int probe;
                if (!detail::pow_within(Int(2), d, limit_, probe)) break; // 2^d > limit: no base fits
                add_substream(d, lo);
            }
        }
    }

    std::optional<power_value> next() {
        if (subs_.empty()) return std::nullopt;
        std::size_t best = 0;
        for (std::size_t i = 1; i < subs_.size(); ++i)
            if (subs_[i].value < subs_[best].value) best = i;
        sub s = subs_[best];
        assert(std::count_if(subs_.begin(), subs_.end(),
                             [&](const sub& t) { return t.value == s.value; }) == 1);
        advance(subs_[best]);
        if (subs_[best].dead) subs_.erase(subs_.begin() + static_cast<std::ptrdiff_t>(best));
        return emit(s);
    }

private:
    struct sub {
        u32 d = 0;
        Int z{};
        Int value{};
        bool dead = false;
    };

    bool base_ok(const Int& z) const {
        if (!detail::coprime_with(z, *T_)) return false;
        if (!fixed_d_ && detail::nontrivial_power(z)) return false;
        return true;
    }

    void add_substream(u32 d, const Int& lo) {
        sub s;
        s.d = d;
        Int z = detail::root_ceil(lo, d);
        if (z < Int(2)) z = Int(2);
        s.z = z;
        if (!settle(s)) return;
        subs_.push_back(std::move(s));
    }

    // Move s.z up to the next admissible base with z^d <= limit; mark dead
    // when the power range is exhausted.
    bool settle(sub& s) {
        for (;; ++s.z) {
            if (!detail::pow_within(s.z, s.d, limit_, s.value)) {
                s.dead = true;
                return false;
            }
            if (base_ok(s.z)) return true;
        }
    }

    void advance(sub& s) {
        ++s.z;
        settle(s);
    }

    power_value emit(const sub& s) const {
        power_value out;
        out.value = detail::to_mpz(s.value);
        if (fixed_d_) {
            mpz_class zb = detail::to_mpz(s.z);
            if (auto w = (zb >= 2 ? perfect_power_witness(zb) : std::nullopt)) {
                out.base = w->base;
                out.exponent = w->exponent * s.d;
            } else {
                out.base = zb;
                out.exponent = s.d;
            }
        } else {
            out.base = detail::to_mpz(s.z);
            out.exponent = s.d;
        }
        out.all_exponents = exponent_divisors(out.exponent);
        return out;
    }

    const prime_set* T_;
    Int limit_;
    u32 fixed_d_;
    std::vector<sub> subs_;
};

namespace detail {

// Values up to 10^18 run on the u64 engines; the mpz engines cover the rest.
inline bool u64_range(const mpz_class& limit) {
    static const mpz_class cap("1000000000000000000");
    return limit <= cap;
}

} // namespace detail

template <class Fn>
void for_each_smooth(const prime_set& T, const mpz_class& limit, Fn&& fn) {
    if (limit < 2) throw std::invalid_argument("for_each_smooth: limit must be >= 2");
    if (detail::u64_range(limit)) {
        smooth_stream<u64> s(T, mpz_get_ui(limit.get_mpz_t()));
        while (auto v = s.next()) fn(*v);
    } else {
        smooth_stream<mpz_class> s(T, limit);
        while (auto v = s.next()) fn(*v);
    }
}

inline std::vector<sunit> enumerate_smooth(const prime_set& T, const mpz_class& limit) {
    std::vector<sunit> out;
    for_each_smooth(T, limit, [&](const sunit& v) { out.push_back(v); });
    return out;
}

template <class Fn>
void for_each_power(const prime_set& T, const mpz_class& limit, Fn&& fn, u32 fixed_d = 0) {
    if (limit < 4) throw std::invalid_argument("for_each_power: limit must be >= 4");
    if (fixed_d == 1) throw std::invalid_argument("for_each_power: d must be >= 2");
    if (detail::u64_range(limit) && T.radical_u64) {
        power_stream<u64> s(T, mpz_get_ui(limit.get_mpz_t()), fixed_d);
        while (auto v = s.next()) fn(*v);
    } else {
        power_stream<mpz_class> s(T, limit, fixed_d);
        while (auto v = s.next()) fn(*v);
    }
}

// Drains the coprime powers with lo <= value <= hi, ascending. Workers of a
// partitioned scan each own one such slice; an empty slice is a no-op.
template <class Fn>
void for_each_power_between(const prime_set& T, const mpz_class& lo, const mpz_class& hi,
                            Fn&& fn) {
    if (hi < 4 || hi < lo) return;
    if (detail::u64_range(hi) && T.radical_u64) {
        u64 l = lo < 4 ? 4 : mpz_get_ui(lo.get_mpz_t());
        power_stream<u64> s(T, mpz_get_ui(hi.get_mpz_t()), 0, l);
        while (auto v = s.next()) fn(*v);
    } else {
        power_stream<mpz_class> s(T, hi, 0, lo < 4 ? mpz_class(4) : lo);
        while (auto v = s.next()) fn(*v);
    }
}

inline std::vector<power_value> enumerate_powers(const prime_set& T, const mpz_class& limit) {
    std::vector<power_value> out;
    for_each_power(T, limit, [&](const power_value& v) { out.push_back(v); });
    return out;
}

inline std::vector<power_value> enumerate_powers_fixed(const prime_set& T, u32 d,
                                                       const mpz_class& limit) {
    if (d < 2) throw std::invalid_argument("enumerate_powers_fixed: d must be >= 2");
    std::vector<power_value> out;
    for_each_power(T, limit, [&](const power_value& v) { out.push_back(v); }, d);
    return out;
}

} // namespace gapforge
