#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "arith.hpp"
#include "errors.hpp"
#include "real.hpp"
#include "streams.hpp"

namespace gapforge {

// One pair (x, u): a smooth value against a coprime power, with the gap and
// its arithmetic annotations.
struct gap_record {
    sunit x;
    power_value u;
    mpz_class delta; // x - u; never zero (the two sets are disjoint)
    // Complete factorization of |delta|; absent in bounded-inspection mode
    // when a cofactor above the bound survives.
    std::optional<factorization> abs_delta_factors;
    mpz_class p_max;         // P[x-u] exactly, or the inspection bound
    bool p_max_exact = true; // false only when p_max is a certified lower bound
    mpz_class big_x;         // X = max(x, u)
};

struct scan_options {
    std::optional<mpz_class> window; // keep only |x-u| <= window
    std::optional<u64> p_bound;      // bounded inspection: certify P > bound instead of factoring
    unsigned threads = 1;
    u64 pair_budget = 10'000'000;
    factor_options factoring{};
};

namespace detail {

// Strip every prime <= bound from |delta|. When the remainder collapses to 1
// (or to a prime that is itself <= bound) the factorization is complete and
// exact; otherwise P > bound is certified without further factoring.
inline void annotate_bounded(gap_record& r, const std::vector<u32>& bound_primes, u64 bound) {
    mpz_class a = abs(r.delta);
    factorization f;
    f.sign = 1;
    mpz_class rest = a;
    for (u32 q : bound_primes) {
        if (rest == 1) break;
        if (mpz_fits_ulong_p(rest.get_mpz_t())) {
            u64 rr = mpz_get_ui(rest.get_mpz_t());
            for (std::size_t qi = 0; qi < bound_primes.size() && rr > 1; ++qi) {
                u64 qq = bound_primes[qi];
                if (qq * qq > rr) {
                    // rr is prime; counts as stripped iff it is within the bound
                    if (rr <= bound) {
                        f.factors.emplace_back(mpz_class(rr), 1);
                        rr = 1;
                    }
                    break;
                }
                if (rr % qq == 0) {
                    u32 e = 0;
                    do { rr /= qq; ++e; } while (rr % qq == 0);
                    f.factors.emplace_back(mpz_class(qq), e);
                }
            }
            rest = mpz_class(rr);
            break;
        }
        unsigned long e = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(q).get_mpz_t());
        if (e) f.factors.emplace_back(mpz_class(q), static_cast<u32>(e));
    }
    if (rest == 1) {
        r.p_max = f.greatest_prime();
        r.p_max_exact = true;
        r.abs_delta_factors = std::move(f);
    } else {
        r.p_max = bound;
        r.p_max_exact = false;
        r.abs_delta_factors = std::nullopt;
    }
}

inline void annotate_exact(gap_record& r, const factor_options& fo) {
    factorization f = factor(abs(r.delta), fo);
    r.p_max = f.greatest_prime();
    r.p_max_exact = true;
    r.abs_delta_factors = std::move(f);
}

} // namespace detail

// All pairs (x, u) with x in the smooth sequence, u in the coprime power
// set, both <= limit, optionally restricted to |x - u| <= window. Output is
// sorted by (X, x, u) and identical for every thread count.
inline std::vector<gap_record> scan_gaps(const prime_set& T, const mpz_class& limit,
                                         const scan_options& opt = {}) {
    if (limit < 4) throw std::invalid_argument("scan_gaps: limit must be >= 4");
    if (opt.threads == 0) throw std::invalid_argument("scan_gaps: threads must be >= 1");
    if (opt.window && *opt.window < 0)
        throw std::invalid_argument("scan_gaps: window must be >= 0");
    if (opt.p_bound && *opt.p_bound < 2)
        throw std::invalid_argument("scan_gaps: p-bound must be >= 2");

    const std::vector<sunit> xs = enumerate_smooth(T, limit);
    std::vector<u32> bound_primes;
    if (opt.p_bound) bound_primes = sieve_primes(*opt.p_bound);

    const unsigned k = opt.threads;
    std::vector<std::vector<gap_record>> chunks(k);
    std::vector<std::exception_ptr> errors(k);

    auto worker = [&](unsigned j) {
        try {
            const mpz_class span = limit - 3; // power values live in [4, limit]
            const mpz_class lo = 4 + span * j / k;
            const mpz_class hi = 4 + span * (j + 1) / k - 1; // inclusive; last chunk ends at limit
            if (hi < lo) return;
            std::vector<gap_record>& out = chunks[j];
            auto take = [&](const sunit& x, const power_value& u) {
                gap_record r;
                r.x = x;
                r.u = u;
                r.delta = x.value - u.value;
                assert(r.delta != 0);
                r.big_x = std::max(x.value, u.value);
                if (opt.p_bound) detail::annotate_bounded(r, bound_primes, *opt.p_bound);
                else detail::annotate_exact(r, opt.factoring);
                out.push_back(std::move(r));
                if (out.size() > opt.pair_budget)
                    throw cap_exceeded("scan_gaps: pair budget exceeded");
            };
            auto on_power = [&](const power_value& u) {
                if (opt.window) {
                    const mpz_class x_lo = u.value - *opt.window;
                    const mpz_class x_hi = u.value + *opt.window;
                    auto it = std::lower_bound(
                        xs.begin(), xs.end(), x_lo,
                        [](const sunit& s, const mpz_class& v) { return s.value < v; });
                    for (; it != xs.end() && it->value <= x_hi; ++it) take(*it, u);
                } else {
                    for (const sunit& x : xs) take(x, u);
                }
            };
            for_each_power_between(T, lo, hi, on_power);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    if (k == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(k);
        for (unsigned j = 0; j < k; ++j) pool.emplace_back(worker, j);
        for (auto& t : pool) t.join();
    }
    for (unsigned j = 0; j < k; ++j)
        if (errors[j]) std::rethrow_exception(errors[j]);

    std::vector<gap_record> all;
    std::size_t total = 0;
    for (auto& c : chunks) total += c.size();
    if (total > opt.pair_budget) throw cap_exceeded("scan_gaps: pair budget exceeded");
    all.reserve(total);
    for (auto& c : chunks)
        for (auto& r : c) all.push_back(std::move(r));

    std::sort(all.begin(), all.end(), [](const gap_record& a, const gap_record& b) {
        int c = cmp(a.big_x, b.big_x);
        if (c) return c < 0;
        c = cmp(a.x.value, b.x.value);
        if (c) return c < 0;
        return cmp(a.u.value, b.u.value) < 0;
    });
    return all;
}

enum class minima_key { abs_delta, p_max };

// Running-minimum staircase over records sorted by X: keeps one record per
// strict improvement of the key, so the result is strictly increasing in X
// and strictly decreasing in the key.
inline std::vector<gap_record> record_minima(const std::vector<gap_record>& records,
                                             minima_key key) {
    auto key_of = [&](const gap_record& r) {
        return key == minima_key::abs_delta ? mpz_class(abs(r.delta)) : r.p_max;
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (key == minima_key::p_max && !records[i].p_max_exact)
            throw std::invalid_argument("record_minima: p_max key needs exact factorizations");
        if (i && cmp(records[i - 1].big_x, records[i].big_x) > 0)
            throw std::invalid_argument("record_minima: records must be sorted by X");
    }
    std::vector<gap_record> out;
    std::optional<mpz_class> best;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t arg = i;
        mpz_class group_best = key_of(records[i]);
        std::size_t j = i + 1;
        for (; j < records.size() && records[j].big_x == records[i].big_x; ++j) {
            mpz_class kj = key_of(records[j]);
            if (kj < group_best) {
                group_best = kj;
                arg = j;
            }
        }
        if (!best || group_best < *best) {
            best = group_best;
            out.push_back(records[arg]);
        }
        i = j;
    }
    return out;
}

namespace detail {

template <class Int>
std::vector<std::pair<sunit, power_value>> solve_offset_impl(const prime_set& T,
                                                             const mpz_class& m, Int limit) {
    smooth_stream<Int> sx(T, limit);
    power_stream<Int> su(T, limit);
    std::vector<std::pair<sunit, power_value>> out;
    auto x = sx.next();
    auto u = su.next();
    while (x && u) {
        const mpz_class target = u->value + m;
        const int c = cmp(x->value, target);
        if (c == 0) {
            out.emplace_back(*x, *u);
            x = sx.next();
            u = su.next();
        } else if (c < 0) {
            x = sx.next();
        } else {
            u = su.next();
        }
    }
    return out;
}

} // namespace detail

// All solutions of x - u = m with x smooth, u a coprime power, x and u
// <= limit: a lockstep walk of the two ascending streams, O(1) memory.
inline std::vector<std::pair<sunit, power_value>> solve_offset(const prime_set& T,
                                                               const mpz_class& m,
                                                               const mpz_class& limit) {
    if (limit < 4) throw std::invalid_argument("solve_offset: limit must be >= 4");
    if (detail::u64_range(limit) && T.radical_u64)
        return detail::solve_offset_impl<u64>(T, m, mpz_get_ui(limit.get_mpz_t()));
    return detail::solve_offset_impl<mpz_class>(T, m, limit);
}

// Empirical exponent for the consecutive-gap lower bound: the least C such
// that t_{i+1} - t_i >= t_i (log 2 t_i)^{-C} holds across the range, with
// the first pair attaining it as witness.
struct tijdeman_report {
    u64 first_index = 0; // 1-based pair indices; pair i is (t_i, t_{i+1})
    u64 last_index = 0;
    double min_exponent = 0.0;
    u64 witness_index = 0;
    mpz_class witness_t;
    mpz_class witness_gap;
};

inline tijdeman_report tijdeman_gaps(const prime_set& T, const mpz_class& limit) {
    if (limit < 2) throw std::invalid_argument("tijdeman_gaps: limit must be >= 2");
    tijdeman_report rep;
    u64 count = 0;
    mpz_class prev;
    real_t best = -1;
    for_each_smooth(T, limit, [&](const sunit& s) {
        ++count;
        if (count >= 2) {
            const mpz_class gap = s.value - prev;
            real_t c(0);
            if (gap < prev) {
                const real_t num = log_mpz(prev) - log_mpz(gap);
                const real_t den = log(log_mpz(2 * prev)); // 2t >= 4 keeps this positive
                c = num / den;
            }
            if (c > best) {
                best = c;
                rep.witness_index = count - 1;
                rep.witness_t = prev;
                rep.witness_gap = gap;
            }
        }
        prev = s.value;
    });
    if (count < 2) throw empty_sample("tijdeman_gaps: need at least two smooth values");
    rep.first_index = 1;
    rep.last_index = count - 1;
    rep.min_exponent = static_cast<double>(best);
    return rep;
}

} // namespace gapforge
