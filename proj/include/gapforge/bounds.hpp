#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <gmpxx.h>

#include "arith.hpp"
#include "errors.hpp"
#include "gapscan.hpp"
#include "real.hpp"
#include "streams.hpp"

namespace gapforge {

// The empirical bound shapes. Lower-bound shapes fit the largest constant
// the data admits (the minimum ratio); upper-bound shapes fit the smallest
// (the maximum ratio). Every logarithm is the clamped log_*, which keeps
// each shape total; l_k denotes the k-fold iterate.
enum class bound_shape {
    thm_main_delta,    // logstar(|delta|) >= C * log(l2(X))
    thm_main_p,        // P >= C * l3(X) l4(X) / l5(X)
    xu2,               // logstar(|delta|) >= C * l1(X), squares only
    pxu2,              // P >= C * l2(X) l3(X) / l4(X), squares only
    xud,               // l1(X) <= (C d)^(18 d) * logstar(|delta|)
    xd2p,              // l2(X) <= C * d^2 * P
    schinzel_tijdeman, // log(d) <= C * logstar(|delta|)
    dlogz_explicit,    // d log z <= C * (log 2 + B (sum log q + sum log p))
};

enum class fit_direction { min, max };

// How a shape consumes the exponent d: not at all, pinned to d = 2, or once
// per valid exponent of the record.
enum class exponent_role { none, fixed_two, each };

struct shape_info {
    bound_shape shape;
    const char* name;
    fit_direction direction;
    exponent_role role;
    const char* formula;
};

inline const std::vector<shape_info>& shape_registry() {
    static const std::vector<shape_info> table = {
        {bound_shape::thm_main_delta, "thm-main-delta", fit_direction::min, exponent_role::none,
         "logstar(|delta|) >= C * log(logstar_2(X))"},
        {bound_shape::thm_main_p, "thm-main-p", fit_direction::min, exponent_role::none,
         "P >= C * logstar_3(X) * logstar_4(X) / logstar_5(X)"},
        {bound_shape::xu2, "xu2", fit_direction::min, exponent_role::fixed_two,
         "logstar(|delta|) >= C * logstar(X)  [d = 2]"},
        {bound_shape::pxu2, "pxu2", fit_direction::min, exponent_role::fixed_two,
         "P >= C * logstar_2(X) * logstar_3(X) / logstar_4(X)  [d = 2]"},
        {bound_shape::xud, "xud", fit_direction::max, exponent_role::each,
         "logstar(X) <= (C * d)^(18 d) * logstar(|delta|)"},
        {bound_shape::xd2p, "xd2p", fit_direction::max, exponent_role::each,
         "logstar_2(X) <= C * d^2 * P"},
        {bound_shape::schinzel_tijdeman, "schinzel-tijdeman", fit_direction::max, exponent_role::each,
         "log(d) <= C * logstar(|delta|)"},
        {bound_shape::dlogz_explicit, "dlogz-explicit", fit_direction::max, exponent_role::each,
         "d * log(z) <= C * (log(2) + B * (sum log q + sum log p))"},
    };
    return table;
}

inline const shape_info& info_of(bound_shape s) {
    for (const auto& e : shape_registry())
        if (e.shape == s) return e;
    throw std::invalid_argument("info_of: unknown shape");
}

inline std::optional<bound_shape> parse_shape(std::string_view name) {
    for (const auto& e : shape_registry())
        if (name == e.name) return e.shape;
    return std::nullopt;
}

// Inputs to one bound evaluation. Shapes read only the fields they need and
// reject absent ones.
struct bound_point {
    std::optional<mpz_class> big_x;     // X = max(x, u)
    std::optional<mpz_class> abs_delta; // |x - u|
    std::optional<mpz_class> p_max;     // P[x - u], exact
    std::optional<u32> d;
    std::optional<mpz_class> power_base; // z with u = z^d
    std::optional<u64> exponent_max;     // B: largest exponent across x and |delta|
    std::optional<real_t> sum_log_q;     // over the prime set
    std::optional<real_t> sum_log_p;     // over the distinct primes of |delta|
};

struct bound_eval {
    real_t lhs;
    real_t rhs;
    bool holds = false;
};

namespace detail {

inline const mpz_class& need(const std::optional<mpz_class>& f, const char* what) {
    if (!f) throw missing_field(std::string("evaluate_bound: missing ") + what);
    return *f;
}

inline u32 need_d(const bound_point& pt) {
    if (!pt.d) throw missing_field("evaluate_bound: missing d");
    if (*pt.d < 2) throw std::invalid_argument("evaluate_bound: d must be >= 2");
    return *pt.d;
}

inline const real_t& need_real(const std::optional<real_t>& f, const char* what) {
    if (!f) throw missing_field(std::string("evaluate_bound: missing ") + what);
    return *f;
}

inline real_t tol_scale(const real_t& a, const real_t& b) {
    real_t m = abs(a);
    real_t n = abs(b);
    return m > n ? m : n;
}

inline bool ge_within_tol(const real_t& lhs, const real_t& rhs) {
    static const real_t tol("1e-12");
    return lhs >= rhs - tol * tol_scale(lhs, rhs);
}

// lhs and the C-multiplier unit of each linear shape; xud is handled apart.
struct linear_terms {
    real_t lhs;
    real_t unit; // rhs = C * unit (lower bounds: lhs >= C*unit; upper: lhs <= C*unit)
};

inline linear_terms terms_of(bound_shape shape, const bound_point& pt) {
    switch (shape) {
    case bound_shape::thm_main_delta: {
        const real_t inner = log_star_iter(need(pt.big_x, "X"), 2);
        return {log_star1(need(pt.abs_delta, "|delta|")), log(inner)};
    }
    case bound_shape::thm_main_p: {
        const mpz_class& X = need(pt.big_x, "X");
        const real_t unit = log_star_iter(X, 3) * log_star_iter(X, 4) / log_star_iter(X, 5);
        return {real_from_mpz(need(pt.p_max, "P")), unit};
    }
    case bound_shape::xu2:
        return {log_star1(need(pt.abs_delta, "|delta|")), log_star_iter(need(pt.big_x, "X"), 1)};
    case bound_shape::pxu2: {
        const mpz_class& X = need(pt.big_x, "X");
        const real_t unit = log_star_iter(X, 2) * log_star_iter(X, 3) / log_star_iter(X, 4);
        return {real_from_mpz(need(pt.p_max, "P")), unit};
    }
    case bound_shape::xd2p: {
        const u32 d = need_d(pt);
        return {log_star_iter(need(pt.big_x, "X"), 2),
                real_t(d) * real_t(d) * real_from_mpz(need(pt.p_max, "P"))};
    }
    case bound_shape::schinzel_tijdeman:
        return {log(real_t(need_d(pt))), log_star1(need(pt.abs_delta, "|delta|"))};
    case bound_shape::dlogz_explicit: {
        const u32 d = need_d(pt);
        const real_t lhs = real_t(d) * log_mpz(need(pt.power_base, "z"));
        if (!pt.exponent_max) throw missing_field("evaluate_bound: missing B");
        const real_t unit = ln2_quad() + real_t(*pt.exponent_max) *
                                             (need_real(pt.sum_log_q, "sum log q") +
                                              need_real(pt.sum_log_p, "sum log p"));
        return {lhs, unit};
    }
    case bound_shape::xud:
        throw std::logic_error("terms_of: xud is not linear in C");
    }
    throw std::invalid_argument("terms_of: unknown shape");
}

} // namespace detail

// lhs, rhs and the verdict of one shape at one point, with 1e-12 relative
// slack in the bound's favorable direction.
inline bound_eval evaluate_bound(bound_shape shape, double constant, const bound_point& pt) {
    bound_eval out;
    const real_t C(constant);
    if (shape == bound_shape::xud) {
        const u32 d = detail::need_d(pt);
        out.lhs = log_star_iter(detail::need(pt.big_x, "X"), 1);
        out.rhs = pow(C * real_t(d), 18 * static_cast<int>(d)) *
                  log_star1(detail::need(pt.abs_delta, "|delta|"));
        out.holds = detail::ge_within_tol(out.rhs, out.lhs);
        return out;
    }
    const detail::linear_terms t = detail::terms_of(shape, pt);
    out.lhs = t.lhs;
    out.rhs = C * t.unit;
    if (info_of(shape).direction == fit_direction::min)
        out.holds = detail::ge_within_tol(out.lhs, out.rhs);
    else
        out.holds = detail::ge_within_tol(out.rhs, out.lhs);
    return out;
}

// Assemble the evaluation inputs for one record (and exponent). Computes the
// dlogz side data — B and the prime log sums — from the record's
// factorization, factoring |delta| on the spot when the record does not
// carry it.
inline bound_point point_from_record(const prime_set& T, const gap_record& r,
                                     std::optional<u32> d = {}, const factor_options& fo = {}) {
    bound_point pt;
    pt.big_x = r.big_x;
    pt.abs_delta = abs(r.delta);
    if (r.p_max_exact) pt.p_max = r.p_max;
    if (!d) return pt;
    pt.d = *d;
    const u32 E = r.u.exponent;
    if (*d < 2 || E % *d != 0 ||
        std::find(r.u.all_exponents.begin(), r.u.all_exponents.end(), *d) ==
            r.u.all_exponents.end())
        throw exponent_mismatch("point_from_record: d is not a valid exponent of u");
    mpz_class zb;
    mpz_pow_ui(zb.get_mpz_t(), r.u.base.get_mpz_t(), E / *d);
    pt.power_base = zb;

    factorization local;
    const factorization* fac = r.abs_delta_factors ? &*r.abs_delta_factors : nullptr;
    if (!fac) {
        local = factor(abs(r.delta), fo);
        fac = &local;
    }
    u64 B = 0;
    for (u32 e : r.x.exponents) B = std::max<u64>(B, e);
    for (const auto& [p, e] : fac->factors) B = std::max<u64>(B, e);
    pt.exponent_max = B;
    real_t slq = 0;
    for (u64 q : T.primes) slq += log(real_t(q));
    pt.sum_log_q = slq;
    real_t slp = 0;
    for (const auto& [p, e] : fac->factors) slp += log_mpz(p);
    pt.sum_log_p = slp;
    return pt;
}

// The provable form of the power-height bound at constant 1: checks
// d log z <= log 2 + B (sum log q + sum log p) for one record and exponent.
inline bool check_dlogz_explicit(const prime_set& T, const gap_record& r, u32 d,
                                 const factor_options& fo = {}) {
    const bound_point pt = point_from_record(T, r, d, fo);
    return evaluate_bound(bound_shape::dlogz_explicit, 1.0, pt).holds;
}

struct fit_point {
    mpz_class X;
    double lhs = 0;
    double rhs = 0;
};

struct fit_report {
    bound_shape shape = bound_shape::thm_main_delta;
    double constant = 0;
    gap_record witness;
    std::optional<u32> witness_d;
    u64 sample_size = 0; // evaluation points that constrained the fit
    u64 exclusions = 0;  // points dropped by the shape's exclusion rule
};

struct fit_options {
    std::optional<u32> per_d; // restrict to records valid at this exponent
    unsigned threads = 1;
    std::vector<fit_point>* points = nullptr; // (X, lhs, rhs) at the fitted constant
    factor_options factoring{};
};

namespace detail {

// The exact algebraic inverse of evaluate_bound at one point: the extremal
// constant this point allows. nullopt marks an excluded (degenerate) point.
inline std::optional<real_t> ratio_of(bound_shape shape, const bound_point& pt) {
    if (shape == bound_shape::xud) {
        const u32 d = need_d(pt);
        const real_t q = log_star_iter(need(pt.big_x, "X"), 1) /
                         log_star1(need(pt.abs_delta, "|delta|"));
        return pow(q, real_t(1) / (real_t(18) * real_t(d))) / real_t(d);
    }
    const linear_terms t = terms_of(shape, pt);
    if (shape == bound_shape::thm_main_delta && t.unit == 0) return std::nullopt;
    return t.lhs / t.unit;
}

// Exponents an evaluation point may use for this record under the shape's
// role; empty when the record is out of scope.
inline std::vector<std::optional<u32>> fit_exponents(const shape_info& info,
                                                     const gap_record& r,
                                                     const std::optional<u32>& per_d) {
    const auto& all = r.u.all_exponents;
    auto has = [&](u32 d) { return std::find(all.begin(), all.end(), d) != all.end(); };
    std::vector<std::optional<u32>> out;
    switch (info.role) {
    case exponent_role::none:
        if (!per_d || has(*per_d)) out.push_back(std::nullopt);
        break;
    case exponent_role::fixed_two:
        if (has(2)) out.push_back(2u);
        break;
    case exponent_role::each:
        if (per_d) {
            if (has(*per_d)) out.push_back(*per_d);
        } else {
            for (u32 d : all) out.push_back(d);
        }
        break;
    }
    return out;
}

inline bool shape_needs_exact_p(bound_shape s) {
    return s == bound_shape::thm_main_p || s == bound_shape::pxu2 || s == bound_shape::xd2p;
}

} // namespace detail

// Fit the extremal empirical constant of one shape over a record sample. The
// witness is the evaluation point attaining it (earliest on ties), and
// equality holds there: evaluate_bound at the fitted constant reproduces
// lhs = rhs at the witness to within the comparison tolerance. The result
// does not depend on the thread count.
inline fit_report fit_constant(const prime_set& T, bound_shape shape,
                               const std::vector<gap_record>& records,
                               const fit_options& opt = {}) {
    const shape_info& info = info_of(shape);
    if (opt.threads == 0) throw std::invalid_argument("fit_constant: threads must be >= 1");
    if (opt.per_d) {
        if (*opt.per_d < 2) throw std::invalid_argument("fit_constant: per_d must be >= 2");
        if (info.role == exponent_role::fixed_two && *opt.per_d != 2)
            throw std::invalid_argument("fit_constant: this shape is pinned to d = 2");
    }
    if (detail::shape_needs_exact_p(shape))
        for (const auto& r : records)
            if (!r.p_max_exact)
                throw std::invalid_argument("fit_constant: shape requires exact P records");

    struct local_best {
        bool any = false;
        real_t value{};
        std::size_t index = 0;
        std::optional<u32> d;
        u64 sample = 0;
        u64 excluded = 0;
    };
    const unsigned k = opt.threads;
    std::vector<local_best> best(k);
    std::vector<std::exception_ptr> errors(k);

    auto run_chunk = [&](unsigned j) {
        try {
            local_best& lb = best[j];
            const std::size_t n = records.size();
            const std::size_t lo = n * j / k;
            const std::size_t hi = n * (j + 1) / k;
            for (std::size_t i = lo; i < hi; ++i) {
                for (const auto& d : detail::fit_exponents(info, records[i], opt.per_d)) {
                    const bound_point pt = point_from_record(T, records[i], d, opt.factoring);
                    const auto ratio = detail::ratio_of(shape, pt);
                    if (!ratio) {
                        ++lb.excluded;
                        continue;
                    }
                    ++lb.sample;
                    const bool better =
                        !lb.any || (info.direction == fit_direction::min ? *ratio < lb.value
                                                                         : *ratio > lb.value);
                    if (better) {
                        lb.any = true;
                        lb.value = *ratio;
                        lb.index = i;
                        lb.d = d;
                    }
                }
            }
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    if (k == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(k);
        for (unsigned j = 0; j < k; ++j) pool.emplace_back(run_chunk, j);
        for (auto& t : pool) t.join();
    }
    for (unsigned j = 0; j < k; ++j)
        if (errors[j]) std::rethrow_exception(errors[j]);

    fit_report rep;
    rep.shape = shape;
    local_best agg;
    for (const auto& lb : best) {
        rep.sample_size += lb.sample;
        rep.exclusions += lb.excluded;
        if (!lb.any) continue;
        const bool better =
            !agg.any || (info.direction == fit_direction::min ? lb.value < agg.value
                                                              : lb.value > agg.value);
        if (better) {
            agg.any = true;
            agg.value = lb.value;
            agg.index = lb.index;
            agg.d = lb.d;
        }
    }
    if (rep.sample_size == 0)
        throw empty_sample(std::string("fit_constant: no evaluation points for ") + info.name);
    rep.constant = static_cast<double>(agg.value);
    rep.witness = records[agg.index];
    rep.witness_d = agg.d;

    if (opt.points) {
        opt.points->clear();
        for (std::size_t i = 0; i < records.size(); ++i) {
            for (const auto& d : detail::fit_exponents(info, records[i], opt.per_d)) {
                const bound_point pt = point_from_record(T, records[i], d, opt.factoring);
                if (!detail::ratio_of(shape, pt)) continue;
                const bound_eval ev = evaluate_bound(shape, rep.constant, pt);
                opt.points->push_back(fit_point{records[i].big_x, static_cast<double>(ev.lhs),
                                                static_cast<double>(ev.rhs)});
            }
        }
    }
    return rep;
}

} // namespace gapforge
