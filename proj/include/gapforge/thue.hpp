#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include <gmpxx.h>

#include "arith.hpp"
#include "errors.hpp"
#include "gapscan.hpp"
#include "streams.hpp"

namespace gapforge {

// Euclidean split of a smooth value along exponent d: with exponents a_i,
// residues r_i = a_i mod d and cofactor exponents floor(a_i / d), so that
// value = residue_part * cofactor^d.
struct decomposition {
    u32 d = 0;
    std::vector<u32> residues;
    std::vector<u32> cofactor_exponents;
    mpz_class residue_part; // c = prod q_i^{r_i}
    mpz_class cofactor;     // y = prod q_i^{floor(a_i/d)}
};

inline decomposition decompose(const prime_set& T, const sunit& x, u32 d) {
    if (d < 2) throw std::invalid_argument("decompose: d must be >= 2");
    if (x.exponents.size() != T.size())
        throw std::invalid_argument("decompose: exponent vector does not match the prime set");
    decomposition out;
    out.d = d;
    out.residue_part = 1;
    out.cofactor = 1;
    mpz_class pw;
    for (std::size_t i = 0; i < T.size(); ++i) {
        const u32 r = x.exponents[i] % d;
        const u32 q = x.exponents[i] / d;
        out.residues.push_back(r);
        out.cofactor_exponents.push_back(q);
        mpz_class base(T.primes[i]);
        mpz_pow_ui(pw.get_mpz_t(), base.get_mpz_t(), r);
        out.residue_part *= pw;
        mpz_pow_ui(pw.get_mpz_t(), base.get_mpz_t(), q);
        out.cofactor *= pw;
    }
    return out;
}

// The binary form F(Z, Y) = Z^degree - coefficient * Y^degree. residues
// carries the exponent vector behind the coefficient when the form came from
// a prime set; ad-hoc forms leave it empty.
struct thue_form {
    u32 degree = 0;
    mpz_class coefficient;
    std::vector<u32> residues;

    mpz_class eval(const mpz_class& z, const mpz_class& y) const {
        mpz_class zp, yp;
        mpz_pow_ui(zp.get_mpz_t(), z.get_mpz_t(), degree);
        mpz_pow_ui(yp.get_mpz_t(), y.get_mpz_t(), degree);
        return zp - coefficient * yp;
    }
};

struct thue_options {
    u64 form_cap = 100'000; // d^t forms exist; refuse to materialize more
};

// Every form arising from the decomposition along d: one per residue vector
// in {0..d-1}^t, d^t in total, sorted by coefficient.
inline std::vector<thue_form> all_thue_forms(const prime_set& T, u32 d,
                                             const thue_options& opt = {}) {
    if (d < 2) throw std::invalid_argument("all_thue_forms: d must be >= 2");
    const std::size_t t = T.size();
    u64 count = 1;
    for (std::size_t i = 0; i < t; ++i) {
        if (count > opt.form_cap / d)
            throw cap_exceeded("all_thue_forms: d^t exceeds the form cap");
        count *= d;
    }
    if (count > opt.form_cap) throw cap_exceeded("all_thue_forms: d^t exceeds the form cap");

    std::vector<thue_form> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<u32> r(t, 0);
    mpz_class pw;
    for (;;) {
        thue_form f;
        f.degree = d;
        f.residues = r;
        f.coefficient = 1;
        for (std::size_t i = 0; i < t; ++i) {
            mpz_class base(T.primes[i]);
            mpz_pow_ui(pw.get_mpz_t(), base.get_mpz_t(), r[i]);
            f.coefficient *= pw;
        }
        out.push_back(std::move(f));
        std::size_t i = 0;
        while (i < t && ++r[i] == d) r[i++] = 0;
        if (i == t) break;
    }
    std::sort(out.begin(), out.end(), [](const thue_form& a, const thue_form& b) {
        return a.coefficient < b.coefficient;
    });
    return out;
}

struct thue_solution {
    mpz_class z;
    mpz_class y;
};

// All integer solutions of F(Z, Y) = delta in the box 0 <= Y <= height (the
// decomposition orients y >= 1, so nonnegative Y is the search range): for
// each Y the candidate Z^degree is delta + c Y^degree, settled by exact root
// extraction. Solutions come out sorted by (Y, Z).
inline std::vector<thue_solution> solve_thue_bounded(const thue_form& f, const mpz_class& delta,
                                                     const mpz_class& height,
                                                     unsigned threads = 1) {
    if (f.degree < 2) throw std::invalid_argument("solve_thue_bounded: degree must be >= 2");
    if (f.coefficient < 1)
        throw std::invalid_argument("solve_thue_bounded: coefficient must be >= 1");
    if (height < 1) throw std::invalid_argument("solve_thue_bounded: height must be >= 1");
    if (threads == 0) throw std::invalid_argument("solve_thue_bounded: threads must be >= 1");

    const u64 hmax = mpz_fits_ulong_p(height.get_mpz_t())
                         ? mpz_get_ui(height.get_mpz_t())
                         : throw std::invalid_argument("solve_thue_bounded: height too large");
    const unsigned k = threads;
    std::vector<std::vector<thue_solution>> chunks(k);

    auto worker = [&](unsigned j) {
        const u64 lo = (hmax + 1) * j / k;
        const u64 hi = (hmax + 1) * (j + 1) / k; // exclusive
        mpz_class yp, w;
        for (u64 yv = lo; yv < hi; ++yv) {
            mpz_class y(yv);
            mpz_pow_ui(yp.get_mpz_t(), y.get_mpz_t(), f.degree);
            w = delta + f.coefficient * yp;
            if (w == 0) {
                chunks[j].push_back({mpz_class(0), y});
                continue;
            }
            const bool even = f.degree % 2 == 0;
            if (even && w < 0) continue;
            auto [root, exact] = integer_root(abs(w), f.degree);
            if (!exact) continue;
            if (even) {
                chunks[j].push_back({mpz_class(-root), y});
                chunks[j].push_back({root, y});
            } else {
                chunks[j].push_back({w < 0 ? mpz_class(-root) : root, y});
            }
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
    std::vector<thue_solution> out;
    for (auto& c : chunks)
        for (auto& s : c) out.push_back(std::move(s));
    return out;
}

// The bridge identity for one gap record at exponent d: writing x = c y^d
// and u = z_d^d, the form value F(z_d, y) = u - x equals -(x - u).
struct gap_thue_link {
    decomposition decomp;
    thue_form form;
    mpz_class power_base; // z_d with u = z_d^d
    mpz_class form_value; // F(z_d, y)
    bool verified = false;
};

inline gap_thue_link link_gap_to_thue(const prime_set& T, const gap_record& r, u32 d) {
    if (std::find(r.u.all_exponents.begin(), r.u.all_exponents.end(), d) ==
        r.u.all_exponents.end())
        throw exponent_mismatch("link_gap_to_thue: d is not a valid exponent of u");
    gap_thue_link link;
    link.decomp = decompose(T, r.x, d);
    link.form.degree = d;
    link.form.coefficient = link.decomp.residue_part;
    link.form.residues = link.decomp.residues;
    mpz_pow_ui(link.power_base.get_mpz_t(), r.u.base.get_mpz_t(), r.u.exponent / d);
    link.form_value = link.form.eval(link.power_base, link.decomp.cofactor);
    link.verified = link.form_value == -r.delta;
    return link;
}

} // namespace gapforge
