#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <gapforge/thue.hpp>

#include "oracles.hpp"

using namespace gapforge;

namespace {

sunit make_sunit(const prime_set& T, std::vector<u32> exps) {
    sunit s;
    s.exponents = std::move(exps);
    s.value = 1;
    mpz_class pw;
    for (std::size_t i = 0; i < T.size(); ++i) {
        mpz_class q(T.primes[i]);
        mpz_pow_ui(pw.get_mpz_t(), q.get_mpz_t(), s.exponents[i]);
        s.value *= pw;
    }
    return s;
}

std::vector<std::pair<long, long>> as_pairs(const std::vector<thue_solution>& sols) {
    std::vector<std::pair<long, long>> out;
    for (const auto& s : sols) out.emplace_back(mpz_get_si(s.z.get_mpz_t()),
                                                mpz_get_si(s.y.get_mpz_t()));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<long, long>> as_pairs(const std::vector<oracle::zy>& sols) {
    std::vector<std::pair<long, long>> out;
    for (const auto& s : sols) out.emplace_back(s.z, s.y);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("euclidean split of a smooth value") {
    const prime_set T = prime_set::make({2, 3});
    const sunit x = make_sunit(T, {7, 4}); // 10368

    const decomposition dec = decompose(T, x, 3);
    CHECK(dec.d == 3);
    CHECK(dec.residues == std::vector<u32>{1, 1});
    CHECK(dec.cofactor_exponents == std::vector<u32>{2, 1});
    CHECK(dec.residue_part == 6);
    CHECK(dec.cofactor == 12);
    mpz_class cube;
    mpz_pow_ui(cube.get_mpz_t(), dec.cofactor.get_mpz_t(), 3);
    CHECK(dec.residue_part * cube == x.value);

    // d above every exponent: the whole value is residue, the cofactor is 1.
    const sunit small = make_sunit(T, {2, 1});
    const decomposition flat = decompose(T, small, 5);
    CHECK(flat.residues == std::vector<u32>{2, 1});
    CHECK(flat.cofactor == 1);
    CHECK(flat.residue_part == small.value);
}

TEST_CASE("decomposition identity holds for random exponents") {
    const prime_set T = prime_set::make({2, 3, 5});
    std::mt19937_64 rng(20260821);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<u32> exps(3);
        for (auto& e : exps) e = static_cast<u32>(rng() % 11);
        if (exps == std::vector<u32>{0, 0, 0}) exps[0] = 1;
        const sunit x = make_sunit(T, exps);
        const u32 d = 2 + static_cast<u32>(rng() % 5);

        const decomposition dec = decompose(T, x, d);
        mpz_class pw;
        mpz_pow_ui(pw.get_mpz_t(), dec.cofactor.get_mpz_t(), d);
        CHECK(dec.residue_part * pw == x.value);
        for (std::size_t i = 0; i < exps.size(); ++i) {
            CHECK(dec.residues[i] < d);
            CHECK(dec.residues[i] + d * dec.cofactor_exponents[i] == exps[i]);
        }
    }
}

TEST_CASE("decompose guards") {
    const prime_set T = prime_set::make({2, 3});
    const sunit x = make_sunit(T, {1, 0});
    CHECK_THROWS_AS(decompose(T, x, 1), std::invalid_argument);
    sunit bad = x;
    bad.exponents.push_back(0);
    CHECK_THROWS_AS(decompose(T, bad, 2), std::invalid_argument);
}

TEST_CASE("the form family of a prime set") {
    const prime_set T = prime_set::make({2, 3});

    auto coeffs = [](const std::vector<thue_form>& fs) {
        std::vector<long> out;
        for (const auto& f : fs) out.push_back(mpz_get_si(f.coefficient.get_mpz_t()));
        return out;
    };

    const auto d2 = all_thue_forms(T, 2);
    CHECK(coeffs(d2) == std::vector<long>{1, 2, 3, 6});
    const auto d3 = all_thue_forms(T, 3);
    CHECK(coeffs(d3) == std::vector<long>{1, 2, 3, 4, 6, 9, 12, 18, 36});

    for (const auto& f : d3) {
        REQUIRE(f.residues.size() == 2);
        mpz_class prod = 1, pw;
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(f.residues[i] < 3);
            mpz_class q(T.primes[i]);
            mpz_pow_ui(pw.get_mpz_t(), q.get_mpz_t(), f.residues[i]);
            prod *= pw;
        }
        CHECK(prod == f.coefficient);
    }

    // One form per residue vector: distinct coefficients, counted exactly.
    const prime_set wide = prime_set::make({2, 3, 5});
    const auto d3w = all_thue_forms(wide, 3);
    CHECK(d3w.size() == 27);
    std::set<mpz_class> uniq;
    mpz_class rad_cubed;
    mpz_pow_ui(rad_cubed.get_mpz_t(), wide.radical.get_mpz_t(), 3);
    for (const auto& f : d3w) {
        uniq.insert(f.coefficient);
        CHECK(f.coefficient >= 1);
        CHECK(f.coefficient < rad_cubed);
    }
    CHECK(uniq.size() == 27);
}

TEST_CASE("form cap refuses combinatorial blowups") {
    const prime_set T = prime_set::make({2, 3});
    thue_options tight;
    tight.form_cap = 8;
    CHECK_THROWS_AS(all_thue_forms(T, 3, tight), cap_exceeded); // 3^2 = 9 > 8
    tight.form_cap = 9;
    CHECK(all_thue_forms(T, 3, tight).size() == 9);

    const prime_set seven = prime_set::make({2, 3, 5, 7, 11, 13, 17});
    CHECK_THROWS_AS(all_thue_forms(seven, 6), cap_exceeded); // 6^7 > 10^5
}

TEST_CASE("pell equation in a box") {
    thue_form pell;
    pell.degree = 2;
    pell.coefficient = 2;
    const auto sols = solve_thue_bounded(pell, 1, 20);
    CHECK(as_pairs(sols) == std::vector<std::pair<long, long>>{
                                {-17, 12}, {-3, 2}, {-1, 0}, {1, 0}, {3, 2}, {17, 12}});
    for (const auto& s : sols) CHECK(pell.eval(s.z, s.y) == 1);
}

TEST_CASE("odd degree keeps signed roots") {
    thue_form f;
    f.degree = 3;
    f.coefficient = 6;
    const auto sols = solve_thue_bounded(f, 2, 10);
    REQUIRE(sols.size() == 1);
    CHECK(sols[0].z == 2);
    CHECK(sols[0].y == 1);

    thue_form g;
    g.degree = 3;
    g.coefficient = 2;
    const auto neg = solve_thue_bounded(g, -1, 8);
    CHECK(as_pairs(neg) == std::vector<std::pair<long, long>>{{-1, 0}, {1, 1}});
}

TEST_CASE("solver matches the exhaustive box oracle") {
    std::mt19937_64 rng(20260821);
    const long coeff_pool[] = {1, 2, 3, 5, 6, 8, 12, 30, 100};
    for (int trial = 0; trial < 48; ++trial) {
        const long c = coeff_pool[rng() % std::size(coeff_pool)];
        const u32 d = 2 + static_cast<u32>(rng() % 4);
        const long delta = static_cast<long>(rng() % 41) - 20;
        thue_form f;
        f.degree = d;
        f.coefficient = c;
        const auto got = solve_thue_bounded(f, delta, 50);
        const auto want = oracle::thue_box(c, d, delta, 50);
        INFO("c=" << c << " d=" << d << " delta=" << delta);
        CHECK(as_pairs(got) == as_pairs(want));
        for (const auto& s : got) CHECK(f.eval(s.z, s.y) == delta);
    }
}

TEST_CASE("zero falls inside the solution set when the target aligns") {
    // delta = -c k^d puts (0, k) on the curve.
    thue_form f;
    f.degree = 2;
    f.coefficient = 2;
    const auto sols = solve_thue_bounded(f, -18, 10);
    bool zero_seen = false;
    for (const auto& s : sols)
        if (s.z == 0 && s.y == 3) zero_seen = true;
    CHECK(zero_seen);
    CHECK(as_pairs(sols) == as_pairs(oracle::thue_box(2, 2, -18, 10)));
}

TEST_CASE("solver threads never change the solution list") {
    thue_form pell;
    pell.degree = 2;
    pell.coefficient = 2;
    const auto one = solve_thue_bounded(pell, 1, 1200);
    for (unsigned k : {2u, 5u, 16u}) {
        const auto many = solve_thue_bounded(pell, 1, 1200, k);
        REQUIRE(many.size() == one.size());
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(many[i].z == one[i].z);
            CHECK(many[i].y == one[i].y);
        }
    }
}

TEST_CASE("solver guards") {
    thue_form f;
    f.degree = 2;
    f.coefficient = 2;
    CHECK_THROWS_AS(solve_thue_bounded(f, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(solve_thue_bounded(f, 1, 10, 0), std::invalid_argument);
    thue_form flat;
    flat.degree = 1;
    flat.coefficient = 2;
    CHECK_THROWS_AS(solve_thue_bounded(flat, 1, 10), std::invalid_argument);
    thue_form zero;
    zero.degree = 2;
    zero.coefficient = 0;
    CHECK_THROWS_AS(solve_thue_bounded(zero, 1, 10), std::invalid_argument);
}

TEST_CASE("every scanned gap links to its form exactly") {
    const prime_set T = prime_set::make({2, 3});
    const auto recs = scan_gaps(T, 20000);
    REQUIRE_FALSE(recs.empty());
    std::size_t links = 0;
    for (const auto& r : recs)
        for (u32 d : r.u.all_exponents) {
            const gap_thue_link link = link_gap_to_thue(T, r, d);
            ++links;
            REQUIRE(link.verified);
            CHECK(link.form.coefficient == link.decomp.residue_part);
            CHECK(link.form_value == -r.delta);
            mpz_class zp;
            mpz_pow_ui(zp.get_mpz_t(), link.power_base.get_mpz_t(), d);
            CHECK(zp == r.u.value);
        }
    CHECK(links >= recs.size());
}

TEST_CASE("link rejects an exponent the power does not carry") {
    const prime_set T = prime_set::make({3});
    const auto recs = scan_gaps(T, 10); // (3,4), (9,4) with u = 2^2
    REQUIRE_FALSE(recs.empty());
    CHECK(recs[0].u.all_exponents == std::vector<u32>{2});
    CHECK_THROWS_AS(link_gap_to_thue(T, recs[0], 3), exponent_mismatch);

    const gap_thue_link link = link_gap_to_thue(T, recs[0], 2);
    CHECK(link.verified);
    CHECK(link.power_base == 2);
}
