#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "bounds.hpp"
#include "gapscan.hpp"
#include "streams.hpp"
#include "thue.hpp"

namespace gapforge {

// Shortest round-trip rendering; identical on every platform, so outputs
// can be compared byte for byte.
inline std::string render_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

inline std::string render_mpz(const mpz_class& v) { return v.get_str(); }

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

inline std::string join_exponents(const std::vector<u32>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

inline std::string json_u32_array(const std::vector<u32>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out + "]";
}

inline std::string render_factors(const factorization& f) {
    std::string out;
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
        if (i) out += ' ';
        out += render_mpz(f.factors[i].first);
        out += '^';
        out += std::to_string(f.factors[i].second);
    }
    return out;
}

inline std::string json_factors(const factorization& f) {
    std::string out = "[";
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
        if (i) out += ',';
        out += "[" + render_mpz(f.factors[i].first) + "," +
               std::to_string(f.factors[i].second) + "]";
    }
    return out + "]";
}

// First line of jsonl streams that expose the power set: pins down the
// enumeration semantics and the primality certification regime.
inline std::string json_meta() {
    return "{\"meta\":{\"power_set\":\"set semantics: each value once, canonical witness, "
           "all_exponents lists every valid d\",\"primality\":\"deterministic below 2^64; "
           "64 seeded rounds above (error < 2^-128), flagged probabilistic\"}}";
}

inline std::string csv_smooth(const sunit& s) {
    return render_mpz(s.value) + "," + join_exponents(s.exponents);
}

inline std::string json_smooth(const sunit& s) {
    return "{\"value\":" + render_mpz(s.value) +
           ",\"exponents\":" + json_u32_array(s.exponents) + "}";
}

inline std::string csv_power(const power_value& p) {
    return render_mpz(p.value) + "," + render_mpz(p.base) + "," + std::to_string(p.exponent) +
           "," + join_exponents(p.all_exponents);
}

inline std::string json_power(const power_value& p) {
    return "{\"value\":" + render_mpz(p.value) + ",\"base\":" + render_mpz(p.base) +
           ",\"exponent\":" + std::to_string(p.exponent) +
           ",\"all_exponents\":" + json_u32_array(p.all_exponents) + "}";
}

inline std::string csv_record(const gap_record& r) {
    std::string out = render_mpz(r.x.value) + "," + render_mpz(r.u.value) + "," +
                      render_mpz(r.delta) + "," + render_mpz(r.p_max) + "," +
                      (r.p_max_exact ? "1" : "0") + "," + render_mpz(r.big_x) + "," +
                      join_exponents(r.x.exponents) + "," + render_mpz(r.u.base) + "," +
                      std::to_string(r.u.exponent) + "," + join_exponents(r.u.all_exponents) +
                      ",";
    if (r.abs_delta_factors) out += render_factors(*r.abs_delta_factors);
    return out;
}

inline std::string json_record(const gap_record& r) {
    std::string out = "{\"x\":" + render_mpz(r.x.value) + ",\"u\":" + render_mpz(r.u.value) +
                      ",\"delta\":" + render_mpz(r.delta) + ",\"p_max\":" + render_mpz(r.p_max) +
                      ",\"p_max_exact\":" + (r.p_max_exact ? "true" : "false") +
                      ",\"big_x\":" + render_mpz(r.big_x) +
                      ",\"x_exponents\":" + json_u32_array(r.x.exponents) +
                      ",\"u_base\":" + render_mpz(r.u.base) +
                      ",\"u_exponent\":" + std::to_string(r.u.exponent) +
                      ",\"u_all_exponents\":" + json_u32_array(r.u.all_exponents) +
                      ",\"delta_factors\":";
    out += r.abs_delta_factors ? json_factors(*r.abs_delta_factors) : std::string("null");
    if (r.abs_delta_factors && r.abs_delta_factors->probabilistic)
        out += ",\"primality\":\"probabilistic\"";
    return out + "}";
}

inline std::string csv_pair(const sunit& x, const power_value& u) {
    return render_mpz(x.value) + "," + render_mpz(u.value);
}

inline std::string json_pair(const sunit& x, const power_value& u) {
    return "{\"x\":" + render_mpz(x.value) + ",\"u\":" + render_mpz(u.value) + "}";
}

inline std::string csv_tijdeman(const tijdeman_report& t) {
    return std::to_string(t.first_index) + "," + std::to_string(t.last_index) + "," +
           render_double(t.min_exponent) + "," + std::to_string(t.witness_index) + "," +
           render_mpz(t.witness_t) + "," + render_mpz(t.witness_gap);
}

inline std::string json_tijdeman(const tijdeman_report& t) {
    return "{\"first_index\":" + std::to_string(t.first_index) +
           ",\"last_index\":" + std::to_string(t.last_index) +
           ",\"min_exponent\":" + render_double(t.min_exponent) +
           ",\"witness_index\":" + std::to_string(t.witness_index) +
           ",\"witness_t\":" + render_mpz(t.witness_t) +
           ",\"witness_gap\":" + render_mpz(t.witness_gap) + "}";
}

inline std::string csv_fit(const fit_report& f) {
    const shape_info& info = info_of(f.shape);
    return std::string(info.name) + "," + render_double(f.constant) + "," +
           std::to_string(f.sample_size) + "," + std::to_string(f.exclusions) + "," +
           render_mpz(f.witness.x.value) + "," + render_mpz(f.witness.u.value) + "," +
           (f.witness_d ? std::to_string(*f.witness_d) : std::string());
}

inline std::string json_fit(const fit_report& f) {
    const shape_info& info = info_of(f.shape);
    std::string out = std::string("{\"shape\":\"") + info.name +
                      "\",\"constant\":" + render_double(f.constant) +
                      ",\"constant_kind\":\"empirical\",\"formula\":\"" +
                      json_escape(info.formula) + "\",\"sample_size\":" +
                      std::to_string(f.sample_size) +
                      ",\"exclusions\":" + std::to_string(f.exclusions) +
                      ",\"witness_x\":" + render_mpz(f.witness.x.value) +
                      ",\"witness_u\":" + render_mpz(f.witness.u.value) + ",\"witness_d\":";
    out += f.witness_d ? std::to_string(*f.witness_d) : std::string("null");
    return out + "}";
}

inline std::string csv_fit_point(const char* shape_name, const fit_point& p) {
    return std::string(shape_name) + "," + render_mpz(p.X) + "," + render_double(p.lhs) + "," +
           render_double(p.rhs);
}

inline std::string json_fit_point(const char* shape_name, const fit_point& p) {
    return std::string("{\"shape\":\"") + shape_name + "\",\"X\":" + render_mpz(p.X) +
           ",\"lhs\":" + render_double(p.lhs) + ",\"rhs\":" + render_double(p.rhs) + "}";
}

inline std::string csv_decomposition(const decomposition& d) {
    return std::to_string(d.d) + "," + join_exponents(d.residues) + "," +
           join_exponents(d.cofactor_exponents) + "," + render_mpz(d.residue_part) + "," +
           render_mpz(d.cofactor);
}

inline std::string json_decomposition(const decomposition& d) {
    return "{\"d\":" + std::to_string(d.d) + ",\"residues\":" + json_u32_array(d.residues) +
           ",\"cofactor_exponents\":" + json_u32_array(d.cofactor_exponents) +
           ",\"residue_part\":" + render_mpz(d.residue_part) +
           ",\"cofactor\":" + render_mpz(d.cofactor) + "}";
}

inline std::string csv_form(const thue_form& f) {
    return std::to_string(f.degree) + "," + render_mpz(f.coefficient) + "," +
           join_exponents(f.residues);
}

inline std::string json_form(const thue_form& f) {
    return "{\"degree\":" + std::to_string(f.degree) +
           ",\"coefficient\":" + render_mpz(f.coefficient) +
           ",\"residues\":" + json_u32_array(f.residues) + "}";
}

inline std::string csv_thue_solution(const thue_form& f, const thue_solution& s) {
    return render_mpz(f.coefficient) + "," + render_mpz(s.z) + "," + render_mpz(s.y);
}

inline std::string json_thue_solution(const thue_form& f, const thue_solution& s) {
    return "{\"coefficient\":" + render_mpz(f.coefficient) + ",\"z\":" + render_mpz(s.z) +
           ",\"y\":" + render_mpz(s.y) + "}";
}

} // namespace gapforge
