#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bounds.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "gapscan.hpp"
#include "streams.hpp"
#include "thue.hpp"

namespace gapforge {

// Everything the subcommands consume. Arbitrary-size inputs stay strings
// until the handler parses them into mpz.
struct run_config {
    std::string primes;
    std::string limit;
    std::string window;
    std::string m;
    std::string x;
    std::string exponents;
    std::string coefficient;
    std::string delta;
    std::string height;
    std::string shape;
    std::string key;
    std::string emit_points;
    std::string output = "csv";
    std::string config; // consumed by the pre-scan; present so parsing accepts it
    u64 p_bound = 0;
    u64 pair_budget = 10'000'000;
    u64 effort_limit = 4'000'000;
    u64 form_cap = 100'000;
    unsigned threads = 1;
    u32 d = 0;
    u32 per_d = 0;
};

namespace cli_detail {

inline mpz_class parse_mpz(const std::string& s, const char* what) {
    if (s.empty()) throw config_error(std::string(what) + ": empty integer");
    mpz_class v;
    if (v.set_str(s, 10) != 0)
        throw config_error(std::string(what) + ": not a decimal integer: " + s);
    return v;
}

inline std::vector<u64> parse_primes(const std::string& s) {
    std::vector<u64> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = std::min(s.find(',', pos), s.size());
        const std::string tok = s.substr(pos, comma - pos);
        if (tok.empty()) throw config_error("primes: empty element in list");
        u64 v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw config_error("primes: not an integer: " + tok);
        out.push_back(v);
        pos = comma + 1;
        if (comma == s.size()) break;
    }
    return out;
}

inline bool want_jsonl(const run_config& cfg) {
    if (cfg.output == "jsonl") return true;
    if (cfg.output == "csv") return false;
    throw config_error("output: must be csv or jsonl");
}

inline std::string env_key(const std::string& lname) {
    std::string key = "GAPFORGE_";
    for (char c : lname) key += c == '-' ? '_' : static_cast<char>(std::toupper(c));
    return key;
}

// key=value lines; blank lines and #-comments skipped. Keys are the long
// option names of the invoked subcommand, without the leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw config_error("config: expected key=value: " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw config_error("config: empty key in line: " + t);
        out.emplace_back(key, value);
    }
    return out;
}

inline scan_options scan_options_from(const run_config& cfg) {
    scan_options opt;
    if (!cfg.window.empty()) opt.window = parse_mpz(cfg.window, "window");
    if (cfg.p_bound) opt.p_bound = cfg.p_bound;
    opt.threads = cfg.threads;
    opt.pair_budget = cfg.pair_budget;
    opt.factoring.effort_limit = cfg.effort_limit;
    return opt;
}

inline sunit smooth_unit_from_exponents(const prime_set& T, const std::string& list) {
    std::vector<u64> raw;
    try {
        raw = parse_primes(list);
    } catch (const config_error&) {
        throw config_error("exponents: not a comma-separated integer list: " + list);
    }
    if (raw.size() != T.primes.size())
        throw config_error("exponents: expected one entry per prime");
    sunit s;
    s.value = 1;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        s.exponents.push_back(static_cast<u32>(raw[i]));
        mpz_class q(T.primes[i]), pw;
        mpz_pow_ui(pw.get_mpz_t(), q.get_mpz_t(), raw[i]);
        s.value *= pw;
    }
    if (s.value < 2) throw config_error("exponents: value must be >= 2");
    return s;
}

inline sunit smooth_unit_from_value(const prime_set& T, const mpz_class& x) {
    if (x < 2) throw config_error("x: must be >= 2");
    sunit s;
    s.value = x;
    mpz_class rest = x;
    for (u64 q : T.primes) {
        const unsigned long e =
            mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(q).get_mpz_t());
        s.exponents.push_back(static_cast<u32>(e));
    }
    if (rest != 1) throw config_error("x: not smooth over the prime set");
    return s;
}

} // namespace cli_detail

// In-process entry point: args without the program name. Returns the
// process exit code: 0 ok, 2 bad input, 3 cap exceeded, 4 factoring effort
// exhausted, 5 empty fit sample.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    run_config cfg;

    CLI::App app{"number-theoretic gap laboratory: smooth sequences, coprime powers, "
                 "gap scans, binary forms, empirical bound constants"};
    app.name("gapforge");
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output", cfg.output, "csv or jsonl (default csv)");
        sub->add_option("--config", cfg.config, "key=value defaults file");
        sub->add_option("--primes", cfg.primes, "comma-separated prime set, e.g. 2,3")
            ->required();
    };
    auto add_scan_knobs = [&](CLI::App* sub) {
        sub->add_option("--window", cfg.window, "keep only |x-u| <= window");
        sub->add_option("--p-bound", cfg.p_bound, "certify P > bound instead of factoring");
        sub->add_option("--threads", cfg.threads, "worker threads (default 1)");
        sub->add_option("--pair-budget", cfg.pair_budget, "abort beyond this many pairs");
        sub->add_option("--effort-limit", cfg.effort_limit, "factoring iteration budget");
    };

    CLI::App* c_smooth = app.add_subcommand("smooth", "stream the smooth sequence");
    add_common(c_smooth);
    c_smooth->add_option("--limit", cfg.limit, "upper bound")->required();

    CLI::App* c_powers = app.add_subcommand("powers", "stream the coprime power set");
    add_common(c_powers);
    c_powers->add_option("--limit", cfg.limit, "upper bound")->required();
    c_powers->add_option("--d", cfg.d, "fixed exponent (default: all)");

    CLI::App* c_scan = app.add_subcommand("scan", "enumerate gap records");
    add_common(c_scan);
    c_scan->add_option("--limit", cfg.limit, "upper bound")->required();
    add_scan_knobs(c_scan);

    CLI::App* c_records = app.add_subcommand("records", "running-minimum record staircase");
    add_common(c_records);
    c_records->add_option("--limit", cfg.limit, "upper bound")->required();
    add_scan_knobs(c_records);
    c_records->add_option("--key", cfg.key, "delta or p-max")->required();

    CLI::App* c_solve = app.add_subcommand("solve", "solve x - u = m");
    add_common(c_solve);
    c_solve->add_option("--limit", cfg.limit, "upper bound")->required();
    c_solve->add_option("--m", cfg.m, "offset, may be negative")->required();

    CLI::App* c_tijdeman = app.add_subcommand("tijdeman", "consecutive-gap exponent");
    add_common(c_tijdeman);
    c_tijdeman->add_option("--limit", cfg.limit, "upper bound")->required();

    CLI::App* c_decompose = app.add_subcommand("decompose", "split a smooth value along d");
    add_common(c_decompose);
    c_decompose->add_option("--x", cfg.x, "smooth value");
    c_decompose->add_option("--exponents", cfg.exponents, "exponent vector over the prime set");
    c_decompose->add_option("--d", cfg.d, "exponent, >= 2")->required();

    CLI::App* c_thue = app.add_subcommand("thue", "binary forms: list or solve");
    add_common(c_thue);
    c_thue->add_option("--d", cfg.d, "degree, >= 2")->required();
    c_thue->add_option("--coefficient", cfg.coefficient, "solve this single form");
    c_thue->add_option("--delta", cfg.delta, "target value (enables solving)");
    c_thue->add_option("--height", cfg.height, "search box 0 <= Y <= height");
    c_thue->add_option("--threads", cfg.threads, "worker threads (default 1)");
    c_thue->add_option("--form-cap", cfg.form_cap, "refuse to list more than this many forms");

    CLI::App* c_fit = app.add_subcommand("fit", "fit empirical bound constants");
    add_common(c_fit);
    c_fit->add_option("--limit", cfg.limit, "upper bound")->required();
    add_scan_knobs(c_fit);
    c_fit->add_option("--shape", cfg.shape, "shape name, comma list, or all")->required();
    c_fit->add_option("--per-d", cfg.per_d, "restrict the sample to this exponent");
    c_fit->add_option("--emit-points", cfg.emit_points, "write (shape,X,lhs,rhs) rows here");

    for (CLI::App* sub : {c_smooth, c_powers, c_scan, c_records, c_solve, c_tijdeman,
                          c_decompose, c_thue, c_fit})
        for (CLI::Option* o : sub->get_options())
            o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // Layered inputs: config file < environment < command line. The merge
    // happens in argument order with take-last options.
    std::string subname;
    for (const std::string& a : args)
        if (!a.empty() && a[0] != '-') {
            subname = a;
            break;
        }
    std::string config_path;
    if (const char* e = std::getenv("GAPFORGE_CONFIG")) config_path = e;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }

    std::vector<std::string> merged;
    try {
        CLI::App* sub = nullptr;
        if (!subname.empty()) {
            try {
                sub = app.get_subcommand(subname);
            } catch (const CLI::Error&) {
                sub = nullptr; // unknown name surfaces as a parse error below
            }
        }
        std::vector<std::string> known;
        if (sub)
            for (CLI::Option* o : sub->get_options())
                for (const std::string& ln : o->get_lnames())
                    if (ln != "help" && ln != "config") known.push_back(ln);
        if (!subname.empty()) merged.push_back(subname);
        if (!config_path.empty() && sub) {
            for (auto& [k, v] : read_config_file(config_path))
                merged.push_back("--" + k + "=" + v);
        }
        for (const std::string& ln : known)
            if (const char* e = std::getenv(env_key(ln).c_str()))
                merged.push_back("--" + ln + "=" + std::string(e));
        bool past_sub = false;
        for (const std::string& a : args) {
            if (!past_sub && a == subname) {
                past_sub = true;
                continue;
            }
            merged.push_back(a);
        }
    } catch (const config_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    std::vector<const char*> argv;
    argv.push_back("gapforge");
    for (const std::string& a : merged) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        const bool jsonl = want_jsonl(cfg);
        const prime_set T = prime_set::make(parse_primes(cfg.primes));

        if (c_smooth->parsed()) {
            for_each_smooth(T, parse_mpz(cfg.limit, "limit"), [&](const sunit& s) {
                out << (jsonl ? json_smooth(s) : csv_smooth(s)) << '\n';
                out.flush();
            });
        } else if (c_powers->parsed()) {
            if (jsonl) {
                out << json_meta() << '\n';
                out.flush();
            }
            auto emit = [&](const power_value& p) {
                out << (jsonl ? json_power(p) : csv_power(p)) << '\n';
                out.flush();
            };
            const mpz_class limit = parse_mpz(cfg.limit, "limit");
            if (cfg.d) for_each_power(T, limit, emit, cfg.d);
            else for_each_power(T, limit, emit);
        } else if (c_scan->parsed() || c_records->parsed()) {
            std::vector<gap_record> recs =
                scan_gaps(T, parse_mpz(cfg.limit, "limit"), scan_options_from(cfg));
            if (c_records->parsed()) {
                minima_key key;
                if (cfg.key == "delta") key = minima_key::abs_delta;
                else if (cfg.key == "p-max") key = minima_key::p_max;
                else throw config_error("key: must be delta or p-max");
                recs = record_minima(recs, key);
            }
            if (jsonl) out << json_meta() << '\n';
            for (const gap_record& r : recs)
                out << (jsonl ? json_record(r) : csv_record(r)) << '\n';
            out.flush();
        } else if (c_solve->parsed()) {
            const auto pairs = solve_offset(T, parse_mpz(cfg.m, "m"), parse_mpz(cfg.limit, "limit"));
            for (const auto& [x, u] : pairs)
                out << (jsonl ? json_pair(x, u) : csv_pair(x, u)) << '\n';
            out.flush();
        } else if (c_tijdeman->parsed()) {
            const tijdeman_report rep = tijdeman_gaps(T, parse_mpz(cfg.limit, "limit"));
            out << (jsonl ? json_tijdeman(rep) : csv_tijdeman(rep)) << '\n';
            out.flush();
        } else if (c_decompose->parsed()) {
            if (cfg.x.empty() == cfg.exponents.empty())
                throw config_error("decompose: provide exactly one of --x or --exponents");
            const sunit s = cfg.x.empty()
                                ? smooth_unit_from_exponents(T, cfg.exponents)
                                : smooth_unit_from_value(T, parse_mpz(cfg.x, "x"));
            const decomposition dec = decompose(T, s, cfg.d);
            out << (jsonl ? json_decomposition(dec) : csv_decomposition(dec)) << '\n';
            out.flush();
        } else if (c_thue->parsed()) {
            const bool solving = !cfg.delta.empty();
            if (!solving && !cfg.coefficient.empty())
                throw config_error("thue: --coefficient requires --delta and --height");
            if (solving && cfg.height.empty())
                throw config_error("thue: solving requires --height");
            if (!solving) {
                for (const thue_form& f : all_thue_forms(T, cfg.d, {cfg.form_cap}))
                    out << (jsonl ? json_form(f) : csv_form(f)) << '\n';
            } else {
                const mpz_class target = parse_mpz(cfg.delta, "delta");
                const mpz_class height = parse_mpz(cfg.height, "height");
                std::vector<thue_form> forms;
                if (!cfg.coefficient.empty()) {
                    thue_form f;
                    f.degree = cfg.d;
                    f.coefficient = parse_mpz(cfg.coefficient, "coefficient");
                    forms.push_back(std::move(f));
                } else {
                    forms = all_thue_forms(T, cfg.d, {cfg.form_cap});
                }
                for (const thue_form& f : forms)
                    for (const thue_solution& s : solve_thue_bounded(f, target, height, cfg.threads))
                        out << (jsonl ? json_thue_solution(f, s) : csv_thue_solution(f, s))
                            << '\n';
            }
            out.flush();
        } else if (c_fit->parsed()) {
            const std::vector<gap_record> recs =
                scan_gaps(T, parse_mpz(cfg.limit, "limit"), scan_options_from(cfg));
            std::vector<bound_shape> shapes;
            if (cfg.shape == "all") {
                for (const auto& e : shape_registry()) shapes.push_back(e.shape);
            } else {
                std::size_t pos = 0;
                while (pos <= cfg.shape.size()) {
                    const std::size_t comma = std::min(cfg.shape.find(',', pos), cfg.shape.size());
                    const std::string tok = cfg.shape.substr(pos, comma - pos);
                    const auto s = parse_shape(tok);
                    if (!s) throw config_error("shape: unknown shape: " + tok);
                    shapes.push_back(*s);
                    pos = comma + 1;
                    if (comma == cfg.shape.size()) break;
                }
            }
            std::ofstream points_file;
            if (!cfg.emit_points.empty()) {
                points_file.open(cfg.emit_points, std::ios::trunc);
                if (!points_file) throw config_error("emit-points: cannot open " + cfg.emit_points);
            }
            for (bound_shape shape : shapes) {
                fit_options fo;
                if (cfg.per_d) fo.per_d = cfg.per_d;
                fo.threads = cfg.threads;
                fo.factoring.effort_limit = cfg.effort_limit;
                std::vector<fit_point> points;
                if (points_file.is_open()) fo.points = &points;
                const fit_report rep = fit_constant(T, shape, recs, fo);
                out << (jsonl ? json_fit(rep) : csv_fit(rep)) << '\n';
                if (points_file.is_open()) {
                    const char* name = info_of(shape).name;
                    for (const fit_point& p : points)
                        points_file << (jsonl ? json_fit_point(name, p) : csv_fit_point(name, p))
                                    << '\n';
                }
            }
            out.flush();
        }
        return 0;
    } catch (const config_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const cap_exceeded& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const factor_exhausted& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const empty_sample& e) {
        err << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace gapforge
