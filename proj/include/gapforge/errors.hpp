#pragma once

#include <stdexcept>
#include <string>

namespace gapforge {

// Factoring ran out of its iteration budget before splitting a cofactor.
// Raising the effort limit and retrying is always sound: results never
// depend on the budget once factoring succeeds.
struct factor_exhausted : std::runtime_error {
    explicit factor_exhausted(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration would exceed its configured cap (form count, pair budget).
struct cap_exceeded : std::runtime_error {
    explicit cap_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// A requested exponent d is not among the valid exponents of a power record.
struct exponent_mismatch : std::invalid_argument {
    explicit exponent_mismatch(const std::string& what) : std::invalid_argument(what) {}
};

// A constant fit was asked for on zero evaluation points (after filters and
// exclusions); there is nothing to fit.
struct empty_sample : std::runtime_error {
    explicit empty_sample(const std::string& what) : std::runtime_error(what) {}
};

// A bound evaluation is missing an input its shape requires.
struct missing_field : std::invalid_argument {
    explicit missing_field(const std::string& what) : std::invalid_argument(what) {}
};

// Bad command line, environment, or config-file input.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gapforge
