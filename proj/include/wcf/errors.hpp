#pragma once

// Exception taxonomy for the library. Every validation failure names the
// violated invariant and carries the measured residual in its message, so a
// caller can log the what() string and know which precondition broke and by
// how much.

#include <cstdio>
#include <stdexcept>
#include <string>

namespace wcf {

class error : public std::runtime_error {
public:
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Operands whose shapes do not match, or non-square matrices where square
// ones are required.
class dimension_error : public error {
public:
    using error::error;
};

// Matrix fails the Hermiticity residual check.
class not_hermitian_error : public error {
public:
    using error::error;
};

// Operator has an eigenvalue below the clamping window, so it cannot be
// treated as positive semidefinite.
class not_psd_error : public error {
public:
    using error::error;
};

// Operator is not a density operator (not PSD or trace far from one).
class not_density_error : public error {
public:
    using error::error;
};

// Operator is not a valid measurement element (spectrum escapes [0, 1]).
class not_povm_error : public error {
public:
    using error::error;
};

// The pair (rho, e0) does not give both announcements equal probability.
class fairness_error : public error {
public:
    using error::error;
};

// Generic invariant violation: bad state norms, malformed strategies,
// out-of-range configuration values.
class validation_error : public error {
public:
    using error::error;
};

// Scalar argument outside the documented domain of a constructor.
class domain_error : public error {
public:
    using error::error;
};

// An instance on which a requested figure is undefined (vanishing support
// where a positive overlap is required).
class degenerate_instance_error : public error {
public:
    using error::error;
};

// Request exceeds the documented size limits of a desk-scale routine.
class scale_error : public error {
public:
    using error::error;
};

// Malformed or unsupported serialized input.
class parse_error : public error {
public:
    using error::error;
};

// "name = 1.23e-04 exceeds limit 1e-09" -- shared formatting for residual
// messages so every error reads the same way.
inline std::string residual_text(const char* name, double value, double limit) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s = %.6e exceeds limit %.1e", name, value, limit);
    return buf;
}

}  // namespace wcf
