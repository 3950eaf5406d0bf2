#ifndef SQSTAT_ERROR_HPP
#define SQSTAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sqstat {

// All library failures derive from sqstat::error so callers (the CLI in
// particular) can map them onto stable exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Non-finite input, negative densities, integrator blow-ups.
class domain_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "numerical_domain"; }
};

// Malformed arguments: too few samples, non-monotone grids, unknown names.
class argument_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "argument"; }
};

// Every row of a spectrum was removed by the Tsallis cutoff.
class degenerate_ensemble_error : public domain_error {
public:
    using domain_error::domain_error;
    const char* kind() const noexcept override { return "degenerate_ensemble"; }
};

// Invalid spectra or model parameters.
class model_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "model_validation"; }
};

class config_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "config"; }
};

}  // namespace sqstat

#endif  // SQSTAT_ERROR_HPP
