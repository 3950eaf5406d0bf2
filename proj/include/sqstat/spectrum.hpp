#ifndef SQSTAT_SPECTRUM_HPP
#define SQSTAT_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"

namespace sqstat {

// One microcanonical subclass: the values of the exchanged extensive
// variables and the log of its Boltzmann-Gibbs degeneracy. `count` holds
// the exact degeneracy when it is representable, so that divisions by it
// are exact.
struct SpectrumRow {
    std::vector<double> x;
    double ln_g = 0.0;
    std::optional<double> count;

    double degeneracy() const { return count ? *count : std::exp(ln_g); }
};

struct DegeneracySpectrum {
    std::vector<std::string> variable_names;
    std::vector<SpectrumRow> rows;

    std::size_t dimension() const noexcept { return variable_names.size(); }

    std::size_t index_of(const std::string& name) const
    {
        auto it = std::find(variable_names.begin(), variable_names.end(), name);
        if (it == variable_names.end()) throw argument_error("spectrum has no variable '" + name + "'");
        return static_cast<std::size_t>(it - variable_names.begin());
    }

    // Values of one exchanged variable, row by row.
    std::vector<double> column(const std::string& name) const
    {
        const std::size_t k = index_of(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r.x[k]);
        return out;
    }

    // ln of the microcanonical class total, sum of g over rows.
    double ln_total() const
    {
        std::vector<double> lg;
        lg.reserve(rows.size());
        for (const auto& r : rows) lg.push_back(r.ln_g);
        return log_sum_exp(lg);
    }

    void validate() const
    {
        if (rows.empty()) throw model_error("spectrum must have at least one row");
        for (std::size_t i = 0; i < variable_names.size(); ++i) {
            for (std::size_t j = i + 1; j < variable_names.size(); ++j) {
                if (variable_names[i] == variable_names[j]) {
                    throw model_error("duplicate variable name '" + variable_names[i] + "'");
                }
            }
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.x.size() != variable_names.size()) {
                throw model_error("row " + std::to_string(r) + " has " + std::to_string(row.x.size()) +
                                  " values, expected " + std::to_string(variable_names.size()));
            }
            if (!std::isfinite(row.ln_g)) throw model_error("row " + std::to_string(r) + ": ln_g not finite");
            for (double v : row.x) {
                if (!std::isfinite(v)) throw model_error("row " + std::to_string(r) + ": non-finite variable value");
            }
            if (row.count && !(*row.count > 0.0)) throw model_error("row " + std::to_string(r) + ": count must be > 0");
        }
        std::vector<const std::vector<double>*> keys;
        keys.reserve(rows.size());
        for (const auto& r : rows) keys.push_back(&r.x);
        std::sort(keys.begin(), keys.end(), [](auto a, auto b) { return *a < *b; });
        for (std::size_t i = 1; i < keys.size(); ++i) {
            if (*keys[i] == *keys[i - 1]) throw model_error("spectrum rows must have distinct variable values");
        }
    }
};

// The numeric environment: y for each exchanged variable and the values of
// the fixed extensive variables.
struct EnsembleSpec {
    std::map<std::string, double> y;
    std::map<std::string, double> X;
};

// Collapse all rows into one: the microcanonical class.
// Exact counts are summed when every row carries one.
inline DegeneracySpectrum isolated(const DegeneracySpectrum& spec)
{
    spec.validate();
    SpectrumRow row;
    row.ln_g = spec.ln_total();
    double sum = 0.0;
    bool exact = true;
    for (const auto& r : spec.rows) {
        if (!r.count) { exact = false; break; }
        sum += *r.count;
    }
    if (exact && sum < 9007199254740992.0) {
        row.count = sum;
        row.ln_g = std::log(sum);
    }
    return DegeneracySpectrum{{}, {row}};
}

// Keep only rows with `name == value`, dropping that variable: the system
// is closed with respect to it.
inline DegeneracySpectrum restrict_to(const DegeneracySpectrum& spec, const std::string& name, double value)
{
    const std::size_t k = spec.index_of(name);
    DegeneracySpectrum out;
    for (std::size_t i = 0; i < spec.variable_names.size(); ++i) {
        if (i != k) out.variable_names.push_back(spec.variable_names[i]);
    }
    for (const auto& r : spec.rows) {
        if (r.x[k] != value) continue;
        SpectrumRow nr = r;
        nr.x.erase(nr.x.begin() + static_cast<std::ptrdiff_t>(k));
        out.rows.push_back(std::move(nr));
    }
    if (out.rows.empty()) throw model_error("no spectrum row has " + name + " = " + std::to_string(value));
    return out;
}

}  // namespace sqstat

#endif  // SQSTAT_SPECTRUM_HPP
