#ifndef SQSTAT_ENSEMBLE_HPP
#define SQSTAT_ENSEMBLE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"
#include "sqstat/spectrum.hpp"
#include "sqstat/squeeze.hpp"
#include "sqstat/thermo_state.hpp"

namespace sqstat {

// Per-row rearranged classes g_{Xj ∪ yi ∪ Xi} = H(h(g_row) e^{-Σ y_i X_i})
// and their total, the characteristic class g_{Xj ∪ yi}.
struct ClassTable {
    std::vector<LogValue> rows;
    double ln_total = 0.0;
    std::size_t surviving = 0;

    bool excluded(std::size_t r) const { return rows[r].cutoff; }
};

struct ProbabilityTable {
    // P of each row's macrostate; zero for excluded rows.
    std::vector<double> macro_probs;
    // p_k of one configuration inside the row.
    std::vector<double> config_probs;
    std::vector<double> ln_config_probs;
};

struct BoltzmannFactor {
    double value = 0.0;
    double ln_value = -std::numeric_limits<double>::infinity();
    bool cutoff = false;
};

// Σ_i y_i X_i for one row.
inline double bath_coupling(const DegeneracySpectrum& spec, const EnsembleSpec& env, std::size_t row)
{
    double s = 0.0;
    const auto& r = spec.rows.at(row);
    for (std::size_t k = 0; k < spec.variable_names.size(); ++k) {
        auto it = env.y.find(spec.variable_names[k]);
        if (it == env.y.end()) {
            throw argument_error("environment lacks y for exchanged variable '" + spec.variable_names[k] + "'");
        }
        s += it->second * r.x[k];
    }
    return s;
}

inline ClassTable characteristic_class(const DegeneracySpectrum& spec, const EnsembleSpec& env,
                                       const SqueezeFamily& fam)
{
    spec.validate();
    ClassTable t;
    t.rows.reserve(spec.rows.size());
    std::vector<double> ln_rows;
    ln_rows.reserve(spec.rows.size());
    for (std::size_t r = 0; r < spec.rows.size(); ++r) {
        LogValue c = rearranged_class(fam, spec.rows[r].ln_g, bath_coupling(spec, env, r));
        t.rows.push_back(c);
        ln_rows.push_back(c.cutoff ? -std::numeric_limits<double>::infinity() : c.ln_x);
        if (!c.cutoff) ++t.surviving;
    }
    if (t.surviving == 0) throw degenerate_ensemble_error("every spectrum row is excluded by the cutoff");
    t.ln_total = log_sum_exp(ln_rows);
    return t;
}

// Φ = -ln h(g_{Xj ∪ yi}).
inline double characteristic_function(const ClassTable& table, const SqueezeFamily& fam)
{
    return -squeeze_log(fam, LogValue::of(table.ln_total)).ln_x;
}

inline double characteristic_function(const DegeneracySpectrum& spec, const EnsembleSpec& env,
                                      const SqueezeFamily& fam)
{
    return characteristic_function(characteristic_class(spec, env, fam), fam);
}

inline ProbabilityTable probabilities(const ClassTable& table, const DegeneracySpectrum& spec,
                                      const SqueezeFamily& /*fam*/)
{
    if (table.surviving == 0) throw degenerate_ensemble_error("probabilities: no surviving rows");
    if (table.rows.size() != spec.rows.size()) throw argument_error("class table does not match spectrum");
    ProbabilityTable p;
    const std::size_t n = table.rows.size();
    p.macro_probs.resize(n);
    p.config_probs.resize(n);
    p.ln_config_probs.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (table.rows[r].cutoff) {
            p.macro_probs[r] = 0.0;
            p.config_probs[r] = 0.0;
            p.ln_config_probs[r] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double ln_macro = table.rows[r].ln_x - table.ln_total;
        p.macro_probs[r] = std::exp(ln_macro);
        p.ln_config_probs[r] = ln_macro - spec.rows[r].ln_g;
        p.config_probs[r] = spec.rows[r].count ? p.macro_probs[r] / *spec.rows[r].count
                                               : std::exp(p.ln_config_probs[r]);
    }
    return p;
}

// B = g_{Xj ∪ yi ∪ Xi} / g_{Xj ∪ Xi}; e^{-Σ y X} for the identity family.
inline BoltzmannFactor generalized_boltzmann_factor(const DegeneracySpectrum& spec, const EnsembleSpec& env,
                                                    const SqueezeFamily& fam, std::size_t row)
{
    if (row >= spec.rows.size()) throw argument_error("row index out of range");
    const double ln_g = spec.rows[row].ln_g;
    LogValue c = rearranged_class(fam, ln_g, bath_coupling(spec, env, row));
    if (c.cutoff) return {0.0, -std::numeric_limits<double>::infinity(), true};
    const double ln_b = c.ln_x - ln_g;
    return {std::exp(ln_b), ln_b, false};
}

// Weights of the observed (q-)mean: w_row = ρ(G) / ρ(P_row G) with
// ρ = h'/h, G the characteristic class and P_row G the row's class. This is
// exactly the weight that makes Σ w_row X_row equal ∂Φ/∂y; it reduces to
// P_row for the identity family and to P_row^q for Tsallis.
inline std::vector<double> observation_weights(const ClassTable& table, const SqueezeFamily& fam)
{
    const double ln_ratio_total = squeeze_slope(fam, LogValue::of(table.ln_total)).ln_ratio;
    std::vector<double> w(table.rows.size(), 0.0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].cutoff) continue;
        w[r] = std::exp(ln_ratio_total - squeeze_slope(fam, table.rows[r]).ln_ratio);
        if (!std::isfinite(w[r])) throw domain_error("observation weight not finite in row " + std::to_string(r));
    }
    return w;
}

inline double observed_mean(const ClassTable& table, const SqueezeFamily& fam, std::span<const double> observable)
{
    if (observable.size() != table.rows.size()) throw argument_error("observable must have one value per row");
    const auto w = observation_weights(table, fam);
    double sum = 0.0;
    for (std::size_t r = 0; r < w.size(); ++r) {
        if (w[r] != 0.0) sum += w[r] * observable[r];
    }
    return sum;
}

inline double observed_mean(const DegeneracySpectrum& spec, const EnsembleSpec& env, const SqueezeFamily& fam,
                            std::span<const double> observable)
{
    return observed_mean(characteristic_class(spec, env, fam), fam, observable);
}

// Entropy from configuration probabilities, each row counting g_row equal
// configurations: -Σ p ln p (identity) or (Σ p^q - 1)/(1-q) (Tsallis). The
// Tsallis sum is evaluated as Σ_rows P (p^(q-1) - 1)/(1-q) through expm1.
inline double entropy_from_probabilities(const ProbabilityTable& probs, const DegeneracySpectrum& /*spec*/,
                                         const SqueezeFamily& fam)
{
    if (fam.kind() == SqueezeKind::custom) {
        throw argument_error("entropy_from_probabilities has no closed form for custom families");
    }
    double s = 0.0;
    const bool identity = fam.is_identity();
    const double q = fam.q();
    for (std::size_t r = 0; r < probs.macro_probs.size(); ++r) {
        const double P = probs.macro_probs[r];
        if (P == 0.0) continue;
        const double lp = probs.ln_config_probs[r];
        if (identity) {
            s -= P * lp;
        } else {
            s += P * std::expm1((q - 1.0) * lp) / (1.0 - q);
        }
    }
    return s;
}

// Θ = ln h(Σ H(h(g_{X_l}) e^{-y_l X_l})) for a spectrum over every extensive
// variable of the system.
inline double subdivision_entropy(const DegeneracySpectrum& open_spectrum, const EnsembleSpec& env,
                                  const SqueezeFamily& fam)
{
    return -characteristic_function(open_spectrum, env, fam);
}

// Φ, the two entropies and the observed X_i. J is the Legendre form
// Σ_i y_i X_i,obs - Φ, which equals ln h(Ω) when nothing is exchanged. Θ is
// available here only when the spectrum is already fully open (no fixed
// extensive variables in env.X); otherwise it needs a Φ surface over the
// fixed variables, see euler_residual.
inline ThermoPoint phi_and_entropies(const ClassTable& table, const DegeneracySpectrum& spec,
                                     const EnsembleSpec& env, const SqueezeFamily& fam)
{
    ThermoPoint pt;
    pt.phi = characteristic_function(table, fam);
    const auto w = observation_weights(table, fam);
    double legendre = 0.0;
    for (std::size_t k = 0; k < spec.variable_names.size(); ++k) {
        const auto& name = spec.variable_names[k];
        double mean = 0.0;
        for (std::size_t r = 0; r < w.size(); ++r) {
            if (w[r] != 0.0) mean += w[r] * spec.rows[r].x[k];
        }
        const double y = env.y.at(name);
        pt.observed[name] = mean;
        pt.variables.push_back({name, mean, y});
        legendre += y * mean;
    }
    for (const auto& [name, value] : env.X) {
        pt.variables.push_back({name, value, std::numeric_limits<double>::quiet_NaN()});
    }
    pt.entropy_J = legendre - pt.phi;
    pt.entropy_closed = squeeze_log(fam, LogValue::of(spec.ln_total())).ln_x;
    if (env.X.empty()) pt.entropy_theta = -pt.phi;
    return pt;
}

inline ThermoPoint phi_and_entropies(const DegeneracySpectrum& spec, const EnsembleSpec& env,
                                     const SqueezeFamily& fam)
{
    return phi_and_entropies(characteristic_class(spec, env, fam), spec, env, fam);
}

// Φ over the y of the exchanged variables, other environment values held.
inline PhiSurface phi_surface(DegeneracySpectrum spec, EnsembleSpec env, SqueezeFamily fam)
{
    PhiSurface s;
    s.phi = [spec = std::move(spec), env = std::move(env), fam = std::move(fam)](const Values& v) {
        EnsembleSpec e = env;
        for (const auto& [name, value] : v) e.y[name] = value;
        return characteristic_function(spec, e, fam);
    };
    return s;
}

}  // namespace sqstat

#endif  // SQSTAT_ENSEMBLE_HPP
