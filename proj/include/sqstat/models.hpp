#ifndef SQSTAT_MODELS_HPP
#define SQSTAT_MODELS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqstat/ensemble.hpp"
#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"
#include "sqstat/spectrum.hpp"

namespace sqstat {

// Built-in fixture spectra. Degeneracies come from log-gamma, so no
// factorial ever overflows; rows also carry the exact integer count while it
// stays below 2^53.
//
// Truncation: einstein_solid keeps m <= E_max, dropping a tail whose weight
// at inverse temperature β is of order C(E_max+N, E_max+1) e^{-β(E_max+1)}.
// lattice_gas with N_max < sites drops the occupations above N_max.

struct ModelDescriptor {
    std::string name;
    std::map<std::string, double> parameters;
    std::vector<std::string> variables;
};

namespace detail {

// C(n, k) exactly when it is below 2^53.
inline std::optional<double> exact_binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n) return std::nullopt;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    constexpr unsigned __int128 limit = static_cast<unsigned __int128>(1) << 53;
    for (std::int64_t i = 1; i <= k; ++i) {
        c = c * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (c >= limit) return std::nullopt;
    }
    return static_cast<double>(c);
}

inline SpectrumRow binomial_row(std::vector<double> x, std::int64_t n, std::int64_t k)
{
    SpectrumRow row;
    row.x = std::move(x);
    row.count = exact_binomial(n, k);
    row.ln_g = row.count ? std::log(*row.count)
                         : log_binomial(static_cast<double>(n), static_cast<double>(k));
    return row;
}

inline std::int64_t integer_parameter(const std::string& model, const std::string& name, double v, double min)
{
    if (!std::isfinite(v) || v != std::floor(v)) throw model_error(model + ": " + name + " must be an integer");
    if (v < min) throw model_error(model + ": " + name + " must be >= " + std::to_string(static_cast<long long>(min)));
    return static_cast<std::int64_t>(v);
}

}  // namespace detail

// Rows (E = 0) and (E = epsilon), both non-degenerate.
inline DegeneracySpectrum two_level(double epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw model_error("two_level: epsilon must be > 0");
    return DegeneracySpectrum{{"E"}, {SpectrumRow{{0.0}, 0.0, 1.0}, SpectrumRow{{epsilon}, 0.0, 1.0}}};
}

// N spins 1/2: magnetization M = 2k - N with g = C(N, k).
inline DegeneracySpectrum spin_half_paramagnet(double N)
{
    const auto n = detail::integer_parameter("spin_half_paramagnet", "N", N, 1);
    DegeneracySpectrum s{{"M"}, {}};
    s.rows.reserve(static_cast<std::size_t>(n) + 1);
    for (std::int64_t k = 0; k <= n; ++k) {
        s.rows.push_back(detail::binomial_row({static_cast<double>(2 * k - n)}, n, k));
    }
    return s;
}

// N oscillators sharing m quanta: g = C(m + N - 1, m), m = 0..E_max.
inline DegeneracySpectrum einstein_solid(double N, double E_max)
{
    const auto n = detail::integer_parameter("einstein_solid", "N", N, 1);
    const auto emax = detail::integer_parameter("einstein_solid", "E_max", E_max, 0);
    DegeneracySpectrum s{{"E"}, {}};
    s.rows.reserve(static_cast<std::size_t>(emax) + 1);
    for (std::int64_t m = 0; m <= emax; ++m) {
        s.rows.push_back(detail::binomial_row({static_cast<double>(m)}, m + n - 1, m));
    }
    return s;
}

// Ideal lattice gas: N particles on `sites` sites, g = C(sites, N). Each
// particle carries energy epsilon (0 for the ideal gas, where E is
// identically zero and only ν drives the distribution).
inline DegeneracySpectrum lattice_gas(double sites, double N_max, double epsilon = 0.0)
{
    const auto m = detail::integer_parameter("lattice_gas", "sites", sites, 0);
    const auto nmax = detail::integer_parameter("lattice_gas", "N_max", N_max, 0);
    if (nmax > m) throw model_error("lattice_gas: N_max must not exceed sites");
    if (!std::isfinite(epsilon)) throw model_error("lattice_gas: epsilon must be finite");
    DegeneracySpectrum s{{"E", "N"}, {}};
    s.rows.reserve(static_cast<std::size_t>(nmax) + 1);
    for (std::int64_t n = 0; n <= nmax; ++n) {
        s.rows.push_back(detail::binomial_row({epsilon * static_cast<double>(n), static_cast<double>(n)}, m, n));
    }
    return s;
}

inline const std::vector<std::string>& model_names()
{
    static const std::vector<std::string> names{"two_level", "spin_half_paramagnet", "einstein_solid",
                                                "lattice_gas"};
    return names;
}

// Fills defaults and the produced variable names; rejects unknown models and
// parameters.
inline ModelDescriptor describe_model(const std::string& name, std::map<std::string, double> params)
{
    auto take = [&](const std::string& key, std::optional<double> fallback) {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        if (!fallback) throw model_error(name + ": missing parameter '" + key + "'");
        return *fallback;
    };
    auto only = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : params) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) throw model_error(name + ": unknown parameter '" + k + "'");
        }
    };
    ModelDescriptor d{name, {}, {}};
    if (name == "two_level") {
        only({"epsilon"});
        d.parameters["epsilon"] = take("epsilon", 1.0);
        d.variables = {"E"};
    } else if (name == "spin_half_paramagnet") {
        only({"N"});
        d.parameters["N"] = take("N", std::nullopt);
        d.variables = {"M"};
    } else if (name == "einstein_solid") {
        only({"N", "E_max"});
        d.parameters["N"] = take("N", std::nullopt);
        d.parameters["E_max"] = take("E_max", std::nullopt);
        d.variables = {"E"};
    } else if (name == "lattice_gas") {
        only({"sites", "N_max", "epsilon"});
        d.parameters["sites"] = take("sites", std::nullopt);
        d.parameters["N_max"] = take("N_max", d.parameters["sites"]);
        d.parameters["epsilon"] = take("epsilon", 0.0);
        d.variables = {"E", "N"};
    } else {
        throw model_error("unknown model '" + name + "'");
    }
    return d;
}

inline DegeneracySpectrum build_spectrum(const ModelDescriptor& d)
{
    const auto& p = d.parameters;
    if (d.name == "two_level") return two_level(p.at("epsilon"));
    if (d.name == "spin_half_paramagnet") return spin_half_paramagnet(p.at("N"));
    if (d.name == "einstein_solid") return einstein_solid(p.at("N"), p.at("E_max"));
    if (d.name == "lattice_gas") return lattice_gas(p.at("sites"), p.at("N_max"), p.at("epsilon"));
    throw model_error("unknown model '" + d.name + "'");
}

// The model's system-size parameter, which plays the fixed extensive
// variable X_j (particle number or volume). two_level has none.
inline std::optional<std::string> size_parameter(const ModelDescriptor& d)
{
    if (d.name == "spin_half_paramagnet" || d.name == "einstein_solid") return "N";
    if (d.name == "lattice_gas") return "sites";
    return std::nullopt;
}

// The descriptor with its size parameter set to `size`. A lattice gas
// whose occupation was untruncated stays untruncated.
inline ModelDescriptor resized(const ModelDescriptor& d, double size)
{
    auto key = size_parameter(d);
    if (!key) throw model_error(d.name + " has no size parameter");
    ModelDescriptor out = d;
    if (d.name == "lattice_gas" && d.parameters.at("N_max") == d.parameters.at("sites")) {
        out.parameters["N_max"] = size;
    }
    out.parameters[*key] = size;
    return out;
}

// Φ over the y of the exchanged variables and, when the model has one, its
// integer size parameter.
inline PhiSurface model_phi_surface(const ModelDescriptor& d, EnsembleSpec env, SqueezeFamily fam)
{
    PhiSurface s;
    auto key = size_parameter(d);
    if (key) s.discrete.insert(*key);
    s.phi = [d, key, env = std::move(env), fam = std::move(fam)](const Values& v) {
        EnsembleSpec e = env;
        ModelDescriptor desc = d;
        for (const auto& [name, value] : v) {
            if (key && name == *key) {
                desc = resized(d, value);
            } else {
                e.y[name] = value;
            }
        }
        return characteristic_function(build_spectrum(desc), e, fam);
    };
    return s;
}

// Full thermodynamic point of a built-in model. When the model has a size
// parameter, its conjugate y_j,obs = -∂Φ/∂X_j comes from a unit-step central
// difference and Θ from -Φ - y_j,obs X_j.
inline ThermoPoint model_point(const ModelDescriptor& d, EnsembleSpec env, const SqueezeFamily& fam)
{
    const auto spectrum = build_spectrum(d);
    auto key = size_parameter(d);
    if (key) env.X[*key] = d.parameters.at(*key);
    ThermoPoint pt = phi_and_entropies(spectrum, env, fam);
    if (!key) return pt;

    auto surface = model_phi_surface(d, env, fam);
    Values at;
    for (const auto& name : spectrum.variable_names) at[name] = env.y.at(name);
    at[*key] = d.parameters.at(*key);
    EnvironmentSplit split{{*key}, spectrum.variable_names};
    const auto conj = conjugates_from_phi(surface, EnvironmentSplit{{*key}, {}}, at);
    const double y_obs = conj.at(*key);
    pt.observed[*key] = y_obs;
    for (auto& v : pt.variables) {
        if (v.name == *key) v.intensive_value = y_obs;
    }
    pt.entropy_theta = euler_residual(pt, split);
    return pt;
}

}  // namespace sqstat

#endif  // SQSTAT_MODELS_HPP
