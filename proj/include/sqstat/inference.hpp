#ifndef SQSTAT_INFERENCE_HPP
#define SQSTAT_INFERENCE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"
#include "sqstat/squeeze.hpp"

namespace sqstat {

// Zeroth-law data: pairs (ln g, ratio) where ratio is the quotient of the
// ordinary (BG) Lagrange parameters of two systems in generalized thermal
// equilibrium. Along such a sweep d ln h / d ln g = ratio.
struct EquilibriumSample {
    double ln_g = 0.0;
    double ratio = 1.0;
};

struct EquilibriumDataset {
    std::vector<EquilibriumSample> samples;

    void validate(std::size_t min_samples = 2) const
    {
        if (samples.size() < min_samples) {
            throw argument_error("dataset needs at least " + std::to_string(min_samples) + " samples, got " +
                                 std::to_string(samples.size()));
        }
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const auto& s = samples[k];
            if (!std::isfinite(s.ln_g) || !std::isfinite(s.ratio)) {
                throw argument_error("sample " + std::to_string(k) + " is not finite");
            }
            if (!(s.ratio > 0.0)) throw argument_error("sample " + std::to_string(k) + ": ratio must be > 0");
            if (k > 0 && !(s.ln_g > samples[k - 1].ln_g)) {
                throw argument_error("ln_g must be strictly increasing (sample " + std::to_string(k) + ")");
            }
        }
    }
};

struct SqueezeTable {
    std::vector<double> ln_g;
    std::vector<double> ln_h;
};

// ln h(g) = ∫_0^{ln g} ratio d(ln g') by the trapezoid rule, anchored at
// ln h(1) = 0. A first sample away from ln g = 0 is joined to the anchor with
// its own ratio held constant.
inline SqueezeTable reconstruct_squeeze(const EquilibriumDataset& data)
{
    data.validate(2);
    SqueezeTable t;
    const auto& s = data.samples;
    t.ln_g.reserve(s.size());
    t.ln_h.reserve(s.size());
    double acc = s.front().ratio * s.front().ln_g;
    t.ln_g.push_back(s.front().ln_g);
    t.ln_h.push_back(acc);
    for (std::size_t k = 1; k < s.size(); ++k) {
        acc += 0.5 * (s[k].ratio + s[k - 1].ratio) * (s[k].ln_g - s[k - 1].ln_g);
        t.ln_g.push_back(s[k].ln_g);
        t.ln_h.push_back(acc);
    }
    return t;
}

struct QEstimate {
    double q = 1.0;
    // Root-mean-square deviation of ln ratio from the fitted line.
    double residual = 0.0;
    double intercept = 0.0;
    bool power_law = true;
};

inline constexpr double default_power_law_threshold = 1e-6;

// Least-squares fit ln ratio = a + s ln g, q = 1 - s.
inline QEstimate estimate_q(const EquilibriumDataset& data, double threshold = default_power_law_threshold)
{
    data.validate(3);
    const auto n = static_cast<double>(data.samples.size());
    double mx = 0.0, my = 0.0;
    for (const auto& s : data.samples) {
        mx += s.ln_g;
        my += std::log(s.ratio);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : data.samples) {
        const double dx = s.ln_g - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(s.ratio) - my);
    }
    if (!(sxx > 0.0)) throw argument_error("estimate_q: ln_g has zero variance");
    const double slope = sxy / sxx;
    QEstimate e;
    e.q = 1.0 - slope;
    e.intercept = my - slope * mx;
    double ss = 0.0;
    for (const auto& s : data.samples) {
        const double r = std::log(s.ratio) - (e.intercept + slope * s.ln_g);
        ss += r * r;
    }
    e.residual = std::sqrt(ss / n);
    e.power_law = e.residual <= threshold;
    return e;
}

// ratio = d ln h / d ln g of `fam` sampled on the ln g grid.
inline EquilibriumDataset synthetic_dataset(const SqueezeFamily& fam, std::span<const double> ln_g_grid)
{
    EquilibriumDataset d;
    d.samples.reserve(ln_g_grid.size());
    for (double x : ln_g_grid) d.samples.push_back({x, squeeze_slope(fam, LogValue::of(x)).elasticity});
    return d;
}

// Uniform grid of n points on [a, b].
inline std::vector<double> linear_grid(double a, double b, std::size_t n)
{
    if (n < 2) throw argument_error("grid needs at least 2 points");
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    g.back() = b;
    return g;
}

// Tabulated density f(β') of inverse temperatures.
struct DensityTable {
    std::vector<double> beta;
    std::vector<double> f;

    double trapezoid_norm() const
    {
        double s = 0.0;
        for (std::size_t k = 1; k < beta.size(); ++k) s += 0.5 * (f[k] + f[k - 1]) * (beta[k] - beta[k - 1]);
        return s;
    }

    void validate(double tolerance = 1e-6) const
    {
        if (beta.size() != f.size()) throw argument_error("density: beta and f differ in length");
        if (beta.size() < 2) throw argument_error("density needs at least 2 grid points");
        for (std::size_t k = 0; k < beta.size(); ++k) {
            if (!std::isfinite(beta[k]) || !std::isfinite(f[k])) throw argument_error("density is not finite");
            if (f[k] < 0.0) throw argument_error("density must be nonnegative");
            if (k > 0 && !(beta[k] > beta[k - 1])) throw argument_error("beta grid must be strictly increasing");
        }
        const double norm = trapezoid_norm();
        if (std::abs(norm - 1.0) > tolerance) {
            throw argument_error("density is not normalized: trapezoid integral = " + std::to_string(norm));
        }
    }
};

// B(E) = ∫ f(β') e^{-β' E} dβ' by the trapezoid rule, divided by the
// trapezoid norm of f so that B(0) = 1 exactly.
inline double superstatistics_forward(const DensityTable& density, double E)
{
    density.validate();
    if (!std::isfinite(E)) throw argument_error("superstatistics_forward: E must be finite");
    double s = 0.0;
    for (std::size_t k = 1; k < density.beta.size(); ++k) {
        const double a = density.f[k - 1] * std::exp(-density.beta[k - 1] * E);
        const double b = density.f[k] * std::exp(-density.beta[k] * E);
        s += 0.5 * (a + b) * (density.beta[k] - density.beta[k - 1]);
    }
    if (!std::isfinite(s)) throw domain_error("superstatistics_forward: integral overflow at E = " + std::to_string(E));
    return s / density.trapezoid_norm();
}

// Normalized Gaussian spike of width `width` centred on beta0, sampled on
// `n` points over ±8 widths and renormalized to unit trapezoid mass.
inline DensityTable spike_density(double beta0, double width, std::size_t n = 4001)
{
    if (!(width > 0.0)) throw argument_error("spike width must be > 0");
    DensityTable d;
    d.beta = linear_grid(beta0 - 8.0 * width, beta0 + 8.0 * width, n);
    d.f.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double z = (d.beta[k] - beta0) / width;
        d.f[k] = std::exp(-0.5 * z * z);
    }
    const double norm = d.trapezoid_norm();
    for (double& v : d.f) v /= norm;
    return d;
}

}  // namespace sqstat

#endif  // SQSTAT_INFERENCE_HPP
