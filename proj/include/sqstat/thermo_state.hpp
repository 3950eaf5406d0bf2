#ifndef SQSTAT_THERMO_STATE_HPP
#define SQSTAT_THERMO_STATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sqstat/error.hpp"

namespace sqstat {

// An extensive variable X_l and its conjugate y_l (the intensive variable
// divided by kT). NaN marks a side that has not been evaluated.
struct VariablePair {
    std::string name;
    double extensive_value = std::numeric_limits<double>::quiet_NaN();
    double intensive_value = std::numeric_limits<double>::quiet_NaN();
};

// Which variables the environment holds fixed: extensive X_j, or intensive
// y_i. The complements (y_j, X_i) are the observed, fluctuating ones.
struct EnvironmentSplit {
    std::vector<std::string> fixed_extensive;
    std::vector<std::string> fixed_intensive;

    bool isolated() const noexcept { return fixed_intensive.empty(); }

    void validate(std::span<const std::string> declared) const
    {
        std::set<std::string> seen;
        for (const auto* list : {&fixed_extensive, &fixed_intensive}) {
            for (const auto& n : *list) {
                if (!seen.insert(n).second) throw argument_error("variable '" + n + "' listed twice in split");
                if (std::find(declared.begin(), declared.end(), n) == declared.end()) {
                    throw argument_error("split names undeclared variable '" + n + "'");
                }
            }
        }
        if (seen.size() != declared.size()) throw argument_error("split does not cover every declared variable");
    }
};

struct ThermoPoint {
    double phi = 0.0;
    double entropy_J = 0.0;
    // Hill subdivision entropy; empty when it cannot be evaluated.
    std::optional<double> entropy_theta;
    // ln h(g_{X_j}): the entropy of the system closed at its fixed X_j.
    double entropy_closed = 0.0;
    // Observed non-environment values: X_i,obs and y_j,obs.
    std::map<std::string, double> observed;
    std::vector<VariablePair> variables;

    const VariablePair& variable(const std::string& name) const
    {
        for (const auto& v : variables) {
            if (v.name == name) return v;
        }
        throw argument_error("thermo point has no variable '" + name + "'");
    }
};

using Values = std::map<std::string, double>;

// Φ as a function of the environment variables. Variables listed in
// `discrete` only take integer values (system sizes) and are differenced
// with unit steps.
struct PhiSurface {
    std::function<double(const Values&)> phi;
    std::set<std::string> discrete;
};

// Step rules. First derivatives: h = 1e-5 max(1, |v|) plus one Richardson
// pass. Second derivatives start from a wider step, h = 1e-2 max(1, |v|),
// and take two Richardson passes to keep the rounding term eps |Φ| / h^2
// small.
inline constexpr double first_derivative_step = 1e-5;
inline constexpr double second_derivative_step = 1e-2;

namespace detail {

inline double eval_at(const PhiSurface& s, Values v, const std::string& name, double value)
{
    v[name] = value;
    return s.phi(v);
}

inline double value_of(const Values& point, const std::string& name)
{
    auto it = point.find(name);
    if (it == point.end()) throw argument_error("point has no value for '" + name + "'");
    return it->second;
}

}  // namespace detail

// ∂Φ/∂name at point.
inline double partial_derivative(const PhiSurface& s, const Values& point, const std::string& name)
{
    const double x = detail::value_of(point, name);
    try {
        if (s.discrete.contains(name)) {
            return (detail::eval_at(s, point, name, x + 1.0) - detail::eval_at(s, point, name, x - 1.0)) / 2.0;
        }
        const double h = first_derivative_step * std::max(1.0, std::abs(x));
        auto central = [&](double step) {
            return (detail::eval_at(s, point, name, x + step) - detail::eval_at(s, point, name, x - step)) /
                   (2.0 * step);
        };
        const double coarse = central(h);
        const double fine = central(h / 2.0);
        return (4.0 * fine - coarse) / 3.0;
    } catch (const domain_error& e) {
        throw domain_error("derivative with respect to '" + name + "': " + e.what());
    } catch (const model_error& e) {
        throw model_error("derivative with respect to '" + name + "': " + e.what());
    } catch (const error& e) {
        throw argument_error("derivative with respect to '" + name + "': " + e.what());
    }
}

// y_k = -∂Φ/∂X_k for fixed extensive variables, X_s = ∂Φ/∂y_s for fixed
// intensive ones.
inline std::map<std::string, double> conjugates_from_phi(const PhiSurface& s, const EnvironmentSplit& split,
                                                         const Values& point)
{
    std::map<std::string, double> out;
    for (const auto& n : split.fixed_extensive) out[n] = -partial_derivative(s, point, n);
    for (const auto& n : split.fixed_intensive) out[n] = partial_derivative(s, point, n);
    return out;
}

// Θ = -Φ - Σ_j y_j,obs X_j. Zero for a first-order homogeneous Φ.
inline double euler_residual(const ThermoPoint& point, const EnvironmentSplit& split)
{
    double sum = 0.0;
    for (const auto& n : split.fixed_extensive) {
        const auto& v = point.variable(n);
        if (std::isnan(v.intensive_value) || std::isnan(v.extensive_value)) {
            throw argument_error("euler_residual: '" + n + "' is not fully evaluated");
        }
        sum += v.intensive_value * v.extensive_value;
    }
    return -point.phi - sum;
}

// Trapezoid integral of dΘ + Σ_l X_l dy_l along the trajectory. Every point
// must carry Θ and both sides of every variable pair.
inline double gibbs_duhem_residual(std::span<const ThermoPoint> trajectory)
{
    if (trajectory.size() < 3) throw argument_error("gibbs_duhem_residual needs at least 3 points");
    for (const auto& p : trajectory) {
        if (!p.entropy_theta) throw argument_error("gibbs_duhem_residual: point without subdivision entropy");
    }
    const auto& first = trajectory.front();
    double residual = *trajectory.back().entropy_theta - *first.entropy_theta;
    for (const auto& var : first.variables) {
        double integral = 0.0;
        for (std::size_t k = 1; k < trajectory.size(); ++k) {
            const auto& a = trajectory[k - 1].variable(var.name);
            const auto& b = trajectory[k].variable(var.name);
            if (std::isnan(a.extensive_value) || std::isnan(b.extensive_value) || std::isnan(a.intensive_value) ||
                std::isnan(b.intensive_value)) {
                throw argument_error("gibbs_duhem_residual: '" + var.name + "' is not fully evaluated");
            }
            integral += 0.5 * (a.extensive_value + b.extensive_value) * (b.intensive_value - a.intensive_value);
        }
        residual += integral;
    }
    return residual;
}

}  // namespace sqstat

#endif  // SQSTAT_THERMO_STATE_HPP
