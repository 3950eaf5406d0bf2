#ifndef SQSTAT_FLUCTUATION_HPP
#define SQSTAT_FLUCTUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sqstat/error.hpp"
#include "sqstat/squeeze.hpp"
#include "sqstat/thermo_state.hpp"

namespace sqstat {

// Hessian K of Φ with respect to the given environment variables. For
// intensive variables a stable state has K negative semidefinite (K = -Cov
// in the Boltzmann-Gibbs case); an indefinite K is reported, not thrown.
struct StabilityMatrix {
    std::vector<std::string> variables;
    Eigen::MatrixXd hessian;
    bool stable = true;
    std::string warning;
};

struct FluctuationReport {
    std::vector<std::string> variables;
    // G = ∂²Φ/∂α∂α over the extensive fluctuations, = (-K)^{-1}.
    Eigen::MatrixXd G;
    Eigen::MatrixXd G_inv;
    // <αα> = s G^{-1} and <λλ> = s G, s = tsallis_scale.
    Eigen::MatrixXd alpha_alpha;
    Eigen::MatrixXd lambda_lambda;
    std::map<std::string, double> variances;
    std::map<std::string, double> conjugate_variances;
    std::map<std::pair<std::string, std::string>, double> covariances;
    double tsallis_scale = 1.0;
    double condition_number = 1.0;
    // Variables whose conjugate variance is infinite (flat Φ direction).
    std::vector<std::string> flagged;
    std::vector<std::string> warnings;
};

namespace detail {

inline double step_for(const PhiSurface& s, const std::string& name, double x)
{
    return s.discrete.contains(name) ? 1.0 : second_derivative_step * std::max(1.0, std::abs(x));
}

inline double shifted(const PhiSurface& s, const Values& p, const std::string& a, double da, const std::string& b,
                      double db)
{
    Values v = p;
    v[a] += da;
    v[b] += db;
    return s.phi(v);
}

inline double second_partial(const PhiSurface& s, const Values& p, const std::string& a, const std::string& b)
{
    const double ha = step_for(s, a, value_of(p, a));
    const double hb = step_for(s, b, value_of(p, b));
    auto estimate = [&](double sa, double sb) {
        if (a == b) {
            return (shifted(s, p, a, sa, a, 0.0) - 2.0 * s.phi(p) + shifted(s, p, a, -sa, a, 0.0)) / (sa * sa);
        }
        return (shifted(s, p, a, sa, b, sb) - shifted(s, p, a, sa, b, -sb) - shifted(s, p, a, -sa, b, sb) +
                shifted(s, p, a, -sa, b, -sb)) /
               (4.0 * sa * sb);
    };
    const bool discrete = s.discrete.contains(a) || s.discrete.contains(b);
    if (discrete) return estimate(ha, hb);
    // two Richardson passes over h, h/2, h/4
    const double d0 = estimate(ha, hb), d1 = estimate(ha / 2.0, hb / 2.0), d2 = estimate(ha / 4.0, hb / 4.0);
    const double r0 = (4.0 * d1 - d0) / 3.0, r1 = (4.0 * d2 - d1) / 3.0;
    return (16.0 * r1 - r0) / 15.0;
}

}  // namespace detail

inline StabilityMatrix stability_matrix(const PhiSurface& surface, const Values& point,
                                        std::vector<std::string> variables)
{
    const auto n = static_cast<Eigen::Index>(variables.size());
    if (n == 0) throw argument_error("stability_matrix needs at least one variable");
    StabilityMatrix out;
    out.hessian.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            double v = 0.0;
            try {
                v = detail::second_partial(surface, point, variables[i], variables[j]);
            } catch (const error& e) {
                throw domain_error("stability_matrix at (" + variables[i] + ", " + variables[j] + "): " + e.what());
            }
            out.hessian(i, j) = v;
            out.hessian(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.hessian, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().maxCoeff() > 1e-8 * scale) {
        out.stable = false;
        out.warning = "Hessian of Φ is not negative semidefinite in the intensive variables";
    }
    out.variables = std::move(variables);
    return out;
}

// Second moments from the stability matrix. `phi0` is Φ of the ensemble in
// which the fluctuating variables are exchanged; `theta`, when known, feeds
// the small-system warning.
inline FluctuationReport moments(const StabilityMatrix& stab, double phi0, const SqueezeFamily& fam,
                                 std::optional<double> theta = std::nullopt)
{
    const auto n = stab.hessian.rows();
    FluctuationReport r;
    r.variables = stab.variables;
    if (fam.is_identity()) {
        r.tsallis_scale = 1.0;
    } else if (fam.kind() == SqueezeKind::tsallis) {
        r.tsallis_scale = 1.0 + (fam.q() - 1.0) * phi0;
    } else {
        r.tsallis_scale = 1.0;
        r.warnings.push_back("custom family: second moments are not rescaled");
    }
    if (!stab.stable) r.warnings.push_back(stab.warning);
    if (theta && std::abs(*theta) > 1e-6 * std::max(1.0, std::abs(phi0))) {
        r.warnings.push_back("subdivision entropy is non-negligible; Gaussian fluctuation formulas assume a "
                             "macroscopic system");
    }

    const Eigen::MatrixXd cov = -stab.hessian;
    r.G_inv = cov;
    r.alpha_alpha = r.tsallis_scale * cov;

    // Split off flat directions: rows of K that vanish have no restoring
    // force and an infinite conjugate variance.
    const double norm = std::max(1.0, cov.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> live;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cov.row(i).cwiseAbs().maxCoeff() > 1e-12 * norm) {
            live.push_back(i);
        } else {
            r.flagged.push_back(stab.variables[static_cast<std::size_t>(i)]);
        }
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    r.G = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::find(live.begin(), live.end(), i) == live.end()) r.G(i, i) = inf;
    }
    if (!live.empty()) {
        const auto m = static_cast<Eigen::Index>(live.size());
        Eigen::MatrixXd sub(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = cov(live[a], live[b]);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
        const auto& sv = svd.singularValues();
        r.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : inf;
        // The finite-difference Hessian carries relative noise near 1e-10, so
        // anything worse conditioned than this is treated as rank deficient.
        if (r.condition_number > 1e8) {
            r.warnings.push_back("covariance matrix is numerically singular");
            for (Eigen::Index a = 0; a < m; ++a) {
                r.G(live[a], live[a]) = inf;
                r.flagged.push_back(stab.variables[static_cast<std::size_t>(live[a])]);
            }
        } else {
            const Eigen::MatrixXd inv = sub.partialPivLu().inverse();
            for (Eigen::Index a = 0; a < m; ++a) {
                for (Eigen::Index b = 0; b < m; ++b) r.G(live[a], live[b]) = 0.5 * (inv(a, b) + inv(b, a));
            }
        }
    }
    r.lambda_lambda = r.tsallis_scale * r.G;

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& name = stab.variables[static_cast<std::size_t>(i)];
        r.variances[name] = r.tsallis_scale * cov(i, i);
        r.conjugate_variances[name] = cov(i, i) > 0.0 ? r.tsallis_scale / cov(i, i) : inf;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            r.covariances[{name, stab.variables[static_cast<std::size_t>(j)]}] = r.tsallis_scale * cov(i, j);
        }
    }
    return r;
}

// Unnormalized Gaussian log-density -½ αᵀ (G / s) α.
inline double einstein_log_probability(std::span<const double> alpha, const Eigen::MatrixXd& G,
                                       double tsallis_scale = 1.0)
{
    const auto n = static_cast<Eigen::Index>(alpha.size());
    if (G.rows() != n || G.cols() != n) throw argument_error("einstein_log_probability: dimension mismatch");
    const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), n);
    return -0.5 * a.dot(G * a) / tsallis_scale;
}

}  // namespace sqstat

#endif  // SQSTAT_FLUCTUATION_HPP
