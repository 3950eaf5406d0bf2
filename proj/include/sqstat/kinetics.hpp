#ifndef SQSTAT_KINETICS_HPP
#define SQSTAT_KINETICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sqstat/error.hpp"
#include "sqstat/squeeze.hpp"

namespace sqstat {

// Spatially homogeneous generalized Boltzmann equation on a 2-D integer
// velocity lattice. A collision (i, j) -> (k, l) contributes
//     b = T ξ(F_k, F_i) ξ(F_l, F_j) [h(F_k) h(F_l) - h(F_i) h(F_j)]
// with dF_i += b, dF_j += b, dF_k -= b, dF_l -= b. The network holds every
// collision together with its reverse.

struct Velocity {
    int x = 0;
    int y = 0;

    int speed2() const noexcept { return x * x + y * y; }
    auto operator<=>(const Velocity&) const = default;
};

struct VelocityLattice {
    int radius = 0;
    std::vector<Velocity> velocities;

    // All integer v with |v|^2 <= R^2, ordered by (x, y).
    static VelocityLattice disk(int radius)
    {
        if (radius < 0) throw argument_error("lattice radius must be >= 0");
        VelocityLattice lat;
        lat.radius = radius;
        for (int x = -radius; x <= radius; ++x) {
            for (int y = -radius; y <= radius; ++y) {
                if (x * x + y * y <= radius * radius) lat.velocities.push_back({x, y});
            }
        }
        return lat;
    }

    std::size_t size() const noexcept { return velocities.size(); }

    std::size_t index_of(Velocity v) const
    {
        auto it = std::lower_bound(velocities.begin(), velocities.end(), v);
        if (it == velocities.end() || *it != v) throw argument_error("velocity not on lattice");
        return static_cast<std::size_t>(it - velocities.begin());
    }
};

struct Collision {
    std::array<std::size_t, 4> idx{};  // i, j incoming; k, l outgoing
    double kernel = 1.0;
};

struct CollisionNetwork {
    std::vector<Collision> quadruples;

    double max_kernel() const
    {
        double m = 0.0;
        for (const auto& c : quadruples) m = std::max(m, c.kernel);
        return m;
    }

    // Largest number of collision slots any one velocity takes part in.
    std::size_t max_degree(std::size_t lattice_size) const
    {
        std::vector<std::size_t> deg(lattice_size, 0);
        for (const auto& c : quadruples) {
            for (auto i : c.idx) ++deg[i];
        }
        return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    }
};

struct KineticState {
    std::vector<double> F;
    double t = 0.0;
};

// ξ: an arbitrary symmetric, nonnegative function of two densities.
using SymmetricHook = std::function<double(double, double)>;

inline double xi_one(double, double) { return 1.0; }
inline double xi_soft(double a, double b) { return 1.0 / (1.0 + a * b); }

// Every (i <= j) -> (k <= l) with {k, l} != {i, j} conserving momentum and
// kinetic energy, in lexicographic order of (i, j, k, l).
inline CollisionNetwork build_collision_network(const VelocityLattice& lattice, double kernel = 1.0)
{
    if (lattice.velocities.empty()) throw argument_error("empty velocity lattice");
    if (!(kernel > 0.0)) throw argument_error("collision kernel must be > 0");
    const auto& v = lattice.velocities;
    const std::size_t n = v.size();

    // Group outgoing pairs by (momentum, energy).
    std::map<std::array<int, 3>, std::vector<std::pair<std::size_t, std::size_t>>> by_invariants;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k; l < n; ++l) {
            by_invariants[{v[k].x + v[l].x, v[k].y + v[l].y, v[k].speed2() + v[l].speed2()}].push_back({k, l});
        }
    }
    CollisionNetwork net;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto& partners = by_invariants[{v[i].x + v[j].x, v[i].y + v[j].y, v[i].speed2() + v[j].speed2()}];
            for (auto [k, l] : partners) {
                if (k == i && l == j) continue;
                net.quadruples.push_back({{i, j, k, l}, kernel});
            }
        }
    }
    return net;
}

namespace detail {

inline void require_nonnegative(std::span<const double> F)
{
    for (std::size_t i = 0; i < F.size(); ++i) {
        if (!(F[i] >= 0.0) || !std::isfinite(F[i])) {
            throw domain_error("density F[" + std::to_string(i) + "] must be finite and >= 0");
        }
    }
}

}  // namespace detail

inline std::vector<double> collision_rhs(std::span<const double> F, const CollisionNetwork& net,
                                         const SqueezeFamily& fam, const SymmetricHook& xi = xi_one)
{
    detail::require_nonnegative(F);
    std::vector<double> h(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) h[i] = squeeze_value(fam, F[i]);
    std::vector<double> rate(F.size(), 0.0);
    for (const auto& c : net.quadruples) {
        const auto [i, j, k, l] = c.idx;
        const double b = c.kernel * xi(F[k], F[i]) * xi(F[l], F[j]) * (h[k] * h[l] - h[i] * h[j]);
        rate[i] += b;
        rate[j] += b;
        rate[k] -= b;
        rate[l] -= b;
    }
    return rate;
}

inline std::vector<double> collision_rhs(const KineticState& state, const CollisionNetwork& net,
                                         const SqueezeFamily& fam, const SymmetricHook& xi = xi_one)
{
    return collision_rhs(state.F, net, fam, xi);
}

// dt <= 0.1 / (max T · max h(F) · max degree).
inline double stable_dt_bound(const KineticState& state, const CollisionNetwork& net, const SqueezeFamily& fam)
{
    double hmax = 0.0;
    for (double f : state.F) hmax = std::max(hmax, squeeze_value(fam, f));
    const double denom = net.max_kernel() * hmax * static_cast<double>(net.max_degree(state.F.size()));
    return denom > 0.0 ? 0.1 / denom : std::numeric_limits<double>::infinity();
}

// One classical RK4 step. Negative components with |F| < 1e-14 are clamped
// to zero; larger negativity or NaN means dt is too large.
inline KineticState step(const KineticState& state, const CollisionNetwork& net, const SqueezeFamily& fam,
                         double dt, const SymmetricHook& xi = xi_one)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw argument_error("step: dt must be > 0");
    const std::size_t n = state.F.size();
    auto advance = [&](const std::vector<double>& base, const std::vector<double>& k, double a) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, base[i] + a * k[i]);
        return out;
    };
    try {
        const auto k1 = collision_rhs(state.F, net, fam, xi);
        const auto k2 = collision_rhs(advance(state.F, k1, dt / 2.0), net, fam, xi);
        const auto k3 = collision_rhs(advance(state.F, k2, dt / 2.0), net, fam, xi);
        const auto k4 = collision_rhs(advance(state.F, k3, dt), net, fam, xi);
        KineticState next{std::vector<double>(n), state.t + dt};
        for (std::size_t i = 0; i < n; ++i) {
            const double v = state.F[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (std::isnan(v) || v < -1e-14) {
                throw domain_error("step with dt = " + std::to_string(dt) + " made F[" + std::to_string(i) +
                                   "] negative or NaN; reduce dt");
            }
            next.F[i] = std::max(0.0, v);
        }
        return next;
    } catch (const domain_error& e) {
        const std::string what = e.what();
        if (what.find("dt = ") != std::string::npos) throw;
        throw domain_error("step with dt = " + std::to_string(dt) + " failed: " + what);
    }
}

// Antiderivative A(F) of ln h with A(reference) = 0, where the reference is
// 0 when ∫_0 ln h converges and 1 otherwise (Tsallis q >= 2).
inline double log_squeeze_integral(const SqueezeFamily& fam, double F)
{
    if (!(F >= 0.0)) throw domain_error("log_squeeze_integral: F must be >= 0");
    if (fam.is_identity()) return F > 0.0 ? F * std::log(F) - F : 0.0;
    if (fam.kind() == SqueezeKind::tsallis && fam.q() != 2.0) {
        const double q = fam.q();
        if (q < 2.0) {
            if (F == 0.0) return 0.0;
            return (std::pow(F, 2.0 - q) / (2.0 - q) - F) / (1.0 - q);
        }
        if (F == 0.0) return std::numeric_limits<double>::infinity();
        return ((std::pow(F, 2.0 - q) - 1.0) / (2.0 - q) - (F - 1.0)) / (1.0 - q);
    }
    // Quadrature fallback: Tsallis q = 2 and custom families.
    const bool from_one = fam.kind() == SqueezeKind::tsallis;
    auto ln_h = [&](double x) { return squeeze_log(fam, LogValue::of(std::log(x))).ln_x; };
    boost::math::quadrature::tanh_sinh<double> integrator;
    if (!from_one) {
        if (F == 0.0) return 0.0;
        return integrator.integrate(ln_h, 0.0, F);
    }
    if (F == 0.0) return std::numeric_limits<double>::infinity();
    if (F == 1.0) return 0.0;
    return F > 1.0 ? integrator.integrate(ln_h, 1.0, F) : -integrator.integrate(ln_h, F, 1.0);
}

// S = -Σ_i ∫ ln h(F) dF over the populations.
inline double entropy_functional(const KineticState& state, const SqueezeFamily& fam)
{
    detail::require_nonnegative(state.F);
    double s = 0.0;
    for (double f : state.F) s -= log_squeeze_integral(fam, f);
    return s;
}

struct KineticInvariants {
    double mass = 0.0;
    double momentum_x = 0.0;
    double momentum_y = 0.0;
    double energy = 0.0;
};

inline KineticInvariants invariants(const KineticState& state, const VelocityLattice& lattice)
{
    KineticInvariants inv;
    for (std::size_t i = 0; i < state.F.size(); ++i) {
        const auto& v = lattice.velocities[i];
        inv.mass += state.F[i];
        inv.momentum_x += state.F[i] * v.x;
        inv.momentum_y += state.F[i] * v.y;
        inv.energy += state.F[i] * v.speed2();
    }
    return inv;
}

// max over collisions of |h_k h_l - h_i h_j|, relative to h_i h_j.
inline double detailed_balance_residual(const KineticState& state, const CollisionNetwork& net,
                                        const SqueezeFamily& fam)
{
    double worst = 0.0;
    for (const auto& c : net.quadruples) {
        const auto [i, j, k, l] = c.idx;
        const double in = squeeze_value(fam, state.F[i]) * squeeze_value(fam, state.F[j]);
        const double out = squeeze_value(fam, state.F[k]) * squeeze_value(fam, state.F[l]);
        worst = std::max(worst, std::abs(out - in) / std::max(in, std::numeric_limits<double>::min()));
    }
    return worst;
}

inline double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace sqstat

#endif  // SQSTAT_KINETICS_HPP
