// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqstat/sqstat.hpp"

using namespace sqstat;

namespace {

using clock_type = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

SqueezeFamily family(double q) { return q == 1.0 ? SqueezeFamily::identity() : SqueezeFamily::tsallis(q); }

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
    return out;
}

// ---- 1 ------------------------------------------------------------------

Outcome bg_two_level()
{
    const auto t0 = clock_type::now();
    const auto spec = two_level(1.0);
    const double beta = std::log(2.0);
    const EnsembleSpec env{{{"E", beta}}, {}};
    const auto fam = SqueezeFamily::identity();
    const auto table = characteristic_class(spec, env, fam);
    const double phi = characteristic_function(table, fam);
    const double Z = std::exp(table.ln_total);
    const double mean = observed_mean(table, fam, spec.column("E"));
    std::vector<double> sq;
    for (double e : spec.column("E")) sq.push_back((e - mean) * (e - mean));
    const double var = observed_mean(table, fam, sq);
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();

    // direct summation
    const double z_ref = 1.0 + std::exp(-beta);
    const double e_ref = std::exp(-beta) / z_ref;
    const double v_ref = e_ref - e_ref * e_ref;
    const double err = std::max({std::abs(Z - z_ref), std::abs(phi + std::log(z_ref)), std::abs(mean - e_ref),
                                 std::abs(var - v_ref)});
    return {err < 1e-10 && secs < 1.0, fmt("max error %.2e, %.3f s", err, secs)};
}

// ---- 2 ------------------------------------------------------------------

Outcome microcanonical_uniformity()
{
    const auto fam = SqueezeFamily::identity();
    const auto whole = isolated(spin_half_paramagnet(10));
    const auto p = probabilities(characteristic_class(whole, EnsembleSpec{}, fam), whole, fam);
    bool ok = p.config_probs.size() == 1 && p.config_probs[0] == 1.0 / 1024.0;
    // every magnetization shell on its own
    for (int M = -10; M <= 10; M += 2) {
        const auto shell = restrict_to(spin_half_paramagnet(10), "M", M);
        const auto ps = probabilities(characteristic_class(shell, EnsembleSpec{}, fam), shell, fam);
        ok = ok && ps.config_probs[0] == 1.0 / *shell.rows[0].count;
    }
    return {ok, "p = 1/Omega for the full system and all 11 shells"};
}

// ---- 3 ------------------------------------------------------------------

Outcome derivative_average_duality()
{
    struct Fixture {
        std::string name;
        DegeneracySpectrum spec;
        Values y;
    };
    const std::vector<Fixture> fixtures{
        {"two_level", two_level(1.0), {{"E", std::log(2.0)}}},
        {"spin_half_paramagnet", spin_half_paramagnet(10), {{"M", 0.3}}},
        {"einstein_solid", einstein_solid(3, 60), {{"E", 0.7}}},
        {"lattice_gas", lattice_gas(20, 20), {{"E", 1.0}, {"N", -0.3}}},
        {"lattice_gas_eps", lattice_gas(20, 20, 0.5), {{"E", 1.0}, {"N", -0.3}}},
    };
    const auto t0 = clock_type::now();
    double worst = 0.0;
    std::string where;
    int checks = 0;
    for (const auto& f : fixtures) {
        for (double q : {1.0, 0.5, 1.5, 2.0}) {
            const auto fam = family(q);
            const EnsembleSpec env{f.y, {}};
            const auto surf = phi_surface(f.spec, env, fam);
            for (const auto& [name, value] : f.y) {
                const double d = partial_derivative(surf, f.y, name);
                const double m = observed_mean(f.spec, env, fam, f.spec.column(name));
                const double e = std::abs(d - m);
                ++checks;
                if (e > worst) {
                    worst = e;
                    where = f.name + " q=" + fmt("%g", q) + " " + name;
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    return {worst < 1e-6 && secs < 30.0,
            std::to_string(checks) + " checks, worst " + fmt("%.2e", worst) + " at " + where + fmt(", %.2f s", secs)};
}

// ---- 4 ------------------------------------------------------------------

Outcome roundtrip_and_continuity()
{
    double rt = 0.0;
    for (double q : {0.2, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0}) {
        const auto fam = family(q);
        for (double lg : log_grid(1e-6, 1e6, 100)) {
            const auto back = unsqueeze_log(fam, squeeze_log(fam, LogValue::of(lg)));
            if (back.cutoff) continue;
            rt = std::max(rt, std::abs(back.ln_x - lg));
        }
    }
    double cont = 0.0;
    for (double q : {1.0 - 1e-8, 1.0 + 1e-8}) {
        const auto fam = SqueezeFamily::tsallis(q);
        for (double lg : log_grid(1e-3, 1e3, 100)) cont = std::max(cont, std::abs(squeeze_log(fam, LogValue::of(lg)).ln_x - lg));
    }
    return {rt < 1e-10 && cont < 1e-6, fmt("roundtrip %.2e, continuity %.2e", rt, cont)};
}

// ---- 5 ------------------------------------------------------------------

Outcome composition_law()
{
    double worst = 0.0;
    int points = 0, skipped = 0;
    for (double q : {0.5, 1.5, 2.0}) {
        const auto fam = SqueezeFamily::tsallis(q);
        for (int a = 0; a <= 30; ++a) {
            for (int b = 0; b <= 30; ++b) {
                const double JA = 0.1 * a, JB = 0.1 * b;
                const auto gA = unsqueeze_log(fam, LogValue::of(JA));
                const auto gB = unsqueeze_log(fam, LogValue::of(JB));
                if (gA.cutoff || gB.cutoff) {
                    ++skipped;
                    continue;
                }
                const double JAB = squeeze_log(fam, LogValue::of(gA.ln_x + gB.ln_x)).ln_x;
                worst = std::max(worst, std::abs(JAB - (JA + JB + (1.0 - q) * JA * JB)));
                ++points;
            }
        }
    }
    return {worst < 1e-10, std::to_string(points) + " points (" + std::to_string(skipped) + " beyond the cutoff), worst " +
                               fmt("%.2e", worst)};
}

// ---- 6 ------------------------------------------------------------------

Outcome tsallis_entropy_equivalence()
{
    const auto spec = two_level(1.0);
    double worst = 0.0;
    for (double q : {0.5, 1.5, 2.0}) {
        const auto fam = SqueezeFamily::tsallis(q);
        for (double beta : {0.1, std::log(2.0), 2.0}) {
            const EnsembleSpec env{{{"E", beta}}, {}};
            const auto table = characteristic_class(spec, env, fam);
            const auto pt = phi_and_entropies(table, spec, env, fam);
            const double s = entropy_from_probabilities(probabilities(table, spec, fam), spec, fam);
            worst = std::max(worst, std::abs(s - pt.entropy_J));
        }
    }
    return {worst < 1e-8, fmt("worst |S_q - J| %.2e", worst)};
}

// ---- 7 ------------------------------------------------------------------

Outcome fluctuation_identity()
{
    const auto spec = two_level(1.0);
    const double beta = std::log(2.0);
    const EnsembleSpec env{{{"E", beta}}, {}};
    double bg = 0.0, ts = 0.0;
    for (double q : {1.0, 0.5, 1.5, 2.0}) {
        const auto fam = family(q);
        const double phi0 = characteristic_function(spec, env, fam);
        const auto rep = moments(stability_matrix(phi_surface(spec, env, fam), env.y, {"E"}), phi0, fam);
        // scalar form and the matrix form <αα><λλ>
        const double product = rep.variances.at("E") * rep.conjugate_variances.at("E");
        const double matrix = (rep.alpha_alpha * rep.lambda_lambda)(0, 0);
        const double s = 1.0 + (q - 1.0) * phi0;
        const double e = std::max(std::abs(product - s * s), std::abs(matrix - s * s));
        if (q == 1.0) {
            bg = e;
        } else {
            ts = std::max(ts, e);
        }
    }
    return {bg < 1e-8 && ts < 1e-6, fmt("BG %.2e, Tsallis %.2e", bg, ts)};
}

// ---- 8 ------------------------------------------------------------------

Outcome grand_canonical_covariance()
{
    const auto fam = SqueezeFamily::identity();
    double worst = 0.0;
    for (double eps : {0.0, 0.5}) {
        const auto spec = lattice_gas(100, 100, eps);
        const Values y{{"E", 1.0}, {"N", -0.3}};
        const EnsembleSpec env{y, {}};
        const auto rep = moments(stability_matrix(phi_surface(spec, env, fam), y, {"E", "N"}),
                                 characteristic_function(spec, env, fam), fam);
        const double cov = rep.covariances.at({"E", "N"});
        auto mean_surface = [&](const std::string& var) {
            return PhiSurface{[&spec, &fam, var](const Values& v) {
                                  return observed_mean(spec, EnsembleSpec{v, {}}, fam, spec.column(var));
                              },
                              {}};
        };
        const double dN_dbeta = partial_derivative(mean_surface("N"), y, "E");
        const double dE_dnu = partial_derivative(mean_surface("E"), y, "N");
        worst = std::max({worst, std::abs(cov + dN_dbeta), std::abs(cov + dE_dnu), std::abs(dN_dbeta - dE_dnu)});
    }
    return {worst < 1e-6, fmt("worst mismatch %.2e", worst)};
}

// ---- 9, 10 --------------------------------------------------------------

std::vector<double> random_populations(std::size_t n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.5, 1.5);
    std::vector<double> F(n);
    for (double& f : F) f = d(rng);
    return F;
}

double relative_drift(const KineticInvariants& a, const KineticInvariants& b)
{
    return std::max({std::abs(b.mass - a.mass) / a.mass, std::abs(b.energy - a.energy) / a.energy,
                     std::abs(b.momentum_x - a.momentum_x) / a.mass, std::abs(b.momentum_y - a.momentum_y) / a.mass});
}

// Steps until max|rhs| < tol or the step budget runs out.
KineticState relax(KineticState s, const CollisionNetwork& net, const SqueezeFamily& fam, double dt,
                   const SymmetricHook& xi, double tol, long budget)
{
    for (long n = 0; n < budget; ++n) {
        if (n % 100 == 0 && max_abs(collision_rhs(s, net, fam, xi)) < tol) break;
        s = step(s, net, fam, dt, xi);
    }
    return s;
}

Outcome h_theorem()
{
    const auto t0 = clock_type::now();
    const auto lattice = VelocityLattice::disk(2);
    const auto net = build_collision_network(lattice);
    double worst_dS = 0.0, worst_drift = 0.0, worst_balance = 0.0;
    for (double q : {1.0, 1.5}) {
        const auto fam = family(q);
        for (unsigned seed = 1; seed <= 10; ++seed) {
            KineticState s{random_populations(lattice.size(), seed), 0.0};
            const auto inv0 = invariants(s, lattice);
            const double dt = 0.5 * stable_dt_bound(s, net, fam);
            double S = entropy_functional(s, fam);
            for (int n = 0; n < 10000; ++n) {
                s = step(s, net, fam, dt);
                const double S1 = entropy_functional(s, fam);
                worst_dS = std::min(worst_dS, S1 - S);
                S = S1;
            }
            worst_drift = std::max(worst_drift, relative_drift(inv0, invariants(s, lattice)));
            s = relax(s, net, fam, dt, xi_one, 1e-12, 1000000);
            worst_balance = std::max(worst_balance, detailed_balance_residual(s, net, fam));
        }
    }
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    return {worst_dS >= -1e-12 && worst_drift < 1e-9 && worst_balance < 1e-10 && secs < 60.0,
            fmt("min dS %.2e, drift %.2e", worst_dS, worst_drift) + fmt(", balance %.2e, %.1f s", worst_balance, secs)};
}

Outcome maxwell_boltzmann()
{
    const auto lattice = VelocityLattice::disk(2);
    const auto net = build_collision_network(lattice);
    const auto fam = SqueezeFamily::identity();
    double fit = 0.0, xi_gap = 0.0;
    for (unsigned seed : {11u, 12u, 13u}) {
        const KineticState s0{random_populations(lattice.size(), seed), 0.0};
        const double dt = 0.5 * stable_dt_bound(s0, net, fam);
        const auto a = relax(s0, net, fam, dt, xi_one, 1e-13, 2000000);
        const auto b = relax(s0, net, fam, dt, xi_soft, 1e-13, 2000000);

        // ln F = c0 + c1 vx + c2 vy + c3 |v|^2
        const auto n = static_cast<Eigen::Index>(lattice.size());
        Eigen::MatrixXd A(n, 4);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& v = lattice.velocities[static_cast<std::size_t>(i)];
            A.row(i) << 1.0, v.x, v.y, v.speed2();
            y(i) = std::log(a.F[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
        fit = std::max(fit, (A * c - y).cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < a.F.size(); ++i) xi_gap = std::max(xi_gap, std::abs(a.F[i] - b.F[i]));
    }
    return {fit < 1e-8 && xi_gap < 1e-8, fmt("log-affine residual %.2e, xi gap %.2e", fit, xi_gap)};
}

// ---- 11 -----------------------------------------------------------------

double reconstruction_error(const SqueezeFamily& fam, std::size_t n)
{
    const auto t = reconstruct_squeeze(synthetic_dataset(fam, linear_grid(0.0, 2.0, n)));
    double e = 0.0;
    for (std::size_t k = 0; k < t.ln_g.size(); ++k) {
        e = std::max(e, std::abs(t.ln_h[k] - squeeze_log(fam, LogValue::of(t.ln_g[k])).ln_x));
    }
    return e;
}

Outcome zeroth_law_inference()
{
    double q_err = 0.0;
    double ratio_lo = INFINITY, ratio_hi = 0.0, exact = 0.0;
    for (double q : {0.5, 1.0, 1.5, 2.0}) {
        const auto fam = family(q);
        q_err = std::max(q_err, std::abs(estimate_q(synthetic_dataset(fam, linear_grid(0.0, 4.0, 50))).q - q));
        const double e1 = reconstruction_error(fam, 41), e2 = reconstruction_error(fam, 81);
        if (q == 1.0) {
            // a constant ratio integrates exactly
            exact = std::max(exact, e2);
        } else {
            ratio_lo = std::min(ratio_lo, e1 / e2);
            ratio_hi = std::max(ratio_hi, e1 / e2);
        }
    }
    const bool ok = q_err < 1e-3 && ratio_lo > 3.5 && ratio_hi < 4.5 && exact < 1e-12;
    return {ok, fmt("q error %.2e", q_err) + fmt(", halving ratio in [%.3f, %.3f]", ratio_lo, ratio_hi)};
}

// ---- 12 -----------------------------------------------------------------

Outcome superstatistics()
{
    double worst = 0.0;
    bool unit = true;
    for (double beta : {0.5, 1.0, 2.0}) {
        const auto d = spike_density(beta, 1e-3);
        unit = unit && superstatistics_forward(d, 0.0) == 1.0;
        for (double E : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            worst = std::max(worst, std::abs(superstatistics_forward(d, E) - std::exp(-beta * E)));
        }
    }
    return {worst < 1e-4 && unit, fmt("worst %.2e, B(0) == 1: ", worst) + (unit ? "yes" : "no")};
}

}  // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"BG two-level canonical ensemble", bg_two_level},
        {"microcanonical uniformity", microcanonical_uniformity},
        {"derivative-average duality", derivative_average_duality},
        {"squeeze roundtrip and q->1 continuity", roundtrip_and_continuity},
        {"Tsallis composition law", composition_law},
        {"Tsallis entropy equivalence", tsallis_entropy_equivalence},
        {"fluctuation product identity", fluctuation_identity},
        {"grand-canonical covariance", grand_canonical_covariance},
        {"H-theorem and conservation", h_theorem},
        {"Maxwell-Boltzmann recovery and xi independence", maxwell_boltzmann},
        {"zeroth-law inference", zeroth_law_inference},
        {"superstatistics forward", superstatistics},
    };
    int failures = 0;
    int k = 0;
    for (const auto& c : criteria) {
        ++k;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s  %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", k, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", k - failures, k);
    return failures == 0 ? 0 : 1;
}
