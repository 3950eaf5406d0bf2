#ifndef SQSTAT_SQUEEZE_HPP
#define SQSTAT_SQUEEZE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"

namespace sqstat {

// Squeezing families map Boltzmann-Gibbs class sizes g onto actual class
// sizes h(g). Every evaluation is done on logarithms: the engine never
// needs g itself, and for q < 1 even modest ln g overflow g^(1-q).

enum class SqueezeKind { identity, tsallis, custom };

// Hooks for a user-supplied family, all on the log scale:
//   log_squeeze(ln x)   -> ln h(x)
//   log_unsqueeze(ln h) -> ln H(e^ln_h), or nullopt outside the domain
//   elasticity(ln x)    -> d ln h / d ln x  (= x f(x) / h(x), must be >= 0)
struct CustomSqueeze {
    std::function<double(double)> log_squeeze;
    std::function<std::optional<double>(double)> log_unsqueeze;
    std::function<double(double)> elasticity;
};

// f(x) = dh/dx reported two ways: the log-safe ratio f/h (x^-q for
// Tsallis) and f itself when it fits in a double.
struct SqueezeSlope {
    double ln_ratio = 0.0;
    double ratio = 0.0;
    double elasticity = 1.0;
    std::optional<double> f;
};

class SqueezeFamily {
public:
    static SqueezeFamily identity() { return SqueezeFamily(SqueezeKind::identity, 1.0); }

    static SqueezeFamily tsallis(double q)
    {
        if (!std::isfinite(q)) throw argument_error("tsallis q must be finite");
        return SqueezeFamily(SqueezeKind::tsallis, q);
    }

    // Runs the inverse and slope consistency probes before accepting the
    // hooks; throws argument_error with the failing probe point.
    static SqueezeFamily custom(CustomSqueeze hooks, std::string name = "custom");

    SqueezeKind kind() const noexcept { return kind_; }
    double q() const noexcept { return q_; }
    const std::string& name() const noexcept { return name_; }

    // True when the family evaluates as h(x) = x. Tsallis at q == 1 is
    // routed here, never through the q -> 1 limit.
    bool is_identity() const noexcept
    {
        return kind_ == SqueezeKind::identity || (kind_ == SqueezeKind::tsallis && q_ == 1.0);
    }

    const CustomSqueeze& hooks() const { return *hooks_; }

private:
    SqueezeFamily(SqueezeKind kind, double q)
        : kind_(kind), q_(q), name_(kind == SqueezeKind::identity ? "identity" : "tsallis")
    {
    }

    SqueezeKind kind_ = SqueezeKind::identity;
    double q_ = 1.0;
    std::string name_;
    std::shared_ptr<const CustomSqueeze> hooks_;
};

namespace detail {

// Error-free sum: a + b == s + err exactly.
inline std::pair<double, double> two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) throw domain_error(std::string(what) + ": non-finite input");
}

}  // namespace detail

// ln h(g) from ln g. Tsallis: ln_q(g) = expm1((1-q) ln g) / (1-q).
inline LogValue squeeze_log(const SqueezeFamily& fam, LogValue ln_g)
{
    if (ln_g.cutoff) throw domain_error("squeeze_log: excluded input");
    detail::require_finite(ln_g.ln_x, "squeeze_log");
    if (fam.is_identity()) return ln_g;
    if (fam.kind() == SqueezeKind::tsallis) {
        const double a = 1.0 - fam.q();
        const double t = a * ln_g.ln_x;
        if (t > -std::numbers::ln2) return LogValue::of(std::expm1(t) / a);
        // Near the ceiling ln h -> -1/a: keep (e^t - 1)/a as a double-double
        // so that unsqueeze_log can recover e^t.
        const double e = std::exp(t);
        const auto [s, s_err] = detail::two_sum(e, -1.0);
        const double h1 = s / a;
        const double h2 = (std::fma(-h1, a, s) + s_err) / a;
        const auto [hi, lo] = detail::two_sum(h1, h2);
        return LogValue{hi, false, lo};
    }
    return LogValue::of(fam.hooks().log_squeeze(ln_g.ln_x));
}

// ln H(e^ln_h). Tsallis: log1p((1-q) ln_h) / (1-q); the excluded state is
// returned when 1 + (1-q) ln_h <= 0.
inline LogValue unsqueeze_log(const SqueezeFamily& fam, LogValue ln_h)
{
    if (ln_h.cutoff) return LogValue::excluded();
    detail::require_finite(ln_h.ln_x, "unsqueeze_log");
    if (fam.is_identity()) return ln_h;
    if (fam.kind() == SqueezeKind::tsallis) {
        const double a = 1.0 - fam.q();
        // u = 1 + a ln_h, compensated
        const double p = a * ln_h.ln_x;
        const double p_err = std::fma(a, ln_h.ln_x, -p);
        const auto [s, s_err] = detail::two_sum(1.0, p);
        const double u = s + (s_err + p_err + a * ln_h.tail);
        if (!(u > 0.0)) return LogValue::excluded();
        if (u < 0.5) return LogValue::of(std::log(u) / a);
        return LogValue::of(std::log1p(p + (p_err + a * ln_h.tail)) / a);
    }
    auto r = fam.hooks().log_unsqueeze(ln_h.ln_x);
    if (!r || std::isnan(*r)) return LogValue::excluded();
    return LogValue::of(*r);
}

inline SqueezeSlope squeeze_slope(const SqueezeFamily& fam, LogValue ln_g)
{
    if (ln_g.cutoff) throw domain_error("squeeze_slope: excluded input");
    detail::require_finite(ln_g.ln_x, "squeeze_slope");
    SqueezeSlope s;
    if (fam.is_identity()) {
        s.elasticity = 1.0;
        s.ln_ratio = -ln_g.ln_x;
        s.ratio = std::exp(s.ln_ratio);
        s.f = 1.0;
        return s;
    }
    double ln_h = 0.0;
    if (fam.kind() == SqueezeKind::tsallis) {
        const double q = fam.q();
        s.elasticity = std::exp((1.0 - q) * ln_g.ln_x);
        s.ln_ratio = -q * ln_g.ln_x;
        ln_h = std::expm1((1.0 - q) * ln_g.ln_x) / (1.0 - q);
    } else {
        s.elasticity = fam.hooks().elasticity(ln_g.ln_x);
        s.ln_ratio = std::log(s.elasticity) - ln_g.ln_x;
        ln_h = fam.hooks().log_squeeze(ln_g.ln_x);
    }
    s.ratio = std::exp(s.ln_ratio);
    const double ln_f = ln_h + s.ln_ratio;
    if (std::isfinite(ln_f) && ln_f < std::log(std::numeric_limits<double>::max())) {
        s.f = std::exp(ln_f);
    }
    return s;
}

// ln H(h(g) e^-shift): the rearranged class of a row whose Boltzmann-Gibbs
// size is g and whose bath coupling is shift = sum_i y_i X_i. The Tsallis
// branch uses ln g + log1p(-(1-q) shift g^(q-1)) / (1-q), which never forms
// h(g) and stays finite for macroscopic ln g.
inline LogValue rearranged_class(const SqueezeFamily& fam, double ln_g, double shift)
{
    detail::require_finite(ln_g, "rearranged_class");
    detail::require_finite(shift, "rearranged_class");
    if (fam.is_identity()) return LogValue::of(ln_g - shift);
    if (shift == 0.0) return LogValue::of(ln_g);
    if (fam.kind() == SqueezeKind::tsallis) {
        const double a = 1.0 - fam.q();
        const double t = -a * shift * std::exp(-a * ln_g);
        if (std::isnan(t)) throw domain_error("rearranged_class: indeterminate Tsallis argument");
        if (t <= -1.0) return LogValue::excluded();
        const double r = ln_g + std::log1p(t) / a;
        if (!std::isfinite(r)) throw domain_error("rearranged_class: class size overflows");
        return LogValue::of(r);
    }
    LogValue h = squeeze_log(fam, LogValue::of(ln_g));
    return unsqueeze_log(fam, LogValue::of(h.ln_x - shift));
}

// h(x) for a plain density x >= 0, including the x -> 0 limit.
inline double squeeze_value(const SqueezeFamily& fam, double x)
{
    if (!(x >= 0.0) || !std::isfinite(x)) throw domain_error("squeeze_value: density must be finite and >= 0");
    if (fam.is_identity()) return x;
    if (x > 0.0) return std::exp(squeeze_log(fam, LogValue::of(std::log(x))).ln_x);
    if (fam.kind() == SqueezeKind::tsallis) {
        const double a = 1.0 - fam.q();
        return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
    }
    const double v = fam.hooks().log_squeeze(-std::numeric_limits<double>::infinity());
    return std::isnan(v) ? 0.0 : std::exp(v);
}

inline SqueezeFamily SqueezeFamily::custom(CustomSqueeze hooks, std::string name)
{
    if (!hooks.log_squeeze || !hooks.log_unsqueeze || !hooks.elasticity) {
        throw argument_error("custom squeeze family needs all three hooks");
    }
    constexpr int probes = 33;
    constexpr double step = 1e-5;
    for (int k = 0; k < probes; ++k) {
        const double lx = -4.0 + 8.0 * k / (probes - 1);
        const double lh = hooks.log_squeeze(lx);
        if (!std::isfinite(lh)) {
            throw argument_error("custom squeeze: log_squeeze not finite at ln x = " + std::to_string(lx));
        }
        auto back = hooks.log_unsqueeze(lh);
        if (!back || std::abs(*back - lx) > 1e-8 * std::max(1.0, std::abs(lx))) {
            throw argument_error("custom squeeze: inverse roundtrip fails at ln x = " + std::to_string(lx));
        }
        const double e = hooks.elasticity(lx);
        const double fd = (hooks.log_squeeze(lx + step) - hooks.log_squeeze(lx - step)) / (2.0 * step);
        if (!(e >= 0.0) || !std::isfinite(e) || std::abs(e - fd) > 1e-5 * std::max(1.0, std::abs(e))) {
            throw argument_error("custom squeeze: slope inconsistent with log_squeeze at ln x = " +
                                 std::to_string(lx));
        }
    }
    SqueezeFamily fam(SqueezeKind::custom, std::numeric_limits<double>::quiet_NaN());
    fam.name_ = std::move(name);
    fam.hooks_ = std::make_shared<const CustomSqueeze>(std::move(hooks));
    return fam;
}

}  // namespace sqstat

#endif  // SQSTAT_SQUEEZE_HPP
