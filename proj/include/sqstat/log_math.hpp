#ifndef SQSTAT_LOG_MATH_HPP
#define SQSTAT_LOG_MATH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace sqstat {

// A positive quantity stored as its natural log. `cutoff` marks the
// excluded state (size zero after a Tsallis cutoff); ln_x is -inf then.
// `tail` is an optional low-order correction, ln x = ln_x + tail, set where
// a squeeze saturates and ln_x alone cannot be inverted to full precision.
struct LogValue {
    double ln_x = 0.0;
    bool cutoff = false;
    double tail = 0.0;

    static constexpr LogValue of(double ln_x) noexcept { return {ln_x, false}; }
    static constexpr LogValue excluded() noexcept
    {
        return {-std::numeric_limits<double>::infinity(), true};
    }

    double value() const noexcept { return cutoff ? 0.0 : std::exp(ln_x); }
};

// log(sum_i exp(args[i])) with a max shift. Entries equal to -inf are
// skipped; an all -inf input yields -inf. The reduction runs in index
// order so results are bitwise reproducible.
inline double log_sum_exp(std::span<const double> args) noexcept
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    double max_arg = neg_inf;
    for (double a : args) max_arg = std::max(max_arg, a);
    if (max_arg == neg_inf) return neg_inf;
    if (std::isinf(max_arg)) return max_arg;

    double sum = 0.0;
    for (double a : args) {
        if (a == neg_inf) continue;
        sum += std::exp(a - max_arg);
    }
    return max_arg + std::log(sum);
}

// log(exp(a) + exp(b))
inline double log_add_exp(double a, double b) noexcept
{
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

// ln C(n, k) through log-gamma; valid for real n >= k >= 0.
inline double log_binomial(double n, double k) noexcept
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace sqstat

#endif  // SQSTAT_LOG_MATH_HPP
