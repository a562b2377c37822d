#pragma once

// Rescaled-range (R/S) analysis and Hurst exponent estimation.
//
// For a series F(1..N) with mean <F>, the accumulated deviation is
// X(n) = sum_{i<=n} (F(i) - <F>), the spread is R = max X - min X and S is
// the population standard deviation. A self-similar series follows
// R/S = (N/2)^H; H is recovered as the OLS slope of log(R/S) on log(N/2)
// over a set of growing prefixes of the series.

#include "telca/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace telca {

namespace detail {
inline void require_nonempty(std::span<const double> series, const char* what)
{
    if (series.empty()) {
        throw ParameterError(std::string(what) + ": series must not be empty");
    }
}

// The mean of a constant series need not round back to the constant, so
// constancy is detected directly rather than through tiny deviations.
inline bool is_constant(std::span<const double> series)
{
    return std::adjacent_find(series.begin(), series.end(), std::not_equal_to<>{}) ==
           series.end();
}

// Deviations are formed from values re-based on the first element. This
// cuts cancellation for large offsets and makes R/S exactly invariant under
// integer shifts of integer-valued series.
inline double rebased_mean(std::span<const double> series)
{
    const double base = series.front();
    double sum = 0.0;
    for (const double v : series) {
        sum += v - base;
    }
    return sum / static_cast<double>(series.size());
}
}  // namespace detail

inline double series_mean(std::span<const double> series)
{
    detail::require_nonempty(series, "series_mean");
    double sum = 0.0;
    for (const double v : series) {
        sum += v;
    }
    return sum / static_cast<double>(series.size());
}

/// Population standard deviation (divisor N).
inline double population_stddev(std::span<const double> series)
{
    detail::require_nonempty(series, "population_stddev");
    if (detail::is_constant(series)) {
        return 0.0;
    }
    const double base = series.front();
    const double mean = detail::rebased_mean(series);
    double ss = 0.0;
    for (const double v : series) {
        const double d = (v - base) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(series.size()));
}

/// Running sum of deviations from the full-series mean.
inline std::vector<double> cumulative_deviation(std::span<const double> series)
{
    detail::require_nonempty(series, "cumulative_deviation");
    const double base = series.front();
    const double mean = detail::rebased_mean(series);
    std::vector<double> out;
    out.reserve(series.size());
    double acc = 0.0;
    for (const double v : series) {
        acc += (v - base) - mean;
        out.push_back(acc);
    }
    return out;
}

/// max - min of the cumulative deviation. Zero exactly for a constant series.
inline double spread(std::span<const double> series)
{
    detail::require_nonempty(series, "spread");
    if (detail::is_constant(series)) {
        return 0.0;
    }
    const double base = series.front();
    const double mean = detail::rebased_mean(series);
    double acc = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool first = true;
    for (const double v : series) {
        acc += (v - base) - mean;
        if (first) {
            lo = hi = acc;
            first = false;
        } else {
            lo = std::min(lo, acc);
            hi = std::max(hi, acc);
        }
    }
    return hi - lo;
}

/// R/S of the whole series, or nullopt when the series is degenerate (S = 0).
inline std::optional<double> rescaled_range(std::span<const double> series)
{
    if (series.size() < 2) {
        throw ParameterError("rescaled_range: series needs at least 2 values");
    }
    const double s = population_stddev(series);
    if (!(s > 0.0)) {
        return std::nullopt;
    }
    return spread(series) / s;
}

struct RsPoint {
    std::size_t n = 0;
    double rs = 0.0;
};

struct RsCurve {
    std::vector<RsPoint> points;
    std::size_t degenerate_skipped = 0;
};

/// Prefix lengths round(min_n * 10^(k/points_per_decade)) for k = 0, 1, ...
/// up to max_n, deduplicated, with max_n itself appended as the last point.
inline std::vector<std::size_t> log_spaced_lengths(std::size_t min_n, std::size_t max_n,
                                                   std::size_t points_per_decade)
{
    if (points_per_decade == 0) {
        throw ParameterError("points_per_decade must be positive");
    }
    if (min_n == 0 || min_n > max_n) {
        throw ParameterError("min_n must be in [1, max_n]");
    }
    std::vector<std::size_t> lengths;
    for (std::size_t k = 0;; ++k) {
        const double exact = static_cast<double>(min_n) *
                             std::pow(10.0, static_cast<double>(k) /
                                                static_cast<double>(points_per_decade));
        const auto n = static_cast<std::size_t>(std::llround(exact));
        if (n > max_n) {
            break;
        }
        if (lengths.empty() || n > lengths.back()) {
            lengths.push_back(n);
        }
    }
    if (lengths.back() != max_n) {
        lengths.push_back(max_n);
    }
    return lengths;
}

/// R/S evaluated on log-spaced growing prefixes of the series.
/// Degenerate prefixes are skipped and counted. Throws InsufficientData when
/// fewer than 5 usable points remain.
inline RsCurve rs_curve(std::span<const double> series, std::size_t min_n = 16,
                        std::size_t points_per_decade = 10)
{
    if (min_n < 8) {
        throw ParameterError("min_n must be at least 8");
    }
    if (series.size() < min_n) {
        throw ParameterError("series is shorter than min_n (" + std::to_string(series.size()) +
                             " < " + std::to_string(min_n) + ")");
    }
    RsCurve curve;
    for (const std::size_t n : log_spaced_lengths(min_n, series.size(), points_per_decade)) {
        if (const auto rs = rescaled_range(series.first(n))) {
            curve.points.push_back({n, *rs});
        } else {
            ++curve.degenerate_skipped;
        }
    }
    if (curve.points.size() < 5) {
        throw InsufficientData("R/S curve has " + std::to_string(curve.points.size()) +
                               " usable points; at least 5 are required");
    }
    return curve;
}

struct HurstEstimate {
    double hurst = 0.0;      ///< slope of log(R/S) vs log(N/2)
    double intercept = 0.0;  ///< zero for an exact (N/2)^H law
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// OLS fit of log(rs) on log(N/2) with a free intercept.
inline HurstEstimate estimate_hurst(std::span<const RsPoint> points)
{
    if (points.size() < 5) {
        throw InsufficientData("Hurst estimate needs at least 5 R/S points, got " +
                               std::to_string(points.size()));
    }
    const auto m = static_cast<double>(points.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : points) {
        if (!(p.rs > 0.0) || p.n == 0) {
            throw ParameterError("R/S points must have n >= 1 and rs > 0");
        }
        sx += std::log(static_cast<double>(p.n) / 2.0);
        sy += std::log(p.rs);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(static_cast<double>(p.n) / 2.0) - mx;
        const double dy = std::log(p.rs) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw InsufficientData("R/S points must span more than one prefix length");
    }
    HurstEstimate est;
    est.hurst = sxy / sxx;
    est.intercept = my - est.hurst * mx;
    est.n_points = points.size();
    // syy == 0 means a flat curve that the line fits exactly.
    est.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return est;
}

inline HurstEstimate estimate_hurst(const RsCurve& curve)
{
    return estimate_hurst(std::span<const RsPoint>{curve.points});
}

/// Convenience conversion for integer-valued observables such as busy counts.
template <typename T>
std::vector<double> to_series(std::span<const T> values)
{
    return std::vector<double>(values.begin(), values.end());
}

}  // namespace telca
