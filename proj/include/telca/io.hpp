#pragma once

// Text and image formats used by the command-line tool: CSV tables for
// series, R/S curves and sweeps, plus ASCII and PPM frames of the grid.

#include "telca/analysis.hpp"
#include "telca/automaton.hpp"
#include "telca/error.hpp"
#include "telca/experiments.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace telca::io {

/// `cycle,busy_count`, cycles numbered from 1 (the state after each step).
inline void write_series_csv(std::ostream& out, std::span<const std::size_t> counts)
{
    out << "cycle,busy_count\n";
    for (std::size_t t = 0; t < counts.size(); ++t) {
        fmt::print(out, "{},{}\n", t + 1, counts[t]);
    }
}

inline void write_rs_csv(std::ostream& out, const RsCurve& curve)
{
    out << "n,rs,log2_half_n,log2_rs\n";
    for (const auto& p : curve.points) {
        fmt::print(out, "{},{:.10g},{:.10g},{:.10g}\n", p.n, p.rs,
                   std::log2(static_cast<double>(p.n) / 2.0), std::log2(p.rs));
    }
}

inline std::string hurst_summary(const HurstEstimate& est)
{
    return fmt::format("H={:.6f} intercept={:.6f} r2={:.6f} points={}", est.hurst,
                       est.intercept, est.r_squared, est.n_points);
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result)
{
    out << "lambda,mu,mean_z,std_z,mean_h,std_h,realizations_used\n";
    for (const auto& r : result.rows) {
        fmt::print(out, "{},{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.lambda, r.mu, r.mean_z,
                   r.std_z, r.mean_h, r.std_h, r.realizations_used);
    }
}

inline void write_fit_comment(std::ostream& out, const LoadFit& fit)
{
    fmt::print(out, "# C={:.6f} rms={:.6f}\n", fit.c, fit.rms_residual);
}

/// Grid of signed counters: positive = cycles to completion (busy),
/// negative = cycles to the next call (free). Columns are right-aligned.
inline void write_ascii_frame(std::ostream& out, const Grid& grid)
{
    std::size_t w = 1;
    for (const auto& c : grid.cells()) {
        w = std::max(w, fmt::formatted_size("{}", c.signed_counter()));
    }
    for (std::size_t row = 0; row < grid.height(); ++row) {
        for (std::size_t col = 0; col < grid.width(); ++col) {
            fmt::print(out, "{}{:>{}}", col == 0 ? "" : " ",
                       grid[grid.index({row, col})].signed_counter(), w);
        }
        out << '\n';
    }
}

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr Rgb busy_color{0x9b, 0x1b, 0x1b};  // dark red
inline constexpr Rgb free_color{0xa8, 0xc8, 0xf0};  // light blue

/// Binary PPM (P6), each cell drawn as a scale x scale block.
inline void write_ppm_frame(std::ostream& out, const Grid& grid, std::size_t scale = 8)
{
    if (scale == 0) {
        throw ParameterError("scale must be positive");
    }
    const std::size_t w = grid.width() * scale;
    const std::size_t h = grid.height() * scale;
    fmt::print(out, "P6\n{} {}\n255\n", w, h);
    std::string line;
    line.reserve(w * 3);
    for (std::size_t row = 0; row < grid.height(); ++row) {
        line.clear();
        for (std::size_t col = 0; col < grid.width(); ++col) {
            const Rgb& c = grid[grid.index({row, col})].is_busy() ? busy_color : free_color;
            for (std::size_t k = 0; k < scale; ++k) {
                line.append(reinterpret_cast<const char*>(c.data()), c.size());
            }
        }
        for (std::size_t k = 0; k < scale; ++k) {
            out.write(line.data(), static_cast<std::streamsize>(line.size()));
        }
    }
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& value)
{
    if (s.empty()) {
        return false;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(value);
}

}  // namespace detail

using TableInput = std::variant<std::vector<double>, std::vector<RsPoint>>;

/// Reads either a series or a ready-made R/S curve from CSV.
///
/// Blank lines and lines starting with '#' are ignored. A header is optional.
/// If the header has columns `n` and `rs` the input is a curve; otherwise the
/// series is taken from `busy_count`, then `value`, then the last column.
inline TableInput read_table(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    bool curve = false;
    std::size_t value_col = 0;
    std::size_t n_col = 0;
    std::size_t rs_col = 0;
    std::size_t columns = 0;
    std::vector<double> series;
    std::vector<RsPoint> points;

    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = detail::split_csv(text);
        if (columns == 0) {
            columns = fields.size();
            double probe = 0.0;
            if (!detail::parse_double(fields.back(), probe)) {
                const auto find = [&](std::string_view name) {
                    return static_cast<std::size_t>(
                        std::find(fields.begin(), fields.end(), name) - fields.begin());
                };
                n_col = find("n");
                rs_col = find("rs");
                curve = n_col < columns && rs_col < columns;
                value_col = find("busy_count");
                if (value_col == columns) {
                    value_col = find("value");
                }
                if (value_col == columns) {
                    value_col = columns - 1;
                }
                continue;
            }
            value_col = columns - 1;
        }
        if (fields.size() != columns) {
            throw ParameterError(fmt::format("line {}: expected {} fields, got {}", lineno,
                                             columns, fields.size()));
        }
        if (curve) {
            double n = 0.0;
            double rs = 0.0;
            if (!detail::parse_double(fields[n_col], n) || !detail::parse_double(fields[rs_col], rs) ||
                n < 1.0 || n != std::floor(n)) {
                throw ParameterError(fmt::format("line {}: malformed (n, rs) pair", lineno));
            }
            points.push_back({static_cast<std::size_t>(n), rs});
        } else {
            double v = 0.0;
            if (!detail::parse_double(fields[value_col], v)) {
                throw ParameterError(fmt::format("line {}: not a number: '{}'", lineno,
                                                 fields[value_col]));
            }
            series.push_back(v);
        }
    }
    if (curve) {
        return points;
    }
    return series;
}

}  // namespace telca::io
