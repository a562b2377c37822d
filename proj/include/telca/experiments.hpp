#pragma once

// Multi-realization experiments: (lambda, mu) sweeps averaged over seeds and
// the one-parameter fit of the mean-load law Z = C * g(lambda, mu).

#include "telca/analysis.hpp"
#include "telca/automaton.hpp"
#include "telca/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace telca {

/// Shape of the mean-load law: (lambda / (1 + lambda)) * ((1 + mu) / mu).
inline double load_shape(double lambda, double mu)
{
    if (!(lambda > 0.0) || !(mu > 0.0)) {
        throw ParameterError("load_shape needs positive lambda and mu");
    }
    return (lambda / (1.0 + lambda)) * ((1.0 + mu) / mu);
}

struct CellOutcome {
    double mean_z = 0.0;
    HurstEstimate hurst;
};

struct AnalysisOptions {
    std::size_t min_n = 16;
    std::size_t points_per_decade = 10;
};

/// Seed of realization r. Depends only on (seed_base, r) so every sweep cell
/// and realization can be rerun in isolation.
constexpr std::uint64_t realization_seed(std::uint64_t seed_base, std::size_t realization) noexcept
{
    return seed_base + static_cast<std::uint64_t>(realization);
}

/// One realization at (lambda, mu). mean_z and H both use the post-burn-in
/// part of the series. Throws InsufficientData for a degenerate series.
inline CellOutcome run_cell(double lambda, double mu, const SimParams& base_params,
                            std::size_t realization_index, std::uint64_t seed_base,
                            const AnalysisOptions& analysis = {})
{
    SimParams params = base_params;
    params.lambda = lambda;
    params.mu = mu;
    params.seed = realization_seed(seed_base, realization_index);
    params.validate();

    const auto counts = run(params);
    const auto tail = std::span<const std::size_t>{counts}.subspan(params.burn_in);
    const auto series = to_series(tail);

    CellOutcome out;
    out.mean_z = series_mean(series);
    out.hurst = estimate_hurst(rs_curve(series, analysis.min_n, analysis.points_per_decade));
    return out;
}

struct SweepSpec {
    std::vector<double> lambdas;
    std::vector<double> mus;
    std::size_t realizations = 40;
    SimParams base_params{.lambda = 0.07, .mu = 0.03, .width = 15, .height = 15,
                          .cycles = 10000, .burn_in = 500, .seed = 0};
    std::uint64_t seed_base = 1;
    AnalysisOptions analysis;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 0;

    void validate() const
    {
        if (lambdas.empty() || mus.empty()) {
            throw ParameterError("sweep needs at least one lambda and one mu");
        }
        if (realizations == 0) {
            throw ParameterError("realizations must be at least 1");
        }
        for (const double l : lambdas) {
            if (!(l > 0.0) || !std::isfinite(l)) {
                throw ParameterError("every lambda must be a finite positive number");
            }
        }
        for (const double m : mus) {
            if (!(m > 0.0) || !std::isfinite(m)) {
                throw ParameterError("every mu must be a finite positive number");
            }
        }
        SimParams probe = base_params;
        probe.lambda = lambdas.front();
        probe.mu = mus.front();
        probe.validate();
    }
};

struct SweepRow {
    double lambda = 0.0;
    double mu = 0.0;
    double mean_z = 0.0;
    double std_z = 0.0;
    double mean_h = 0.0;
    double std_h = 0.0;
    std::size_t realizations_used = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

namespace detail {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

// Sample standard deviation (divisor n - 1); zero for a single value.
inline MeanStd mean_std(std::span<const double> values)
{
    MeanStd out;
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

inline std::vector<double> sorted_unique(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

// Runs task(i) for i in [0, count) on `threads` workers. The first exception
// thrown by any task is rethrown on the calling thread.
template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task&& task)
{
    if (threads == 0) {
        threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::jthread> workers;
    std::vector<std::exception_ptr> errors(threads);
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    task(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                failed = true;
            }
        });
    }
    workers.clear();  // joins
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace detail

/// Every (lambda, mu) pair averaged over spec.realizations seeds. Rows are in
/// ascending (lambda, mu) order. Realizations whose series is degenerate are
/// dropped and show up as a smaller realizations_used. The result does not
/// depend on the number of worker threads.
inline SweepResult sweep(const SweepSpec& spec)
{
    spec.validate();
    const auto lambdas = detail::sorted_unique(spec.lambdas);
    const auto mus = detail::sorted_unique(spec.mus);
    const std::size_t cells = lambdas.size() * mus.size();
    const std::size_t tasks = cells * spec.realizations;

    std::vector<std::optional<CellOutcome>> outcomes(tasks);
    detail::parallel_for(tasks, spec.threads, [&](std::size_t t) {
        const std::size_t cell = t / spec.realizations;
        const std::size_t r = t % spec.realizations;
        try {
            outcomes[t] = run_cell(lambdas[cell / mus.size()], mus[cell % mus.size()],
                                   spec.base_params, r, spec.seed_base, spec.analysis);
        } catch (const InsufficientData&) {
            outcomes[t] = std::nullopt;
        }
    });

    SweepResult result;
    result.rows.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::vector<double> zs;
        std::vector<double> hs;
        for (std::size_t r = 0; r < spec.realizations; ++r) {
            if (const auto& o = outcomes[cell * spec.realizations + r]) {
                zs.push_back(o->mean_z);
                hs.push_back(o->hurst.hurst);
            }
        }
        const auto z = detail::mean_std(zs);
        const auto h = detail::mean_std(hs);
        result.rows.push_back({.lambda = lambdas[cell / mus.size()],
                               .mu = mus[cell % mus.size()],
                               .mean_z = z.mean,
                               .std_z = z.stddev,
                               .mean_h = h.mean,
                               .std_h = h.stddev,
                               .realizations_used = zs.size()});
    }
    return result;
}

struct LoadFit {
    double c = 0.0;             ///< scaling constant
    double rms_residual = 0.0;  ///< root-mean-square of mean_z - C * g
    double relative_rms = 0.0;  ///< rms_residual / mean of the fitted mean_z
    std::size_t rows_used = 0;
};

/// Least-squares C in mean_z ~ C * load_shape(lambda, mu):
/// C = sum(mean_z * g) / sum(g^2). Rows without usable realizations are
/// ignored. field_cells bounds the admissible mean_z.
inline LoadFit fit_load_constant(const SweepResult& result, std::size_t field_cells)
{
    if (field_cells == 0) {
        throw ParameterError("field_cells must be positive");
    }
    double zg = 0.0;
    double gg = 0.0;
    double zsum = 0.0;
    std::size_t used = 0;
    for (const auto& row : result.rows) {
        if (row.realizations_used == 0) {
            continue;
        }
        if (row.mean_z < 0.0 || row.mean_z > static_cast<double>(field_cells)) {
            throw ParameterError("mean_z outside [0, field_cells]");
        }
        const double g = load_shape(row.lambda, row.mu);
        zg += row.mean_z * g;
        gg += g * g;
        zsum += row.mean_z;
        ++used;
    }
    if (used == 0) {
        throw InsufficientData("load fit needs at least one row with realizations_used >= 1");
    }
    if (!(gg > 0.0)) {
        throw ParameterError("load shape is zero for every row");
    }
    LoadFit fit;
    fit.c = zg / gg;
    fit.rows_used = used;
    double ss = 0.0;
    for (const auto& row : result.rows) {
        if (row.realizations_used == 0) {
            continue;
        }
        const double r = row.mean_z - fit.c * load_shape(row.lambda, row.mu);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(used));
    const double zmean = zsum / static_cast<double>(used);
    fit.relative_rms = zmean > 0.0 ? fit.rms_residual / zmean : 0.0;
    return fit;
}

}  // namespace telca
