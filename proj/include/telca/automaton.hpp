#pragma once

// Cellular-automaton model of a closed telephone network.
//
// Every cell is a subscriber that either waits (Free) for its next call
// attempt or holds a conversation (Busy). Calls only go to the 8 Moore
// neighbours on a toroidal field. A call to a free line connects both ends
// for one shared exponential holding time; a call to a busy line is denied
// and the caller retries on the next cycle with a freshly drawn neighbour.

#include "telca/error.hpp"
#include "telca/random.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace telca {

/// Discretized exponential variate: max(1, ceil(-ln(u) / rate)).
///
/// `u` must lie in (0, 1]; it is supplied by the caller so that the mapping
/// can be checked without a random stream.
inline std::int32_t sample_exp_cycles(double rate, double u)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ParameterError("rate must be a finite positive number");
    }
    if (!(u > 0.0 && u <= 1.0)) {
        throw ParameterError("u must lie in (0, 1]");
    }
    const double cycles = std::ceil(-std::log(u) / rate);
    if (cycles <= 1.0) {
        return 1;
    }
    // Counters are int32; anything larger is astronomically unlikely for the
    // rates this model is meant for, so saturate rather than overflow.
    constexpr double cap = 1'000'000'000.0;
    return static_cast<std::int32_t>(cycles < cap ? cycles : cap);
}

inline std::int32_t sample_exp_cycles(double rate, Engine& rng)
{
    return sample_exp_cycles(rate, uniform_open_closed(rng));
}

/// Per-subscriber state. Exactly one of Free / Busy; the counter is the
/// number of cycles left until the next call attempt (Free) or until the
/// conversation ends (Busy).
class CellState {
public:
    enum class Kind : std::uint8_t { Free, Busy };

    constexpr CellState() = default;

    static constexpr CellState free(std::int32_t cycles_to_call) noexcept
    {
        return CellState{Kind::Free, cycles_to_call};
    }
    static constexpr CellState busy(std::int32_t cycles_to_completion) noexcept
    {
        return CellState{Kind::Busy, cycles_to_completion};
    }

    constexpr Kind kind() const noexcept { return kind_; }
    constexpr bool is_free() const noexcept { return kind_ == Kind::Free; }
    constexpr bool is_busy() const noexcept { return kind_ == Kind::Busy; }
    constexpr std::int32_t counter() const noexcept { return counter_; }

    /// Display convention: positive = cycles to completion, negative =
    /// cycles to the next call.
    constexpr std::int32_t signed_counter() const noexcept
    {
        return is_busy() ? counter_ : -counter_;
    }

    constexpr void tick() noexcept { --counter_; }

    friend constexpr bool operator==(const CellState&, const CellState&) = default;

private:
    constexpr CellState(Kind kind, std::int32_t counter) noexcept
        : kind_(kind), counter_(counter)
    {
    }

    Kind kind_ = Kind::Free;
    std::int32_t counter_ = 1;
};

struct Coord {
    std::size_t row = 0;
    std::size_t col = 0;

    friend constexpr bool operator==(const Coord&, const Coord&) = default;
};

/// Model parameters. seed and burn_in are run plumbing; burn_in only affects
/// which cycles enter statistics, never the dynamics.
struct SimParams {
    double lambda = 0.07;  ///< call rate, 1/cycles
    double mu = 0.03;      ///< service rate, 1/cycles
    std::size_t width = 15;
    std::size_t height = 15;
    std::size_t cycles = 10000;
    std::size_t burn_in = 0;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw ParameterError("lambda must be a finite positive number");
        }
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            throw ParameterError("mu must be a finite positive number");
        }
        if (width < 3 || height < 3) {
            throw ConfigurationError("width and height must both be at least 3");
        }
        if (cycles == 0) {
            throw ParameterError("cycles must be positive");
        }
        if (burn_in >= cycles) {
            throw ParameterError("burn_in must be smaller than cycles");
        }
    }
};

/// Toroidal field of subscribers, row-major.
class Grid {
public:
    Grid(std::size_t width, std::size_t height)
        : width_(width), height_(height), cells_(width * height)
    {
        if (width < 3 || height < 3) {
            throw ConfigurationError("grid must be at least 3x3, got " +
                                     std::to_string(width) + "x" + std::to_string(height));
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }
    std::uint64_t cycle() const noexcept { return cycle_; }

    std::size_t index(Coord c) const noexcept { return c.row * width_ + c.col; }
    Coord coord(std::size_t index) const noexcept { return {index / width_, index % width_}; }

    CellState& operator[](std::size_t index) noexcept { return cells_[index]; }
    const CellState& operator[](std::size_t index) const noexcept { return cells_[index]; }
    CellState& at(Coord c) { return cells_.at(checked_index(c)); }
    const CellState& at(Coord c) const { return cells_.at(checked_index(c)); }

    std::span<CellState> cells() noexcept { return cells_; }
    std::span<const CellState> cells() const noexcept { return cells_; }

    void advance_cycle() noexcept { ++cycle_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t checked_index(Coord c) const
    {
        if (c.row >= height_ || c.col >= width_) {
            throw std::out_of_range("cell coordinate outside the grid");
        }
        return index(c);
    }

    std::size_t width_;
    std::size_t height_;
    std::vector<CellState> cells_;
    std::uint64_t cycle_ = 0;
};

/// The 8 toroidally wrapped Moore neighbours of (row, col), in row-major
/// order of the offsets (-1,-1), (-1,0), ..., (1,1).
inline std::array<Coord, 8> moore_neighbors(std::size_t row, std::size_t col,
                                            std::size_t width, std::size_t height)
{
    if (width < 3 || height < 3) {
        throw ConfigurationError("Moore neighbourhood needs a grid of at least 3x3");
    }
    if (row >= height || col >= width) {
        throw std::out_of_range("cell coordinate outside the grid");
    }
    const std::size_t up = row == 0 ? height - 1 : row - 1;
    const std::size_t down = row + 1 == height ? 0 : row + 1;
    const std::size_t left = col == 0 ? width - 1 : col - 1;
    const std::size_t right = col + 1 == width ? 0 : col + 1;
    return {{{up, left}, {up, col}, {up, right},
             {row, left}, {row, right},
             {down, left}, {down, col}, {down, right}}};
}

inline std::array<Coord, 8> moore_neighbors(std::size_t row, std::size_t col, const Grid& grid)
{
    return moore_neighbors(row, col, grid.width(), grid.height());
}

inline std::size_t busy_count(const Grid& grid) noexcept
{
    std::size_t n = 0;
    for (const auto& cell : grid.cells()) {
        n += cell.is_busy() ? 1 : 0;
    }
    return n;
}

/// All cells Free with independent exponential call countdowns, cycle 0.
inline Grid init_grid(const SimParams& params, Engine& rng)
{
    params.validate();
    Grid grid(params.width, params.height);
    for (auto& cell : grid.cells()) {
        cell = CellState::free(sample_exp_cycles(params.lambda, rng));
    }
    return grid;
}

struct StepOptions {
    /// When true a line whose conversation ended during this cycle's
    /// completion phase can already be called in the same cycle. When false
    /// such lines reject calls until the next cycle.
    bool freed_lines_callable = true;
};

/// Observer hooks for tracing a step. All members are optional in spirit;
/// NullObserver implements them as no-ops.
struct NullObserver {
    void on_completion(std::size_t /*cell*/) {}
    void on_connect(std::size_t /*caller*/, std::size_t /*callee*/, std::int32_t /*duration*/) {}
    void on_denied(std::size_t /*caller*/, std::size_t /*callee*/) {}
};

/// Scratch buffers reused across steps so a run does not allocate per cycle.
struct StepWorkspace {
    std::vector<std::size_t> callers;
    std::vector<std::uint8_t> freed_now;
};

/// Advance the grid by one synchronous cycle.
///
/// Phases, in order:
///   1. every counter decreases by one;
///   2. Busy cells at zero become Free with a fresh call countdown
///      (row-major order of RNG draws);
///   3. Free cells at zero are callers. They are handled in a uniformly
///      random permutation. Each picks one of its 8 neighbours uniformly; a
///      Free addressee (pending callers included) is connected and both ends
///      share one holding time, a Busy addressee denies the call and the
///      caller retries next cycle. A caller already claimed as an addressee
///      earlier in the permutation does not call.
template <typename Observer = NullObserver>
void step(Grid& grid, const SimParams& params, Engine& rng, StepWorkspace& ws,
          Observer&& observer = Observer{}, StepOptions options = {})
{
    const std::size_t n = grid.size();
    auto cells = grid.cells();

    for (auto& cell : cells) {
        cell.tick();
    }

    const bool track_freed = !options.freed_lines_callable;
    if (track_freed) {
        ws.freed_now.assign(n, 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (cells[i].is_busy() && cells[i].counter() == 0) {
            cells[i] = CellState::free(sample_exp_cycles(params.lambda, rng));
            if (track_freed) {
                ws.freed_now[i] = 1;
            }
            observer.on_completion(i);
        }
    }

    ws.callers.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (cells[i].is_free() && cells[i].counter() == 0) {
            ws.callers.push_back(i);
        }
        if (cells[i].counter() < 0) {
            throw std::logic_error("cell counter went negative; grid was not produced by init_grid/step");
        }
    }
    shuffle(std::span<std::size_t>{ws.callers}, rng);

    for (const std::size_t caller : ws.callers) {
        if (cells[caller].is_busy()) {
            continue;  // claimed earlier in this cycle
        }
        const Coord at = grid.coord(caller);
        const auto neighbors = moore_neighbors(at.row, at.col, grid.width(), grid.height());
        const std::size_t callee = grid.index(neighbors[uniform_below(rng, neighbors.size())]);
        const bool reachable = cells[callee].is_free() && !(track_freed && ws.freed_now[callee]);
        if (reachable) {
            const std::int32_t duration = sample_exp_cycles(params.mu, rng);
            cells[caller] = CellState::busy(duration);
            cells[callee] = CellState::busy(duration);
            observer.on_connect(caller, callee, duration);
        } else {
            cells[caller] = CellState::free(1);
            observer.on_denied(caller, callee);
        }
    }

    grid.advance_cycle();
}

template <typename Observer = NullObserver>
void step(Grid& grid, const SimParams& params, Engine& rng, Observer&& observer = Observer{},
          StepOptions options = {})
{
    StepWorkspace ws;
    step(grid, params, rng, ws, std::forward<Observer>(observer), options);
}

/// One realization: grid, its RNG stream, and reusable scratch space.
class Simulation {
public:
    explicit Simulation(const SimParams& params, StepOptions options = {})
        : params_(params),
          options_(options),
          rng_(make_engine(params.seed)),
          grid_(init_grid(params_, rng_))
    {
    }

    template <typename Observer = NullObserver>
    void step(Observer&& observer = Observer{})
    {
        telca::step(grid_, params_, rng_, ws_, std::forward<Observer>(observer), options_);
    }

    const Grid& grid() const noexcept { return grid_; }
    const SimParams& params() const noexcept { return params_; }
    std::size_t busy() const noexcept { return busy_count(grid_); }

private:
    SimParams params_;
    StepOptions options_;
    Engine rng_;
    Grid grid_;
    StepWorkspace ws_;
};

/// Busy count after each of params.cycles steps (burn-in cycles included).
inline std::vector<std::size_t> run(const SimParams& params, StepOptions options = {})
{
    Simulation sim(params, options);
    std::vector<std::size_t> series;
    series.reserve(params.cycles);
    for (std::size_t t = 0; t < params.cycles; ++t) {
        sim.step();
        series.push_back(sim.busy());
    }
    return series;
}

}  // namespace telca
