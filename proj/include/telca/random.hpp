#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace telca {

/// Engine behind every simulation stream. mt19937_64 output is fixed by the
/// standard, so all draws below are reproducible across standard libraries.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; spreads consecutive user seeds over the state space.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Engine make_engine(std::uint64_t seed)
{
    return Engine{mix_seed(seed)};
}

/// Uniform double in (0, 1] with 53 random bits.
inline double uniform_open_closed(Engine& rng)
{
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return static_cast<double>((rng() >> 11) + 1) * scale;
}

/// Unbiased integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_below(Engine& rng, std::uint64_t bound)
{
    // Rejection on the top of the range; std::uniform_int_distribution is
    // implementation-defined and would break cross-platform determinism.
    const std::uint64_t limit = Engine::max() - (Engine::max() % bound + 1) % bound;
    std::uint64_t x = rng();
    while (x > limit) {
        x = rng();
    }
    return x % bound;
}

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void shuffle(std::span<T> items, Engine& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace telca
