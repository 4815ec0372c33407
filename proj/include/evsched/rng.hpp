#ifndef EVSCHED_RNG_HPP
#define EVSCHED_RNG_HPP

#include <cstdint>
#include <random>

namespace evsched {

/// Seedable, portable uniform draws on top of std::mt19937_64, whose output
/// sequence is fixed by the standard. Doubles are built as (x >> 11) * 2^-53,
/// so every draw is reproducible from the seed alone, on any platform.
/// Scenario files record the generator name so an instance can be rebuilt
/// elsewhere.
class Rng {
public:
    static constexpr const char* kName = "mt19937_64/raw53";

    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi], both ends inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform01() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

} // namespace evsched

#endif // EVSCHED_RNG_HPP
