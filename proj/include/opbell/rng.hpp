#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "opbell/errors.hpp"

namespace opbell {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Steele/Lea/Flood constants).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Per-trial seed derivation: one splitmix64 step of the campaign seed offset
// by the trial index. Stable across platforms and thread schedules.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return detail::mix64(seed + detail::kGolden * (index + 1));
}

// Deterministic stream generator. std::normal_distribution is
// implementation-defined, so gaussians come from Box-Muller instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform in {0, ..., n-1}; modulo bias is irrelevant at these ranges
    int uniform_int(int n) {
        if (n <= 0) throw InvalidArgument("uniform_int: n must be positive");
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    std::vector<double> gaussian_vector(int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = gaussian();
        return v;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace opbell
