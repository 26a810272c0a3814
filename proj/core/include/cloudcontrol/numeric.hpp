#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cloudcontrol {

inline constexpr double kDefaultZeroTolerance = 1e-9;
inline constexpr double kDefaultFixedPointTolerance = 1e-9;

/// Sign of x with a dead zone: +1 above tol, -1 below -tol, 0 inside.
/// All floating-point sign decisions in the solvers go through this.
inline int sign_with_tolerance(double x, double tol) {
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
}

/// Compensated (Kahan) summation for order-insensitive aggregation.
class KahanSum {
public:
    void add(double x) {
        const double y = x - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// FNV-1a 64-bit hash, used for scenario provenance fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 step; used to derive independent per-replication seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cloudcontrol
