#include "rbeta/rng.hpp"

#include <cmath>
#include <numbers>

#include "rbeta/errors.hpp"

namespace rbeta::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Counter philox4x32_10(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0;
        std::uint32_t lo0;
        std::uint32_t hi1;
        std::uint32_t lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

Stream::Stream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      path_lo_(static_cast<std::uint32_t>(path)),
      stream_(stream ^ (static_cast<std::uint32_t>(path >> 32) << 16)) {}

std::uint64_t Stream::next_u64() noexcept {
    if (used_ >= 4) {
        const Counter ctr = {static_cast<std::uint32_t>(block_),
                             static_cast<std::uint32_t>(block_ >> 32), path_lo_, stream_};
        buffer_ = philox4x32_10(ctr, key_);
        ++block_;
        used_ = 0;
    }
    const std::uint64_t hi = buffer_[used_];
    const std::uint64_t lo = buffer_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double Stream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

double student_t_scaled(int dof, double target_std, Stream& rng) {
    if (dof <= 2) {
        throw ConfigError("student_t_scaled: degrees of freedom must exceed 2");
    }
    const double z = rng.normal();
    double chi2 = 0.0;
    for (int k = 0; k < dof; ++k) {
        const double g = rng.normal();
        chi2 += g * g;
    }
    const double t = z / std::sqrt(chi2 / dof);
    return t * std::sqrt((dof - 2.0) / dof) * target_std;
}

double ou_step(double x, double relaxation_days, double volvol, Stream& rng) {
    if (!(relaxation_days > 0.0)) {
        throw ConfigError("ou_step: relaxation must be positive");
    }
    return x * (1.0 - 1.0 / relaxation_days) + volvol * rng.normal();
}

double ou_stationary_variance(double relaxation_days, double volvol) {
    if (!(relaxation_days > 0.5)) {
        throw ConfigError("ou_stationary_variance: relaxation must exceed half a day");
    }
    const double phi = 1.0 - 1.0 / relaxation_days;
    return volvol * volvol / (1.0 - phi * phi);
}

}  // namespace rbeta::rng
