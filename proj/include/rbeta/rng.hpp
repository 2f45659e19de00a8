#pragma once

// Counter-based random numbers: Philox4x32-10 keyed by the run seed, with
// the counter carrying (draw block, path, stream). A path's draws depend
// only on (seed, path, stream), never on scheduling.

#include <array>
#include <cstdint>

namespace rbeta::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
Counter philox4x32_10(Counter counter, Key key) noexcept;

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream = 0) noexcept;

    /// Raw 64-bit draw.
    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    /// Standard normal (Box-Muller; the second variate is cached).
    double normal() noexcept;

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    Key key_;
    std::uint32_t path_lo_;
    std::uint32_t stream_;
    std::uint64_t block_ = 0;
    Counter buffer_{};
    int used_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// Student-t draw with `dof` degrees of freedom rescaled by
/// sqrt((dof - 2) / dof) so its standard deviation equals target_std.
double student_t_scaled(int dof, double target_std, Stream& rng);

/// Daily Euler step of a zero-mean Ornstein-Uhlenbeck process:
/// x (1 - 1 / relaxation) + volvol N(0, 1).
double ou_step(double x, double relaxation_days, double volvol, Stream& rng);

/// Stationary variance volvol^2 / (1 - (1 - 1/relaxation)^2) of ou_step.
double ou_stationary_variance(double relaxation_days, double volvol);

}  // namespace rbeta::rng
