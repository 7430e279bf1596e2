#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

// Counter-based random streams: Philox4x32-10 (Salmon et al., "Parallel
// random numbers: as easy as 1, 2, 3", SC'11). Every Gaussian increment is a
// pure function of (seed, particle, step, index), which makes results
// independent of how particles are distributed over threads.

namespace dirsim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Step counter value reserved for initial-condition sampling.
inline constexpr std::uint32_t kInitialConditionStep = 0xFFFFFFFFu;

/// Stream of 32-bit blocks addressed by (seed, particle, step).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t particle, std::uint32_t step)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        particle_lo_(static_cast<std::uint32_t>(particle)),
        particle_hi_(static_cast<std::uint32_t>(particle >> 32)),
        step_(step) {}

  /// Block `index` of the stream: four 32-bit words.
  PhiloxCounter block(std::uint32_t index) const {
    return philox4x32({index, step_, particle_lo_, particle_hi_}, key_);
  }

 private:
  PhiloxKey key_;
  std::uint32_t particle_lo_, particle_hi_, step_;
};

/// Uniform in (0, 1] from 53 high bits; never zero, so safe under log.
inline double uniform_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double uniform_closed_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Fills `out` with i.i.d. standard normals via Box-Muller; each Philox block
/// yields one pair.
inline void fill_standard_normal(const CounterStream& stream, std::span<double> out) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; i += 2) {
    const auto w = stream.block(static_cast<std::uint32_t>(i / 2));
    const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed(w[0], w[1])));
    const double angle = 2.0 * std::numbers::pi * uniform_closed_open(w[2], w[3]);
    out[i] = radius * std::cos(angle);
    if (i + 1 < n) out[i + 1] = radius * std::sin(angle);
  }
}

struct WienerIncrement {
  std::vector<double> dw;
};

/// Independent Normal(0, dt) components, deterministic in (seed, particle, step).
inline WienerIncrement generate_increments(std::uint64_t seed, std::uint64_t particle,
                                           std::uint32_t step, std::size_t dim, double dt) {
  WienerIncrement inc{std::vector<double>(dim)};
  fill_standard_normal(CounterStream(seed, particle, step), inc.dw);
  const double scale = std::sqrt(dt);
  for (double& v : inc.dw) v *= scale;
  return inc;
}

}  // namespace dirsim
