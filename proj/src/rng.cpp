#include "curveflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace curveflow {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0,1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += philox_w0;
      key[1] += philox_w1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(philox_m0, ctr[0], hi0, lo0);
    mulhilo(philox_m1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t trajectory, StreamTag tag)
    : seed_(seed),
      trajectory_(trajectory),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      lane_(static_cast<std::uint32_t>(tag)) {}

// Counter layout: {block, step, trajectory low 32 bits, tag << 24 | trajectory bits 32..55}.
void NoiseStream::uniforms(std::uint64_t step, std::span<double> out) const {
  const std::uint32_t t_lo = static_cast<std::uint32_t>(trajectory_);
  const std::uint32_t t_hi =
      (lane_ << 24) | (static_cast<std::uint32_t>(trajectory_ >> 32) & 0x00FFFFFFu);
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto r = philox4x32({static_cast<std::uint32_t>(j / 2),
                               static_cast<std::uint32_t>(step), t_lo, t_hi},
                              key_);
    out[j] = to_open_unit(r[0], r[1]);
    if (j + 1 < out.size()) out[j + 1] = to_open_unit(r[2], r[3]);
  }
}

void NoiseStream::normals(std::uint64_t step, std::span<double> out) const {
  const std::uint32_t t_lo = static_cast<std::uint32_t>(trajectory_);
  const std::uint32_t t_hi =
      (lane_ << 24) | (static_cast<std::uint32_t>(trajectory_ >> 32) & 0x00FFFFFFu);
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto r = philox4x32({static_cast<std::uint32_t>(j / 2),
                               static_cast<std::uint32_t>(step), t_lo, t_hi},
                              key_);
    // Box-Muller on one block.
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = radius * std::cos(angle);
    if (j + 1 < out.size()) out[j + 1] = radius * std::sin(angle);
  }
}

}  // namespace curveflow
