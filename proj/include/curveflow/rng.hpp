#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace curveflow {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Stream tags keep draws for different purposes disjoint under one seed.
enum class StreamTag : std::uint32_t {
  noise = 0,
  independent_noise = 1,
  probe_fields = 2,
};

/// A counter-addressed stream of standard normals. Draw j of step m is a
/// pure function of (seed, tag, trajectory, m, j), so consumption order and
/// worker count cannot change any value.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t trajectory, StreamTag tag = StreamTag::noise);

  /// Fills out[j] with draw j of step `step`.
  void normals(std::uint64_t step, std::span<double> out) const;

  /// Uniforms in (0,1), same addressing.
  void uniforms(std::uint64_t step, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t trajectory() const { return trajectory_; }

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
  std::array<std::uint32_t, 2> key_;
  std::uint32_t lane_;
};

}  // namespace curveflow
