#pragma once

#include <cstddef>
#include <cstdint>

#include "curveflow/rng.hpp"
#include "curveflow/spectral_space.hpp"

namespace curveflow {

/// Random probe field with c_k = amplitude xi_k / k^smoothness, drawn from
/// the probe-field lane of `seed` at position `index`.
SpectralField random_field(std::size_t n, double amplitude, std::uint64_t seed,
                           std::uint64_t index, double smoothness = 1.0);

}  // namespace curveflow
