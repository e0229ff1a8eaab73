#include "curveflow/sampling.hpp"

#include <cmath>
#include <vector>

namespace curveflow {

SpectralField random_field(std::size_t n, double amplitude, std::uint64_t seed,
                           std::uint64_t index, double smoothness) {
  SpectralField u(n);
  NoiseStream(seed, index, StreamTag::probe_fields).normals(0, u.values());
  for (std::size_t k = 1; k <= n; ++k) {
    u[k - 1] *= amplitude / std::pow(static_cast<double>(k), smoothness);
  }
  return u;
}

}  // namespace curveflow
