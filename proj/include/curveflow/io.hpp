#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "curveflow/integrator.hpp"

namespace curveflow::io {

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// "time,norm_H,norm_V,norm_Vstar,norm_W11", one row per recorded time.
std::string trajectory_csv(const Trajectory& traj);

/// [{"t": ..., "coeffs": [...]}, ...]
nlohmann::json state_snapshots(const Trajectory& traj);

/// Binary state dump, all fields little-endian:
///   uint64 n, uint64 count, float64 dt, then count * n float64
///   coefficients, state-major (state r occupies doubles [r n, (r+1) n)).
/// `dt` is the spacing of recorded states (solver dt times record_every).
struct StateDump {
  std::size_t n = 0;
  std::size_t count = 0;
  double dt = 0.0;
  std::vector<double> data;
};

std::string encode_state_dump(const StateDump& dump);
StateDump decode_state_dump(std::string_view bytes);
StateDump dump_of(const Trajectory& traj);

}  // namespace curveflow::io
