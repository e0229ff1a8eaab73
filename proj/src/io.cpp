#include "curveflow/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace curveflow::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::string_view in, std::size_t offset) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  out << "time,norm_H,norm_V,norm_Vstar,norm_W11\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const auto& f = traj.functionals[r];
    out << traj.times[r] << ',' << f.norm_H << ',' << f.norm_V << ',' << f.norm_Vstar << ','
        << f.norm_W11 << '\n';
  }
  return out.str();
}

nlohmann::json state_snapshots(const Trajectory& traj) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out.push_back({{"t", traj.times[r]}, {"coeffs", to_json(traj.states[r])}});
  }
  return out;
}

std::string encode_state_dump(const StateDump& dump) {
  if (dump.data.size() != dump.n * dump.count) {
    throw std::invalid_argument("state dump payload size differs from n * count");
  }
  std::string out;
  out.reserve(24 + 8 * dump.data.size());
  put_le<std::uint64_t>(out, dump.n);
  put_le<std::uint64_t>(out, dump.count);
  put_le<double>(out, dump.dt);
  for (double v : dump.data) put_le<double>(out, v);
  return out;
}

StateDump decode_state_dump(std::string_view bytes) {
  if (bytes.size() < 24) throw std::invalid_argument("state dump shorter than its header");
  StateDump dump;
  dump.n = get_le<std::uint64_t>(bytes, 0);
  dump.count = get_le<std::uint64_t>(bytes, 8);
  dump.dt = get_le<double>(bytes, 16);
  const std::size_t values = dump.n * dump.count;
  if (dump.n != 0 && values / dump.n != dump.count) {
    throw std::invalid_argument("state dump header overflows");
  }
  if (bytes.size() != 24 + 8 * values) {
    throw std::invalid_argument("state dump size does not match its header");
  }
  dump.data.resize(values);
  for (std::size_t i = 0; i < values; ++i) dump.data[i] = get_le<double>(bytes, 24 + 8 * i);
  return dump;
}

StateDump dump_of(const Trajectory& traj) {
  StateDump dump;
  dump.n = traj.config.n;
  dump.count = traj.states.size();
  dump.dt = traj.config.dt * static_cast<double>(traj.config.record_every);
  dump.data.reserve(dump.n * dump.count);
  for (const auto& s : traj.states) {
    if (s.dim() != dump.n) throw std::invalid_argument("trajectory state has the wrong dimension");
    dump.data.insert(dump.data.end(), s.vector().begin(), s.vector().end());
  }
  return dump;
}

}  // namespace curveflow::io
