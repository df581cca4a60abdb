#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpscatter/common.hpp"

namespace gpscatter {

using json = nlohmann::json;

// GPS1 field file: 24-byte header then row-major little-endian f64 payload.
// Header layout: magic "GPS1" (4), dim int32 (4), n-per-axis int32 (4),
// 4 reserved bytes, grid spacing f64 (8).
struct Gps1Field {
  std::int32_t dim = 0;
  std::int32_t n = 0;
  double spacing = 0.0;
  std::vector<double> data;
};

inline void gps1_write(const std::string& path, const Gps1Field& f) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os), ErrorKind::config, "cannot open for write: " + path);
  char header[24] = {0};
  std::memcpy(header, "GPS1", 4);
  std::memcpy(header + 4, &f.dim, 4);
  std::memcpy(header + 8, &f.n, 4);
  std::memcpy(header + 16, &f.spacing, 8);
  os.write(header, 24);
  os.write(reinterpret_cast<const char*>(f.data.data()),
           static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  require(bool(os), ErrorKind::config, "short write: " + path);
}

inline Gps1Field gps1_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), ErrorKind::config, "file not found: " + path);
  char header[24];
  is.read(header, 24);
  require(bool(is) && std::memcmp(header, "GPS1", 4) == 0, ErrorKind::config,
          "not a GPS1 file: " + path);
  Gps1Field f;
  std::memcpy(&f.dim, header + 4, 4);
  std::memcpy(&f.n, header + 8, 4);
  std::memcpy(&f.spacing, header + 16, 8);
  require(f.dim >= 1 && f.dim <= 6 && f.n >= 1, ErrorKind::config,
          "bad GPS1 header: " + path);
  std::size_t count = 1;
  for (int k = 0; k < f.dim; ++k) count *= static_cast<std::size_t>(f.n);
  f.data.resize(count);
  is.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  require(bool(is), ErrorKind::config, "truncated GPS1 payload: " + path);
  return f;
}

inline json json_load(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), ErrorKind::config, "file not found: " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ToolkitError(ErrorKind::config, "bad JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void json_save(const std::string& path, const json& j) {
  std::ofstream os(path);
  require(bool(os), ErrorKind::config, "cannot open for write: " + path);
  os << j.dump(2) << "\n";
}

// Unknown keys in configs are hard errors; every key must be consumed.
inline void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    require(ok, ErrorKind::config, "unknown key '" + it.key() + "' in " + where);
  }
}

inline std::uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), ErrorKind::config, "file not found: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return fnv1a(buf.data(), buf.size());
}

}  // namespace gpscatter
