#pragma once

// Flat parameter checkpoint:
//   "SAILORCK" | u32 version | u32 entry count
//   entries: u32 name length | name bytes | u64 rows | u64 cols | u64 offset (in doubles)
//   u64 total doubles | f64 payload
// All integers and floats little-endian.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"

namespace sailor::num {

inline constexpr char kCheckpointMagic[8] = {'S', 'A', 'I', 'L', 'O', 'R', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedMatrix {
  std::string name;
  DenseMatrix value;
};

namespace detail {
template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ValidationError("checkpoint: truncated while reading " + what);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}
}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedMatrix>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("checkpoint: cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_le<std::uint32_t>(out, kCheckpointVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    detail::write_le<std::uint64_t>(out, e.value.rows());
    detail::write_le<std::uint64_t>(out, e.value.cols());
    detail::write_le<std::uint64_t>(out, offset);
    offset += e.value.size();
  }
  detail::write_le<std::uint64_t>(out, offset);
  for (const auto& e : entries)
    for (double v : e.value.values()) detail::write_le<double>(out, v);
  if (!out) throw ValidationError("checkpoint: write failed for " + path.string());
}

inline std::vector<NamedMatrix> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("checkpoint: cannot open " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ValidationError("checkpoint: bad header magic in " + path.string());
  }
  const auto version = detail::read_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw ValidationError("checkpoint: unsupported header version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = detail::read_le<std::uint32_t>(in, "entry count");
  struct IndexEntry {
    std::string name;
    std::uint64_t rows, cols, offset;
  };
  std::vector<IndexEntry> index;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = detail::read_le<std::uint32_t>(in, "name length");
    if (len > 4096) throw ValidationError("checkpoint: implausible name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ValidationError("checkpoint: truncated name");
    const auto rows = detail::read_le<std::uint64_t>(in, "rows");
    const auto cols = detail::read_le<std::uint64_t>(in, "cols");
    const auto offset = detail::read_le<std::uint64_t>(in, "offset");
    index.push_back({std::move(name), rows, cols, offset});
  }
  const auto total = detail::read_le<std::uint64_t>(in, "payload size");
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  if (remaining != total * sizeof(double)) {
    throw ValidationError("checkpoint: payload size does not match header in " + path.string());
  }
  std::vector<double> payload(total);
  for (auto& v : payload) v = detail::read_le<double>(in, "payload");
  std::vector<NamedMatrix> out;
  for (const auto& e : index) {
    if (e.offset + e.rows * e.cols > total) throw ValidationError("checkpoint: entry exceeds payload");
    std::vector<double> data(payload.begin() + static_cast<std::ptrdiff_t>(e.offset),
                             payload.begin() + static_cast<std::ptrdiff_t>(e.offset + e.rows * e.cols));
    out.push_back({e.name, DenseMatrix(e.rows, e.cols, std::move(data))});
  }
  return out;
}

}  // namespace sailor::num
