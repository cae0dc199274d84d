#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpnls/grid.hpp"

// The on-disk layout below is written byte-for-byte, so the writer is only
// correct on little-endian hosts.
static_assert(std::endian::native == std::endian::little,
              "wavefunction snapshots require a little-endian host");

namespace qpnls {
namespace {

constexpr char kMagic[8] = {'Q', 'P', 'W', 'F', '0', '0', '0', '1'};

void write_raw(std::ofstream& out, const void* p, std::size_t bytes) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* p, std::size_t bytes) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw std::runtime_error("snapshot: truncated file");
}

}  // namespace

void save_wavefunction(const WaveFunction& psi, const std::string& path) {
  const Grid& g = *psi.grid;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);

  write_raw(out, kMagic, sizeof(kMagic));
  const std::uint32_t n = static_cast<std::uint32_t>(g.n());
  write_raw(out, &n, sizeof(n));
  for (int j = 0; j < g.n(); ++j) {
    const std::uint64_t pts = static_cast<std::uint64_t>(g.points(j));
    write_raw(out, &pts, sizeof(pts));
  }
  for (int j = 0; j < g.n(); ++j) {
    const double ext = g.extent(j);
    write_raw(out, &ext, sizeof(ext));
  }
  write_raw(out, psi.amp.data(),
            psi.amp.size() * sizeof(std::complex<double>));
  out.flush();
  if (!out) throw std::runtime_error("snapshot: write failed for " + path);

  nlohmann::json side;
  side["format"] = "qpnls-wavefunction";
  side["version"] = 1;
  side["byte_order"] = "little";
  side["scalar"] = "complex128 (interleaved re,im float64)";
  side["layout"] = "row-major, last axis contiguous";
  side["dimension"] = g.n();
  side["points"] = nlohmann::json::array();
  side["extents"] = nlohmann::json::array();
  side["spacings"] = nlohmann::json::array();
  for (int j = 0; j < g.n(); ++j) {
    side["points"].push_back(g.points(j));
    side["extents"].push_back(g.extent(j));
    side["spacings"].push_back(g.spacing(j));
  }
  side["samples"] = g.size();
  side["header_bytes"] = sizeof(kMagic) + sizeof(std::uint32_t) +
                         g.n() * (sizeof(std::uint64_t) + sizeof(double));
  std::ofstream meta(path + ".json", std::ios::trunc);
  if (!meta) throw std::runtime_error("snapshot: cannot open " + path + ".json");
  meta << side.dump(2) << "\n";
}

WaveFunction load_wavefunction(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);

  char magic[8];
  read_raw(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path);

  std::uint32_t n = 0;
  read_raw(in, &n, sizeof(n));
  if (n == 0 || n > 16)
    throw std::runtime_error("snapshot: implausible dimension in " + path);

  std::vector<int> points(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    std::uint64_t pts = 0;
    read_raw(in, &pts, sizeof(pts));
    if (pts == 0 || pts > static_cast<std::uint64_t>(1) << 30)
      throw std::runtime_error("snapshot: implausible point count in " + path);
    points[j] = static_cast<int>(pts);
  }
  std::vector<double> extents(n);
  for (std::uint32_t j = 0; j < n; ++j) read_raw(in, &extents[j], sizeof(double));

  auto grid = std::make_shared<const Grid>(points, extents);
  WaveFunction psi(grid);
  read_raw(in, psi.amp.data(), psi.amp.size() * sizeof(std::complex<double>));
  return psi;
}

}  // namespace qpnls
