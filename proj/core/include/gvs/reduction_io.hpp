#pragma once

#include <cstdint>
#include <string>

#include "gvs/reduction.hpp"

namespace gvs {

// 64-bit FNV-1a; used to tag files with the configuration they came from.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

// Provenance written into both file kinds.
struct FileHeader {
  std::string config_hash;  // hex, empty if unknown
  std::uint64_t seed = 0;
};

// Text formats, every value printed with %.17g so a load/save cycle is exact.
//   GVSSNAP 1   : layout, rows, cols, abscissae, meta, data (one snapshot per line)
//   GVSMODES 1  : layout, rows, n, sigma (full spectrum), abscissae, q_min,
//                 q_max, meta, modes (one mode per line)
void write_snapshots(const std::string& path, const SnapshotMatrix& snapshots, const FileHeader& header = {});
SnapshotMatrix read_snapshots(const std::string& path, FileHeader* header = nullptr);

struct ModeFile {
  ReducedBasis basis;
  Eigen::VectorXd sigma_all;  // full spectrum; basis.sigma is its head
  std::map<std::string, std::string> metadata;
  FileHeader header;
};

void write_modes(const std::string& path, const ModeFile& modes);
ModeFile read_modes(const std::string& path);

}  // namespace gvs
