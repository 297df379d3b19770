#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aceg/common/kv.hpp"

namespace aceg::buf {

/// One scene tuple: its scene file and its M and Q buffers. Paths are
/// relative to the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string scene;
  std::string mapping;
  std::string query;
  std::string split;  // "train" or "test"
};

/// Key-value listing of the buffers of a synthesized world:
///   tuples = N
///   tuple.<i>.id / .scene / .M / .Q / .split
/// plus free-form metadata (seeds, world config) carried in `meta`.
struct Manifest {
  std::vector<ManifestEntry> entries;
  KeyValues meta;

  KeyValues to_kv() const;
  static Manifest from_kv(const KeyValues& kv);
  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);

  std::vector<const ManifestEntry*> with_split(const std::string& split) const;
};

}  // namespace aceg::buf
