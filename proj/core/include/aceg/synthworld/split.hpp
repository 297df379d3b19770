#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aceg::world {

enum class SplitScheme { Interspersed, QueryMappingQuery };

std::string to_string(SplitScheme s);
SplitScheme parse_split_scheme(const std::string& s);

struct SplitConfig {
  SplitScheme scheme = SplitScheme::QueryMappingQuery;
  int mapping_len_lo = 4;  // interspersed mapping interval lengths
  int mapping_len_hi = 10;
  int query_len_lo = 4;    // query interval lengths (both schemes)
  int query_len_hi = 9;
  bool random_rotation = false;  // tuple-level augmentation at synthesis time
  bool mirror = false;

  void validate() const;
};

struct Split {
  std::vector<int> mapping;  // sorted frame indices
  std::vector<int> query;
};

/// Disjoint mapping/query frame sets. Query-mapping-query draws two query
/// end intervals and keeps the middle for mapping (ends are shortened when
/// the sequence is too short to leave a mapping frame). Interspersed
/// alternates intervals of random length starting with a random role.
Split sample_split(int n_frames, const SplitConfig& cfg, std::uint64_t seed);

}  // namespace aceg::world
