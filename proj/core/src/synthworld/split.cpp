#include "aceg/synthworld/split.hpp"

#include <algorithm>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::world {

std::string to_string(SplitScheme s) {
  return s == SplitScheme::Interspersed ? "interspersed" : "query-mapping-query";
}

SplitScheme parse_split_scheme(const std::string& s) {
  if (s == "interspersed") return SplitScheme::Interspersed;
  if (s == "query-mapping-query" || s == "qmq") return SplitScheme::QueryMappingQuery;
  throw ConfigError("unknown split scheme '" + s + "'");
}

void SplitConfig::validate() const {
  if (mapping_len_lo < 1 || mapping_len_lo > mapping_len_hi || query_len_lo < 1 || query_len_lo > query_len_hi) {
    throw ConfigError("split interval ranges must satisfy 1 <= lo <= hi");
  }
}

Split sample_split(int n_frames, const SplitConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (n_frames < 4) throw PreconditionError("split needs at least 4 frames");
  Rng rng = make_rng(seed, {0x73706c6974ULL});
  Split s;
  if (cfg.scheme == SplitScheme::QueryMappingQuery) {
    auto a = static_cast<int>(uniform_int(rng, cfg.query_len_lo, cfg.query_len_hi));
    auto b = static_cast<int>(uniform_int(rng, cfg.query_len_lo, cfg.query_len_hi));
    while (a + b > n_frames - 1) {
      if (a >= b) --a; else --b;
    }
    a = std::max(a, 1);
    b = std::max(b, 1);
    for (int i = 0; i < n_frames; ++i) (i < a || i >= n_frames - b ? s.query : s.mapping).push_back(i);
  } else {
    bool mapping = uniform_int(rng, 0, 1) == 0;
    int i = 0;
    while (i < n_frames) {
      const int len = mapping ? static_cast<int>(uniform_int(rng, cfg.mapping_len_lo, cfg.mapping_len_hi))
                              : static_cast<int>(uniform_int(rng, cfg.query_len_lo, cfg.query_len_hi));
      for (int j = 0; j < len && i < n_frames; ++j, ++i) (mapping ? s.mapping : s.query).push_back(i);
      mapping = !mapping;
    }
  }
  if (s.mapping.empty() || s.query.empty()) throw PreconditionError("split left the mapping or query set empty");
  return s;
}

}  // namespace aceg::world
