#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aceg/autodiff/tensor.hpp"
#include "aceg/common/binary_io.hpp"

namespace aceg::reg {

inline constexpr char kMapCodeMagic[] = "ACEGMAP1";

/// Scene-specific set of N_C learnable D_map-dimensional tokens. Row order
/// carries no meaning to the regressor.
struct MapCode {
  std::string scene_id;
  std::uint64_t iteration = 0;
  double scale = 1.0;  // scene units per metre-like unit, recorded only
  ad::Matrix<float> tokens;

  std::int64_t num_tokens() const { return tokens.rows(); }
  std::int64_t dim() const { return tokens.cols(); }
};

/// i.i.d. N(0, 0.01^2) tokens, deterministic per seed.
MapCode init_map_code(std::int64_t num_tokens, std::int64_t dim, std::uint64_t seed, std::string scene_id = {});

/// "ACEGMAP1" | u32 N_C | u32 D_map | str scene_id | u64 iteration | f64 scale | N_C*D_map f32 (row-major)
Bytes encode_map_code(const MapCode& code);
MapCode decode_map_code(std::span<const std::uint8_t> bytes);
void save_map_code(const MapCode& code, const std::filesystem::path& path);
MapCode load_map_code(const std::filesystem::path& path);

/// Size of the f32 token payload in bytes.
inline std::uint64_t map_code_payload_bytes(std::int64_t num_tokens, std::int64_t dim) {
  return static_cast<std::uint64_t>(num_tokens) * static_cast<std::uint64_t>(dim) * sizeof(float);
}

}  // namespace aceg::reg
