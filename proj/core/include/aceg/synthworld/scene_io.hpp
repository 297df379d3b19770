#pragma once

#include <filesystem>

#include "aceg/common/binary_io.hpp"
#include "aceg/synthworld/tuple.hpp"

namespace aceg::world {

inline constexpr char kSceneMagic[] = "ACEGSCN1";
inline constexpr std::uint32_t kSceneFormatVersion = 1;

/// Little-endian scene-tuple file:
///   magic | u32 version | str id | u64 seed | f64 query_condition
///   scene:  str id | u64 seed | 6 f64 box | u32 n | u32 k | n*3 f64 points | n*k f64 latents
///   frames: u32 count | per frame { u32 index | 4 f64 K | u32 w | u32 h | 9 f64 R (row-major) | 3 f64 t }
///   split:  u32 count + u32 ids (mapping), same for query
///   renders: three sets (mapping, query, control), each
///            u32 views | per view { u32 frame | f64 condition | u32 n | u32 D |
///                                   per obs { u32 point_id | 2 f64 pixel | D f32 embedding } }
/// Ground-truth points of observations are restored from the point table.
Bytes encode_tuple(const SceneTuple& t);
SceneTuple decode_tuple(std::span<const std::uint8_t> bytes);
void save_tuple(const SceneTuple& t, const std::filesystem::path& path);
SceneTuple load_tuple(const std::filesystem::path& path);

}  // namespace aceg::world
