#pragma once

#include <filesystem>

#include "aceg/buffers/buffers.hpp"
#include "aceg/common/binary_io.hpp"

namespace aceg::buf {

inline constexpr char kBufferMagic[] = "ACEGBUF1";

enum class BufferSchema : std::uint32_t { Pretrain = 1, Novel = 2 };

/// "ACEGBUF1" | u32 schema | schema body, little-endian.
///   pretrain: str scene_id | u8 role | u64 seed | u64 n | u32 D |
///             n*D f32 embeddings | n*3 f32 points | n u32 frames
///   novel:    str scene_id | u64 seed | f64 d0 | u32 cameras |
///             cameras x { u32 index | 4 f64 K | u32 w | u32 h | 9 f64 R | 3 f64 t } |
///             u64 n | u32 D | n*D f32 embeddings | n*2 f64 pixels | n u32 camera index
Bytes encode_buffer(const PretrainBuffer& b);
Bytes encode_buffer(const NovelSceneBuffer& b);

/// Schema tag of an encoded buffer (validates the magic).
BufferSchema peek_schema(std::span<const std::uint8_t> bytes);
PretrainBuffer decode_pretrain_buffer(std::span<const std::uint8_t> bytes);
NovelSceneBuffer decode_novel_buffer(std::span<const std::uint8_t> bytes);

void save_buffer(const PretrainBuffer& b, const std::filesystem::path& path);
void save_buffer(const NovelSceneBuffer& b, const std::filesystem::path& path);
PretrainBuffer load_pretrain_buffer(const std::filesystem::path& path);
NovelSceneBuffer load_novel_buffer(const std::filesystem::path& path);

}  // namespace aceg::buf
