#include "aceg/buffers/buffer_io.hpp"

#include "aceg/common/error.hpp"

namespace aceg::buf {

namespace {

constexpr std::size_t kCameraBytes = 4 + 4 * 8 + 4 + 4 + 12 * 8;

void check_payload(ByteReader& r, std::uint64_t n, std::uint64_t per_record) {
  if (n > (1ULL << 40) || n * per_record != r.remaining()) {
    throw LengthMismatchError("buffer payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                              std::to_string(n * per_record));
  }
}

}  // namespace

Bytes encode_buffer(const PretrainBuffer& b) {
  const auto n = b.size();
  if (b.points.rows() != n || b.points.cols() != 3 || static_cast<std::int64_t>(b.frames.size()) != n) {
    throw ShapeError("pretrain buffer columns disagree on record count");
  }
  ByteWriter w;
  w.magic(std::string_view(kBufferMagic, 8));
  w.u32(static_cast<std::uint32_t>(BufferSchema::Pretrain));
  w.str(b.scene_id);
  w.u8(static_cast<std::uint8_t>(b.role));
  w.u64(b.seed);
  w.u64(static_cast<std::uint64_t>(n));
  w.u32(static_cast<std::uint32_t>(b.embeddings.cols()));
  w.f32s(std::span(b.embeddings.data(), static_cast<std::size_t>(b.embeddings.size())));
  w.f32s(std::span(b.points.data(), static_cast<std::size_t>(b.points.size())));
  for (auto f : b.frames) w.u32(static_cast<std::uint32_t>(f));
  return w.take();
}

Bytes encode_buffer(const NovelSceneBuffer& b) {
  const auto n = b.size();
  if (b.pixels.rows() != n || b.pixels.cols() != 2 || static_cast<std::int64_t>(b.camera_index.size()) != n) {
    throw ShapeError("novel buffer columns disagree on record count");
  }
  ByteWriter w;
  w.magic(std::string_view(kBufferMagic, 8));
  w.u32(static_cast<std::uint32_t>(BufferSchema::Novel));
  w.str(b.scene_id);
  w.u64(b.seed);
  w.f64(b.depth_prior);
  w.u32(static_cast<std::uint32_t>(b.cameras.size()));
  for (const auto& c : b.cameras) {
    w.u32(static_cast<std::uint32_t>(c.index));
    w.f64(c.K.fx);
    w.f64(c.K.fy);
    w.f64(c.K.cx);
    w.f64(c.K.cy);
    w.u32(static_cast<std::uint32_t>(c.width));
    w.u32(static_cast<std::uint32_t>(c.height));
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) w.f64(c.T_wc.R(r, k));
    }
    for (int i = 0; i < 3; ++i) w.f64(c.T_wc.t[i]);
  }
  w.u64(static_cast<std::uint64_t>(n));
  w.u32(static_cast<std::uint32_t>(b.embeddings.cols()));
  w.f32s(std::span(b.embeddings.data(), static_cast<std::size_t>(b.embeddings.size())));
  w.f64s(std::span(b.pixels.data(), static_cast<std::size_t>(b.pixels.size())));
  for (auto i : b.camera_index) w.u32(static_cast<std::uint32_t>(i));
  return w.take();
}

BufferSchema peek_schema(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kBufferMagic, 8));
  const auto tag = r.u32();
  if (tag != 1 && tag != 2) throw FormatError("unknown buffer schema tag " + std::to_string(tag));
  return static_cast<BufferSchema>(tag);
}

PretrainBuffer decode_pretrain_buffer(std::span<const std::uint8_t> bytes) {
  if (peek_schema(bytes) != BufferSchema::Pretrain) throw FormatError("expected a pretrain buffer");
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kBufferMagic, 8));
  r.u32();
  PretrainBuffer b;
  b.scene_id = r.str();
  const auto role = r.u8();
  if (role > 1) throw FormatError("bad buffer role");
  b.role = static_cast<BufferRole>(role);
  b.seed = r.u64();
  const auto n = r.u64();
  const auto D = r.u32();
  check_payload(r, n, 4ULL * D + 12 + 4);
  b.embeddings.resize(static_cast<Eigen::Index>(n), D);
  b.points.resize(static_cast<Eigen::Index>(n), 3);
  r.f32s(std::span(b.embeddings.data(), static_cast<std::size_t>(b.embeddings.size())));
  r.f32s(std::span(b.points.data(), static_cast<std::size_t>(b.points.size())));
  b.frames.resize(n);
  for (auto& f : b.frames) f = static_cast<std::int32_t>(r.u32());
  r.expect_end();
  return b;
}

NovelSceneBuffer decode_novel_buffer(std::span<const std::uint8_t> bytes) {
  if (peek_schema(bytes) != BufferSchema::Novel) throw FormatError("expected a novel-scene buffer");
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kBufferMagic, 8));
  r.u32();
  NovelSceneBuffer b;
  b.scene_id = r.str();
  b.seed = r.u64();
  b.depth_prior = r.f64();
  const auto cams = r.u32();
  if (static_cast<std::uint64_t>(cams) * kCameraBytes > r.remaining()) {
    throw LengthMismatchError("truncated camera table");
  }
  b.cameras.resize(cams);
  for (auto& c : b.cameras) {
    c.index = static_cast<int>(r.u32());
    c.K.fx = r.f64();
    c.K.fy = r.f64();
    c.K.cx = r.f64();
    c.K.cy = r.f64();
    c.width = static_cast<int>(r.u32());
    c.height = static_cast<int>(r.u32());
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) c.T_wc.R(i, k) = r.f64();
    }
    for (int i = 0; i < 3; ++i) c.T_wc.t[i] = r.f64();
  }
  const auto n = r.u64();
  const auto D = r.u32();
  check_payload(r, n, 4ULL * D + 16 + 4);
  b.embeddings.resize(static_cast<Eigen::Index>(n), D);
  b.pixels.resize(static_cast<Eigen::Index>(n), 2);
  r.f32s(std::span(b.embeddings.data(), static_cast<std::size_t>(b.embeddings.size())));
  r.f64s(std::span(b.pixels.data(), static_cast<std::size_t>(b.pixels.size())));
  b.camera_index.resize(n);
  for (auto& i : b.camera_index) {
    i = static_cast<std::int32_t>(r.u32());
    if (static_cast<std::uint32_t>(i) >= cams) throw FormatError("camera index out of range");
  }
  r.expect_end();
  return b;
}

void save_buffer(const PretrainBuffer& b, const std::filesystem::path& path) { write_file(path, encode_buffer(b)); }
void save_buffer(const NovelSceneBuffer& b, const std::filesystem::path& path) { write_file(path, encode_buffer(b)); }
PretrainBuffer load_pretrain_buffer(const std::filesystem::path& path) { return decode_pretrain_buffer(read_file(path)); }
NovelSceneBuffer load_novel_buffer(const std::filesystem::path& path) { return decode_novel_buffer(read_file(path)); }

}  // namespace aceg::buf
