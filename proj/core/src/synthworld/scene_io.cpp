#include "aceg/synthworld/scene_io.hpp"

#include "aceg/common/error.hpp"

namespace aceg::world {

namespace {

void write_frame(ByteWriter& w, const CameraFrame& f) {
  w.u32(static_cast<std::uint32_t>(f.index));
  w.f64(f.K.fx);
  w.f64(f.K.fy);
  w.f64(f.K.cx);
  w.f64(f.K.cy);
  w.u32(static_cast<std::uint32_t>(f.width));
  w.u32(static_cast<std::uint32_t>(f.height));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) w.f64(f.T_wc.R(r, c));
  }
  for (int i = 0; i < 3; ++i) w.f64(f.T_wc.t[i]);
}

CameraFrame read_frame(ByteReader& r) {
  CameraFrame f;
  f.index = static_cast<int>(r.u32());
  f.K.fx = r.f64();
  f.K.fy = r.f64();
  f.K.cx = r.f64();
  f.K.cy = r.f64();
  f.width = static_cast<int>(r.u32());
  f.height = static_cast<int>(r.u32());
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) f.T_wc.R(i, c) = r.f64();
  }
  for (int i = 0; i < 3; ++i) f.T_wc.t[i] = r.f64();
  return f;
}

void write_ids(ByteWriter& w, const std::vector<int>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (int i : ids) w.u32(static_cast<std::uint32_t>(i));
}

std::vector<int> read_ids(ByteReader& r, std::size_t limit) {
  const auto n = r.u32();
  if (n > limit) throw FormatError("scene file: index list longer than the frame table");
  std::vector<int> ids(n);
  for (auto& i : ids) {
    i = static_cast<int>(r.u32());
    if (static_cast<std::size_t>(i) >= limit) throw FormatError("scene file: frame index out of range");
  }
  return ids;
}

void write_renders(ByteWriter& w, const std::vector<ViewRender>& views) {
  w.u32(static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views) {
    w.u32(static_cast<std::uint32_t>(v.frame.index));
    w.f64(v.condition);
    w.u32(static_cast<std::uint32_t>(v.observations.size()));
    const auto dim = v.observations.empty() ? 0 : v.observations.front().embedding.size();
    w.u32(static_cast<std::uint32_t>(dim));
    for (const auto& o : v.observations) {
      if (o.embedding.size() != dim) throw ShapeError("scene file: ragged embeddings within a view");
      w.u32(static_cast<std::uint32_t>(o.point_id));
      w.f64(o.pixel.x());
      w.f64(o.pixel.y());
      w.f32s(std::span(o.embedding.data(), static_cast<std::size_t>(dim)));
    }
  }
}

std::vector<ViewRender> read_renders(ByteReader& r, const SceneInstance& inst) {
  const auto n = r.u32();
  if (n > inst.frames.size()) throw FormatError("scene file: more views than frames");
  std::vector<ViewRender> views(n);
  for (auto& v : views) {
    const auto f = r.u32();
    if (f >= inst.frames.size()) throw FormatError("scene file: view references unknown frame");
    v.frame = inst.frames[f];
    v.condition = r.f64();
    const auto count = r.u32();
    const auto dim = r.u32();
    if (static_cast<std::uint64_t>(count) * (4 + 16 + 4ULL * dim) > r.remaining()) {
      throw LengthMismatchError("scene file: truncated observation table");
    }
    v.observations.resize(count);
    for (auto& o : v.observations) {
      o.point_id = static_cast<int>(r.u32());
      if (o.point_id < 0 || o.point_id >= inst.scene.size()) throw FormatError("scene file: bad point id");
      o.point = inst.scene.points.row(o.point_id).transpose();
      o.pixel.x() = r.f64();
      o.pixel.y() = r.f64();
      o.embedding.resize(dim);
      r.f32s(std::span(o.embedding.data(), dim));
    }
  }
  return views;
}

}  // namespace

Bytes encode_tuple(const SceneTuple& t) {
  ByteWriter w;
  w.magic(std::string_view(kSceneMagic, 8));
  w.u32(kSceneFormatVersion);
  w.str(t.id);
  w.u64(t.seed);
  w.f64(t.query_condition);

  const auto& s = t.instance.scene;
  w.str(s.id);
  w.u64(s.seed);
  for (int i = 0; i < 3; ++i) w.f64(s.box_min[i]);
  for (int i = 0; i < 3; ++i) w.f64(s.box_max[i]);
  w.u32(static_cast<std::uint32_t>(s.points.rows()));
  w.u32(static_cast<std::uint32_t>(s.latents.cols()));
  w.f64s(std::span(s.points.data(), static_cast<std::size_t>(s.points.size())));
  w.f64s(std::span(s.latents.data(), static_cast<std::size_t>(s.latents.size())));

  w.u32(static_cast<std::uint32_t>(t.instance.frames.size()));
  for (const auto& f : t.instance.frames) write_frame(w, f);
  write_ids(w, t.split.mapping);
  write_ids(w, t.split.query);
  write_renders(w, t.mapping);
  write_renders(w, t.query);
  write_renders(w, t.control);
  return w.take();
}

SceneTuple decode_tuple(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kSceneMagic, 8));
  const auto version = r.u32();
  if (version != kSceneFormatVersion) throw FormatError("scene file: unsupported version " + std::to_string(version));
  SceneTuple t;
  t.id = r.str();
  t.seed = r.u64();
  t.query_condition = r.f64();

  auto& s = t.instance.scene;
  s.id = r.str();
  s.seed = r.u64();
  for (int i = 0; i < 3; ++i) s.box_min[i] = r.f64();
  for (int i = 0; i < 3; ++i) s.box_max[i] = r.f64();
  const auto n = r.u32();
  const auto k = r.u32();
  if (static_cast<std::uint64_t>(n) * (3 + k) * 8 > r.remaining()) {
    throw LengthMismatchError("scene file: truncated point table");
  }
  s.points.resize(n, 3);
  s.latents.resize(n, k);
  r.f64s(std::span(s.points.data(), static_cast<std::size_t>(s.points.size())));
  r.f64s(std::span(s.latents.data(), static_cast<std::size_t>(s.latents.size())));

  const auto frames = r.u32();
  if (static_cast<std::uint64_t>(frames) * 140 > r.remaining()) throw LengthMismatchError("scene file: truncated frames");
  t.instance.frames.reserve(frames);
  for (std::uint32_t i = 0; i < frames; ++i) t.instance.frames.push_back(read_frame(r));
  t.split.mapping = read_ids(r, frames);
  t.split.query = read_ids(r, frames);
  t.mapping = read_renders(r, t.instance);
  t.query = read_renders(r, t.instance);
  t.control = read_renders(r, t.instance);
  r.expect_end();
  return t;
}

void save_tuple(const SceneTuple& t, const std::filesystem::path& path) { write_file(path, encode_tuple(t)); }

SceneTuple load_tuple(const std::filesystem::path& path) { return decode_tuple(read_file(path)); }

}  // namespace aceg::world
