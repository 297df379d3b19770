#include "aceg/buffers/buffers.hpp"

#include <algorithm>
#include <numeric>

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::buf {

namespace {

struct Ref {
  std::int32_t view;
  std::int32_t obs;
};

std::vector<Ref> shuffled_refs(const std::vector<world::ViewRender>& views, std::int64_t cap, std::uint64_t seed) {
  if (cap < 1) throw PreconditionError("buffer cap must be positive");
  std::vector<Ref> refs;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (std::size_t o = 0; o < views[v].observations.size(); ++o) {
      refs.push_back({static_cast<std::int32_t>(v), static_cast<std::int32_t>(o)});
    }
  }
  if (refs.empty()) throw PreconditionError("cannot build a buffer from zero observations");
  Rng rng = make_rng(seed, {0x73687566ULL});
  std::shuffle(refs.begin(), refs.end(), rng);
  if (static_cast<std::int64_t>(refs.size()) > cap) refs.resize(static_cast<std::size_t>(cap));
  return refs;
}

Eigen::Index feat_dim(const std::vector<world::ViewRender>& views) {
  for (const auto& v : views) {
    if (!v.observations.empty()) return v.observations.front().embedding.size();
  }
  return 0;
}

}  // namespace

std::string to_string(BufferRole r) { return r == BufferRole::Mapping ? "M" : "Q"; }

PretrainBuffer build_pretrain_buffer(const std::string& scene_id, const std::vector<world::ViewRender>& views,
                                     BufferRole role, std::int64_t cap, std::uint64_t seed) {
  const auto refs = shuffled_refs(views, cap, seed);
  const auto D = feat_dim(views);
  PretrainBuffer b;
  b.scene_id = scene_id;
  b.role = role;
  b.seed = seed;
  const auto n = static_cast<Eigen::Index>(refs.size());
  b.embeddings.resize(n, D);
  b.points.resize(n, 3);
  b.frames.resize(refs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& view = views[refs[i].view];
    const auto& o = view.observations[refs[i].obs];
    if (o.embedding.size() != D) throw ShapeError("ragged embeddings in buffer input");
    b.embeddings.row(i) = o.embedding.transpose();
    b.points.row(i) = o.point.cast<float>().transpose();
    b.frames[i] = view.frame.index;
  }
  return b;
}

std::pair<PretrainBuffer, PretrainBuffer> build_pretrain_buffers(const world::SceneTuple& tuple, std::int64_t cap,
                                                                 std::uint64_t seed) {
  if (tuple.mapping.empty() || tuple.query.empty()) throw PreconditionError("tuple has an empty split half");
  return {build_pretrain_buffer(tuple.id, tuple.mapping, BufferRole::Mapping, cap, derive_seed(seed, {0})),
          build_pretrain_buffer(tuple.id, tuple.query, BufferRole::Query, cap, derive_seed(seed, {1}))};
}

NovelSceneBuffer build_novel_buffer(const std::string& scene_id, const std::vector<world::ViewRender>& views,
                                    std::int64_t cap, std::uint64_t seed, double depth_prior) {
  if (!(depth_prior > 0.0)) throw PreconditionError("depth prior must be positive");
  const auto refs = shuffled_refs(views, cap, seed);
  const auto D = feat_dim(views);
  NovelSceneBuffer b;
  b.scene_id = scene_id;
  b.seed = seed;
  b.depth_prior = depth_prior;
  for (const auto& v : views) {
    if (v.frame.T_wc.orthonormality_error() > 1e-6) throw PreconditionError("novel buffer: invalid camera pose");
    b.cameras.push_back(v.frame);
  }
  const auto n = static_cast<Eigen::Index>(refs.size());
  b.embeddings.resize(n, D);
  b.pixels.resize(n, 2);
  b.camera_index.resize(refs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = views[refs[i].view].observations[refs[i].obs];
    if (o.embedding.size() != D) throw ShapeError("ragged embeddings in buffer input");
    b.embeddings.row(i) = o.embedding.transpose();
    b.pixels.row(i) = o.pixel.transpose();
    b.camera_index[i] = refs[i].view;
  }
  return b;
}

}  // namespace aceg::buf
