#include "aceg/regressor/map_code.hpp"

#include "aceg/common/error.hpp"
#include "aceg/common/random.hpp"

namespace aceg::reg {

namespace {
constexpr double kInitStd = 0.01;
}

MapCode init_map_code(std::int64_t num_tokens, std::int64_t dim, std::uint64_t seed, std::string scene_id) {
  if (num_tokens < 1 || dim < 1) throw PreconditionError("map code needs N_C >= 1 and D_map >= 1");
  MapCode code;
  code.scene_id = std::move(scene_id);
  code.tokens.resize(num_tokens, dim);
  Rng rng = make_rng(seed, {0x636f6465ULL});
  std::normal_distribution<float> dist(0.0f, static_cast<float>(kInitStd));
  for (Eigen::Index i = 0; i < code.tokens.size(); ++i) code.tokens.data()[i] = dist(rng);
  return code;
}

Bytes encode_map_code(const MapCode& code) {
  if (code.tokens.rows() < 1 || code.tokens.cols() < 1) throw PreconditionError("empty map code");
  if (!code.tokens.allFinite()) throw NonFiniteError("map code has non-finite tokens");
  ByteWriter w;
  w.magic(std::string_view(kMapCodeMagic, 8));
  w.u32(static_cast<std::uint32_t>(code.tokens.rows()));
  w.u32(static_cast<std::uint32_t>(code.tokens.cols()));
  w.str(code.scene_id);
  w.u64(code.iteration);
  w.f64(code.scale);
  w.f32s(std::span(code.tokens.data(), static_cast<std::size_t>(code.tokens.size())));
  return w.take();
}

MapCode decode_map_code(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kMapCodeMagic, 8));
  MapCode code;
  const auto n = r.u32();
  const auto d = r.u32();
  if (n < 1 || d < 1) throw FormatError("map code header has zero size");
  code.scene_id = r.str();
  code.iteration = r.u64();
  code.scale = r.f64();
  if (r.remaining() != map_code_payload_bytes(n, d)) {
    throw LengthMismatchError("map code payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                              std::to_string(map_code_payload_bytes(n, d)));
  }
  code.tokens.resize(n, d);
  r.f32s(std::span(code.tokens.data(), static_cast<std::size_t>(code.tokens.size())));
  r.expect_end();
  return code;
}

void save_map_code(const MapCode& code, const std::filesystem::path& path) { write_file(path, encode_map_code(code)); }

MapCode load_map_code(const std::filesystem::path& path) { return decode_map_code(read_file(path)); }

}  // namespace aceg::reg
