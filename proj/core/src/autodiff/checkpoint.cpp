#include "aceg/autodiff/checkpoint.hpp"

namespace aceg::ad {

Bytes encode_tensors(const std::vector<NamedTensor>& tensors) {
  ByteWriter w;
  w.magic(std::string_view(kParamMagic, 8));
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    const auto& t = nt.tensor;
    std::int64_t expect = 1;
    for (auto d : t.shape) expect *= d;
    if (expect != t.numel()) throw ShapeError("tensor '" + nt.name + "': shape does not match value count");
    w.str(nt.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(static_cast<std::uint64_t>(d));
    w.f32s(std::span(t.values.data(), static_cast<std::size_t>(t.values.size())));
  }
  return w.take();
}

std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kParamMagic, 8));
  const auto count = r.u32();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.str();
    const auto rank = r.u32();
    if (rank < 1 || rank > 2) throw FormatError("tensor '" + nt.name + "': unsupported rank " + std::to_string(rank));
    Shape shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      const auto dim = r.u64();
      if (dim > (1ULL << 40)) throw FormatError("tensor '" + nt.name + "': implausible dimension");
      d = static_cast<std::int64_t>(dim);
      numel *= dim;
    }
    if (numel * 4 > r.remaining()) throw LengthMismatchError("tensor '" + nt.name + "': truncated payload");
    nt.tensor = Tensor<float>::zeros(shape);
    r.f32s(std::span(nt.tensor.values.data(), static_cast<std::size_t>(numel)));
    out.push_back(std::move(nt));
  }
  r.expect_end();
  return out;
}

Bytes encode_parameters(const ParameterSet<float>& params) {
  std::vector<NamedTensor> ts;
  ts.reserve(params.size());
  for (const auto& p : params) ts.push_back({p.name, p.tensor});
  return encode_tensors(ts);
}

void decode_parameters_into(std::span<const std::uint8_t> bytes, ParameterSet<float>& params) {
  auto ts = decode_tensors(bytes);
  if (ts.size() != params.size()) {
    throw FormatError("checkpoint has " + std::to_string(ts.size()) + " tensors, model expects " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto& p = params[i];
    if (ts[i].name != p.name || ts[i].tensor.shape != p.tensor.shape) {
      throw FormatError("checkpoint tensor '" + ts[i].name + "' does not match parameter '" + p.name + "'");
    }
  }
  for (std::size_t i = 0; i < ts.size(); ++i) params[i].tensor = std::move(ts[i].tensor);
}

void save_parameters(const ParameterSet<float>& params, const std::filesystem::path& path) {
  write_file(path, encode_parameters(params));
}

void load_parameters(const std::filesystem::path& path, ParameterSet<float>& params) {
  decode_parameters_into(read_file(path), params);
}

}  // namespace aceg::ad
