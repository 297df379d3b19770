#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aceg/autodiff/tensor.hpp"
#include "aceg/common/binary_io.hpp"

namespace aceg::ad {

inline constexpr char kParamMagic[] = "ACEGPRM1";

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

/// Little-endian parameter file:
///   "ACEGPRM1" | u32 count | count x { u32 name_len | name | u32 rank | rank x u64 dim | f32 payload }
Bytes encode_tensors(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes);

Bytes encode_parameters(const ParameterSet<float>& params);
/// Overwrites the values of `params` from an encoded file. Names, order and
/// shapes must match exactly.
void decode_parameters_into(std::span<const std::uint8_t> bytes, ParameterSet<float>& params);

void save_parameters(const ParameterSet<float>& params, const std::filesystem::path& path);
void load_parameters(const std::filesystem::path& path, ParameterSet<float>& params);

}  // namespace aceg::ad
