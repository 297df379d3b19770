#include "aceg/common/binary_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "aceg/common/error.hpp"

namespace aceg {

namespace {

template <typename U>
void put_le(Bytes& buf, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
  }
}

template <typename U>
U get_le(std::span<const std::uint8_t> b) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(b[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void ByteWriter::magic(std::string_view tag) {
  buf_.insert(buf_.end(), tag.begin(), tag.end());
}

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(v); }
void ByteWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::f32(float v) { put_le(buf_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::f32s(std::span<const float> values) {
  buf_.reserve(buf_.size() + 4 * values.size());
  for (float v : values) f32(v);
}

void ByteWriter::f64s(std::span<const double> values) {
  buf_.reserve(buf_.size() + 8 * values.size());
  for (double v : values) f64(v);
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw LengthMismatchError("truncated payload: need " + std::to_string(n) + " bytes at offset " +
                              std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_magic(std::string_view tag) {
  if (remaining() < tag.size()) throw FormatError("file too short for magic '" + std::string(tag) + "'");
  auto b = take(tag.size());
  if (!std::equal(tag.begin(), tag.end(), b.begin())) {
    throw FormatError("bad magic, expected '" + std::string(tag) + "'");
  }
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }
std::uint32_t ByteReader::u32() { return get_le<std::uint32_t>(take(4)); }
std::uint64_t ByteReader::u64() { return get_le<std::uint64_t>(take(8)); }
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const auto n = u32();
  auto b = take(n);
  return std::string(b.begin(), b.end());
}

void ByteReader::f32s(std::span<float> out) {
  auto b = take(4 * out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(get_le<std::uint32_t>(b.subspan(4 * i, 4)));
  }
}

void ByteReader::f64s(std::span<double> out) {
  auto b = take(8 * out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<double>(get_le<std::uint64_t>(b.subspan(8 * i, 8)));
  }
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw LengthMismatchError(std::to_string(remaining()) + " trailing bytes after payload");
  }
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("short write to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace aceg
