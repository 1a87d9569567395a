#include "cinemagraph/codecs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace cinemagraph {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

constexpr std::uint32_t kMaxDimension = 1u << 16;
constexpr char kAtnsMagic[4] = {'A', 'T', 'N', 'S'};

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  void reserve(std::size_t n) { out_.reserve(n); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* format)
      : bytes_(bytes), format_(format) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string(format_) + ": truncated " + what + " (need " +
                        std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")");
    }
  }
  std::uint32_t u32() {
    need(4, "header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool match(const char* p, std::size_t n) {
    need(n, "magic");
    const bool ok = std::memcmp(bytes_.data() + pos_, p, n) == 0;
    pos_ += n;
    return ok;
  }
  void finish() const {
    if (remaining() != 0) {
      throw FormatError(std::string(format_) + ": " + std::to_string(remaining()) +
                        " trailing bytes after payload");
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  const char* format_;
  std::size_t pos_ = 0;
};

void require_dimension(std::uint32_t v, const char* format, const char* what) {
  if (v == 0 || v > kMaxDimension) {
    throw FormatError(std::string(format) + ": " + what + " " + std::to_string(v) +
                      " outside [1, " + std::to_string(kMaxDimension) + "]");
  }
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

Bytes encode_flo(const FlowField& field) {
  ByteWriter w;
  w.reserve(12 + field.pixel_count() * 8);
  w.f32(kFloMagic);
  w.u32(static_cast<std::uint32_t>(field.width()));
  w.u32(static_cast<std::uint32_t>(field.height()));
  for (const auto& v : field.data()) {
    w.f32(v.x);
    w.f32(v.y);
  }
  return w.take();
}

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "flo");
  const float magic = r.f32();
  if (std::bit_cast<std::uint32_t>(magic) != std::bit_cast<std::uint32_t>(kFloMagic)) {
    throw FormatError("flo: bad magic " + std::to_string(magic) + ", expected 202021.25");
  }
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  require_dimension(width, "flo", "width");
  require_dimension(height, "flo", "height");
  const std::size_t count = static_cast<std::size_t>(width) * height;
  r.need(count * 8, "payload");
  std::vector<Vec2f> data(count);
  for (auto& v : data) {
    v.x = r.f32();
    v.y = r.f32();
  }
  r.finish();
  FlowField field(static_cast<int>(width), static_cast<int>(height), std::move(data));
  validate_flow(field);
  return field;
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_file(path)); }

void write_flo(const FlowField& field, const std::filesystem::path& path) {
  write_file(path, encode_flo(field));
}

Bytes encode_atns(const AttentionStack& stack) {
  if (stack.maps.empty()) throw InvalidArgument("atns: empty stack");
  stack.validate();
  ByteWriter w;
  const std::size_t side = static_cast<std::size_t>(stack.tokens());
  w.reserve(20 + stack.maps.size() * (4 + side * side * 4));
  w.raw(kAtnsMagic, 4);
  w.u32(kAtnsVersion);
  w.u32(static_cast<std::uint32_t>(stack.maps.size()));
  w.u32(static_cast<std::uint32_t>(stack.grid_h));
  w.u32(static_cast<std::uint32_t>(stack.grid_w));
  for (std::size_t t = 0; t < stack.maps.size(); ++t) {
    w.u32(stack.timestep_ids[t]);
    for (float v : stack.maps[t]) w.f32(v);
  }
  return w.take();
}

AttentionStack decode_atns(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "atns");
  if (!r.match(kAtnsMagic, 4)) throw FormatError("atns: bad magic, expected \"ATNS\"");
  const std::uint32_t version = r.u32();
  if (version != kAtnsVersion) {
    throw FormatError("atns: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  const std::uint32_t grid_h = r.u32();
  const std::uint32_t grid_w = r.u32();
  if (count == 0) throw FormatError("atns: empty stack");
  // Token grids beyond 256x256 would need >16 GiB per map.
  if (grid_h == 0 || grid_w == 0 || grid_h > 256 || grid_w > 256) {
    throw FormatError("atns: grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                      " outside [1, 256]");
  }
  const std::uint64_t side = static_cast<std::uint64_t>(grid_h) * grid_w;
  const std::uint64_t record = 4 + side * side * 4;
  if (record * count != r.remaining()) {
    if (record * count > r.remaining()) {
      throw FormatError("atns: truncated payload (header declares " +
                        std::to_string(record * count) + " bytes, file has " +
                        std::to_string(r.remaining()) + ")");
    }
    throw FormatError("atns: payload size mismatch, " +
                      std::to_string(r.remaining() - record * count) + " trailing bytes");
  }

  AttentionStack stack;
  stack.grid_h = static_cast<int>(grid_h);
  stack.grid_w = static_cast<int>(grid_w);
  stack.timestep_ids.reserve(count);
  stack.maps.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    stack.timestep_ids.push_back(r.u32());
    std::vector<float> map(static_cast<std::size_t>(side * side));
    for (auto& v : map) {
      v = r.f32();
      if (!std::isfinite(v) || v < 0.0f) {
        throw FormatError("atns: map " + std::to_string(t) + " has a non-finite or negative entry");
      }
    }
    stack.maps.push_back(std::move(map));
  }
  r.finish();
  return stack;
}

AttentionStack read_atns(const std::filesystem::path& path) { return decode_atns(read_file(path)); }

void write_atns(const AttentionStack& stack, const std::filesystem::path& path) {
  write_file(path, encode_atns(stack));
}

Bytes to_bytes(const Image& image) {
  Bytes out(image.data().size());
  const auto src = image.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(src[i], 0.0f, 1.0f) * 255.0f));
  }
  return out;
}

}  // namespace cinemagraph
