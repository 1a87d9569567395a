#pragma once

// On-disk formats. All multi-byte numerics are little-endian.
//
//   .flo   float32 202021.25 | u32 width | u32 height | (dx, dy) float32 pairs
//   .atns  "ATNS" | u32 version=1 | u32 T | u32 grid_h | u32 grid_w |
//          T x (u32 timestep_id | (grid_h*grid_w)^2 float32, row-major)
//   .png   8-bit images; masks are grayscale with >= 128 meaning true.
//
// Readers reject trailing bytes, so writing a freshly read file reproduces
// it byte for byte.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cinemagraph/fields.hpp"
#include "cinemagraph/maskgen.hpp"

namespace cinemagraph {

inline constexpr float kFloMagic = 202021.25f;
inline constexpr std::uint32_t kAtnsVersion = 1;

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Bytes encode_flo(const FlowField& field);
FlowField decode_flo(std::span<const std::uint8_t> bytes);
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& field, const std::filesystem::path& path);

Bytes encode_atns(const AttentionStack& stack);
AttentionStack decode_atns(std::span<const std::uint8_t> bytes);
AttentionStack read_atns(const std::filesystem::path& path);
void write_atns(const AttentionStack& stack, const std::filesystem::path& path);

/// Decodes any PNG to 8-bit gray, RGB or RGBA (gray+alpha becomes RGBA),
/// scaled to [0,1].
Image read_png(const std::filesystem::path& path);
Image decode_png(std::span<const std::uint8_t> bytes);
/// Quantizes to 8 bits with round-to-nearest.
Bytes encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);

/// 8-bit samples of `image` (round-to-nearest), interleaved.
Bytes to_bytes(const Image& image);

BinaryMask read_mask_png(const std::filesystem::path& path);
/// Gray PNG with 255 for true, 0 for false.
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

/// Animated GIF with one palette shared by every frame, built by median cut
/// over all frames so static regions keep their colors. Loops forever.
class GifWriter {
 public:
  GifWriter(int width, int height, int fps);

  /// Adds a frame; converted to 8-bit RGB immediately.
  void add_frame(const Image& frame);
  std::size_t frame_count() const { return frames_.size(); }

  Bytes encode() const;
  void write(const std::filesystem::path& path) const;

 private:
  int width_;
  int height_;
  int fps_;
  std::vector<Bytes> frames_;  // RGB8
};

/// Median-cut palette of at most `max_colors` RGB triples over all pixels.
std::vector<std::array<std::uint8_t, 3>> median_cut_palette(
    const std::vector<Bytes>& rgb_frames, int max_colors);

/// GIF-flavored variable-width LZW, least significant bit first.
Bytes lzw_encode(std::span<const std::uint8_t> indices, int min_code_size);

}  // namespace cinemagraph
