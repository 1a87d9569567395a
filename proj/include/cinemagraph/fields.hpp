#pragma once

// Raster types shared by every stage of the pipeline.
//
// Coordinates: x grows rightward, y grows downward, (0,0) is the center of
// the top-left pixel. A flow vector (dx, dy) is added to pixel coordinates.
// All rasters are row-major and contiguous.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cinemagraph/error.hpp"

namespace cinemagraph {

struct Vec2f {
  float x = 0.0f;
  float y = 0.0f;

  friend bool operator==(const Vec2f&, const Vec2f&) = default;
};

/// H x W x C raster with channel values in [0,1]. C is 1, 3 or 4.
class Image {
 public:
  Image() = default;
  /// Zero-filled image.
  Image(int width, int height, int channels);
  /// Takes ownership of `data`; validates length, finiteness and range.
  Image(int width, int height, int channels, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y, int c) const { return data_[index(x, y) + c]; }
  float& at(int x, int y, int c) { return data_[index(x, y) + c]; }

  std::span<const float> pixel(int x, int y) const {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<float> pixel(int x, int y) {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Dense per-pixel displacement field in pixels per frame.
class FlowField {
 public:
  FlowField() = default;
  /// Zero field.
  FlowField(int width, int height);
  /// Spatially constant field.
  FlowField(int width, int height, Vec2f value);
  FlowField(int width, int height, std::vector<Vec2f> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return data_.size(); }

  Vec2f at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  Vec2f& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const Vec2f> data() const { return data_; }
  std::span<Vec2f> data() { return data_; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Vec2f> data_;
};

/// Per-pixel boolean gate. Stored one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return data_.size(); }

  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  std::span<const std::uint8_t> data() const { return data_; }

  /// Number of true pixels.
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Throws DimensionMismatch unless both rasters share width and height.
template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                            "x" + std::to_string(b.height()));
  }
}

/// Bilinear lookup with the point clamped to [0, w-1] x [0, h-1].
/// Integer lattice points return the stored value exactly.
Vec2f sample_bilinear(const FlowField& field, double x, double y);

/// Same as above but keeps the blend in double precision.
void sample_bilinear(const FlowField& field, double x, double y, double& out_x, double& out_y);

/// Bilinear lookup of all channels of `image` into `out` (size = channels).
void sample_bilinear(const Image& image, double x, double y, std::span<float> out);
std::vector<float> sample_bilinear(const Image& image, double x, double y);

/// Flow inside the mask, (0,0) outside.
FlowField mask_flow(const FlowField& flow, const BinaryMask& mask);

/// Componentwise negation.
FlowField reverse_flow(const FlowField& flow);

/// Throws FormatError if any component is non-finite or a vector is longer
/// than max(width, height).
void validate_flow(const FlowField& flow);

}  // namespace cinemagraph
