#pragma once

// Pixel-space symmetric splatting. Frame n of an N-frame loop is the
// weight-normalized sum of the image forward-warped along the cumulative
// forward flow (weight (N-n)/N) and along the cumulative backward flow
// (weight n/N). Pixels neither warp reaches are filled by diffusion.

#include <span>
#include <vector>

#include "cinemagraph/euler.hpp"
#include "cinemagraph/fields.hpp"

namespace cinemagraph {

/// Accumulated weight at or below this value marks a hole.
inline constexpr double kHoleEpsilon = 1e-6;

/// Per-pixel weighted color sums produced by forward splatting.
class SplatAccumulator {
 public:
  SplatAccumulator() = default;
  SplatAccumulator(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double weight(int x, int y) const { return weight_sum_[offset(x, y)]; }
  double color(int x, int y, int c) const {
    return color_sum_[offset(x, y) * channels_ + c];
  }

  std::span<const double> weight_sum() const { return weight_sum_; }
  std::span<const double> color_sum() const { return color_sum_; }

  /// Adds `w * color` at (x, y). Coordinates must be in bounds.
  void add(int x, int y, std::span<const float> color, double w);

 private:
  std::size_t offset(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> color_sum_;
  std::vector<double> weight_sum_;
};

/// Temporally linear blend between the two warp directions.
struct BlendSchedule {
  int total = 1;

  double weight_forward(int n) const { return static_cast<double>(total - n) / total; }
  double weight_backward(int n) const { return static_cast<double>(n) / total; }
};

/// Bilinear scatter: each source pixel hands `scalar_weight` split over the
/// four lattice points around its displaced position. Corners off the canvas
/// are dropped.
SplatAccumulator forward_splat(const Image& image, const FlowField& flow, double scalar_weight);

struct CompositeFrame {
  Image image;
  /// Combined accumulated weight per pixel; <= kHoleEpsilon means hole.
  std::vector<float> coverage;
};

/// Weight-normalized merge of two accumulators. Hole pixels are left at 0.
CompositeFrame composite_symmetric(const SplatAccumulator& forward,
                                   const SplatAccumulator& backward);

/// Fills pixels whose coverage is <= kHoleEpsilon. Each pass sets every hole
/// that has at least one known pixel in its 3x3 neighborhood to the mean of
/// those neighbors, then marks it known. Holes that can never be reached
/// (no known pixel anywhere) take the global image mean.
Image fill_holes(const Image& image, std::span<const float> coverage);

/// Renders one loop frame. Endpoints n = 0 and n = total return `image`
/// unchanged.
Image symmetric_splat_frame(const Image& image, const CumulativeFlowPair& pair);

}  // namespace cinemagraph
