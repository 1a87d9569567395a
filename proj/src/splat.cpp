#include "cinemagraph/splat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cinemagraph {

SplatAccumulator::SplatAccumulator(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw InvalidArgument("splat accumulator dimensions must be positive");
  }
  weight_sum_.assign(static_cast<std::size_t>(width) * height, 0.0);
  color_sum_.assign(weight_sum_.size() * channels, 0.0);
}

void SplatAccumulator::add(int x, int y, std::span<const float> color, double w) {
  const std::size_t i = offset(x, y);
  weight_sum_[i] += w;
  double* dst = color_sum_.data() + i * channels_;
  for (int c = 0; c < channels_; ++c) dst[c] += w * color[c];
}

SplatAccumulator forward_splat(const Image& image, const FlowField& flow, double scalar_weight) {
  require_same_shape(image, flow, "forward_splat");
  if (!(scalar_weight > 0.0)) throw InvalidArgument("forward_splat: weight must be > 0");

  const int w = image.width();
  const int h = image.height();
  SplatAccumulator acc(w, h, image.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2f d = flow.at(x, y);
      const double tx = x + static_cast<double>(d.x);
      const double ty = y + static_cast<double>(d.y);
      if (!std::isfinite(tx) || !std::isfinite(ty)) continue;
      const double fx0 = std::floor(tx);
      const double fy0 = std::floor(ty);
      // Entirely off-canvas: no corner can land.
      if (fx0 < -1.0 || fy0 < -1.0 || fx0 > w - 1 || fy0 > h - 1) continue;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = tx - fx0;
      const double ay = ty - fy0;
      const auto color = image.pixel(x, y);

      const double wx[2] = {1.0 - ax, ax};
      const double wy[2] = {1.0 - ay, ay};
      for (int j = 0; j < 2; ++j) {
        const int py = y0 + j;
        if (py < 0 || py >= h || wy[j] == 0.0) continue;
        for (int i = 0; i < 2; ++i) {
          const int px = x0 + i;
          if (px < 0 || px >= w || wx[i] == 0.0) continue;
          acc.add(px, py, color, scalar_weight * wx[i] * wy[j]);
        }
      }
    }
  }
  return acc;
}

CompositeFrame composite_symmetric(const SplatAccumulator& forward,
                                   const SplatAccumulator& backward) {
  require_same_shape(forward, backward, "composite_symmetric");
  if (forward.channels() != backward.channels()) {
    throw DimensionMismatch("composite_symmetric: channel counts differ");
  }
  const int channels = forward.channels();
  CompositeFrame out{Image(forward.width(), forward.height(), channels), {}};
  out.coverage.resize(out.image.pixel_count());

  const auto wf = forward.weight_sum();
  const auto wb = backward.weight_sum();
  const auto cf = forward.color_sum();
  const auto cb = backward.color_sum();
  auto dst = out.image.data();
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double den = wf[i] + wb[i];
    out.coverage[i] = static_cast<float>(den);
    if (den <= kHoleEpsilon) continue;
    for (int c = 0; c < channels; ++c) {
      const std::size_t k = i * channels + c;
      dst[k] = static_cast<float>(std::clamp((cf[k] + cb[k]) / den, 0.0, 1.0));
    }
  }
  return out;
}

Image fill_holes(const Image& image, std::span<const float> coverage) {
  if (coverage.size() != image.pixel_count()) {
    throw DimensionMismatch("fill_holes: coverage size does not match image");
  }
  const int w = image.width();
  const int h = image.height();
  const int channels = image.channels();

  std::vector<std::uint8_t> known(coverage.size());
  std::vector<int> holes;
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    known[i] = coverage[i] > kHoleEpsilon;
    if (!known[i]) holes.push_back(static_cast<int>(i));
  }
  if (holes.empty()) return image;

  Image out = image;
  auto data = out.data();
  std::vector<int> filled;
  std::vector<float> values;
  std::vector<int> remaining;
  while (!holes.empty()) {
    filled.clear();
    values.clear();
    remaining.clear();
    for (int idx : holes) {
      const int x = idx % w;
      const int y = idx / w;
      double sum[4] = {0.0, 0.0, 0.0, 0.0};
      int count = 0;
      for (int ny = std::max(0, y - 1); ny <= std::min(h - 1, y + 1); ++ny) {
        for (int nx = std::max(0, x - 1); nx <= std::min(w - 1, x + 1); ++nx) {
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (!known[j]) continue;
          for (int c = 0; c < channels; ++c) sum[c] += data[j * channels + c];
          ++count;
        }
      }
      if (count == 0) {
        remaining.push_back(idx);
        continue;
      }
      filled.push_back(idx);
      for (int c = 0; c < channels; ++c) values.push_back(static_cast<float>(sum[c] / count));
    }
    if (filled.empty()) break;
    for (std::size_t k = 0; k < filled.size(); ++k) {
      const std::size_t idx = static_cast<std::size_t>(filled[k]);
      known[idx] = 1;
      for (int c = 0; c < channels; ++c) data[idx * channels + c] = values[k * channels + c];
    }
    holes.swap(remaining);
  }

  if (!holes.empty()) {
    // No known pixel anywhere: fall back to the mean of the input raster.
    std::vector<double> mean(channels, 0.0);
    const auto src = image.data();
    for (std::size_t i = 0; i < src.size(); ++i) mean[i % channels] += src[i];
    for (auto& m : mean) m /= static_cast<double>(image.pixel_count());
    for (int idx : holes) {
      for (int c = 0; c < channels; ++c) {
        data[static_cast<std::size_t>(idx) * channels + c] = static_cast<float>(mean[c]);
      }
    }
  }
  return out;
}

Image symmetric_splat_frame(const Image& image, const CumulativeFlowPair& pair) {
  if (pair.total < 1 || pair.n < 0 || pair.n > pair.total) {
    throw InvalidArgument("symmetric_splat_frame: frame index " + std::to_string(pair.n) +
                          " outside [0, " + std::to_string(pair.total) + "]");
  }
  if (pair.n == 0 || pair.n == pair.total) return image;

  const BlendSchedule schedule{pair.total};
  const auto forward = forward_splat(image, pair.forward, schedule.weight_forward(pair.n));
  const auto backward = forward_splat(image, pair.backward, schedule.weight_backward(pair.n));
  auto merged = composite_symmetric(forward, backward);
  return fill_holes(merged.image, merged.coverage);
}

}  // namespace cinemagraph
