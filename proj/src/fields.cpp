#include "cinemagraph/fields.hpp"

#include <algorithm>
#include <cmath>

namespace cinemagraph {
namespace {

void require_positive_shape(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("raster dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

// Clamped lattice cell around (x, y): corner indices and fractional offsets.
struct Cell {
  int x0, x1, y0, y1;
  double fx, fy;
};

Cell locate(int width, int height, double x, double y) {
  // NaN would poison every downstream step; treat it as the origin.
  if (std::isnan(x)) x = 0.0;
  if (std::isnan(y)) y = 0.0;
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  Cell c;
  c.x0 = static_cast<int>(x);
  c.y0 = static_cast<int>(y);
  c.x1 = std::min(c.x0 + 1, width - 1);
  c.y1 = std::min(c.y0 + 1, height - 1);
  c.fx = x - c.x0;
  c.fy = y - c.y0;
  return c;
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  require_positive_shape(width, height);
  if (channels != 1 && channels != 3 && channels != 4) {
    throw InvalidArgument("image channels must be 1, 3 or 4, got " + std::to_string(channels));
  }
  data_.assign(pixel_count() * channels, 0.0f);
}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : Image(width, height, channels) {
  if (data.size() != data_.size()) {
    throw DimensionMismatch("image data length " + std::to_string(data.size()) +
                            " does not match " + std::to_string(data_.size()));
  }
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw InvalidArgument("image values must be finite and in [0,1]");
    }
  }
  data_ = std::move(data);
}

FlowField::FlowField(int width, int height) : FlowField(width, height, Vec2f{}) {}

FlowField::FlowField(int width, int height, Vec2f value) : width_(width), height_(height) {
  require_positive_shape(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, value);
}

FlowField::FlowField(int width, int height, std::vector<Vec2f> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_positive_shape(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionMismatch("flow data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
  }
}

BinaryMask::BinaryMask(int width, int height, bool value) : width_(width), height_(height) {
  require_positive_shape(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_positive_shape(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionMismatch("mask data length does not match its dimensions");
  }
  for (auto& v : data_) v = v ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void sample_bilinear(const FlowField& field, double x, double y, double& out_x, double& out_y) {
  const Cell c = locate(field.width(), field.height(), x, y);
  const Vec2f v00 = field.at(c.x0, c.y0);
  const Vec2f v10 = field.at(c.x1, c.y0);
  const Vec2f v01 = field.at(c.x0, c.y1);
  const Vec2f v11 = field.at(c.x1, c.y1);
  const double gx = 1.0 - c.fx;
  const double gy = 1.0 - c.fy;
  out_x = gy * (gx * v00.x + c.fx * v10.x) + c.fy * (gx * v01.x + c.fx * v11.x);
  out_y = gy * (gx * v00.y + c.fx * v10.y) + c.fy * (gx * v01.y + c.fx * v11.y);
}

Vec2f sample_bilinear(const FlowField& field, double x, double y) {
  double vx = 0.0;
  double vy = 0.0;
  sample_bilinear(field, x, y, vx, vy);
  return {static_cast<float>(vx), static_cast<float>(vy)};
}

void sample_bilinear(const Image& image, double x, double y, std::span<float> out) {
  if (out.size() != static_cast<std::size_t>(image.channels())) {
    throw DimensionMismatch("sample_bilinear: output span does not match channel count");
  }
  const Cell c = locate(image.width(), image.height(), x, y);
  const auto p00 = image.pixel(c.x0, c.y0);
  const auto p10 = image.pixel(c.x1, c.y0);
  const auto p01 = image.pixel(c.x0, c.y1);
  const auto p11 = image.pixel(c.x1, c.y1);
  const double gx = 1.0 - c.fx;
  const double gy = 1.0 - c.fy;
  for (std::size_t ch = 0; ch < out.size(); ++ch) {
    out[ch] = static_cast<float>(gy * (gx * p00[ch] + c.fx * p10[ch]) +
                                 c.fy * (gx * p01[ch] + c.fx * p11[ch]));
  }
}

std::vector<float> sample_bilinear(const Image& image, double x, double y) {
  std::vector<float> out(static_cast<std::size_t>(image.channels()));
  sample_bilinear(image, x, y, out);
  return out;
}

FlowField mask_flow(const FlowField& flow, const BinaryMask& mask) {
  require_same_shape(flow, mask, "mask_flow");
  FlowField out(flow.width(), flow.height());
  const auto src = flow.data();
  const auto gate = mask.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (gate[i]) dst[i] = src[i];
  }
  return out;
}

FlowField reverse_flow(const FlowField& flow) {
  FlowField out = flow;
  for (auto& v : out.data()) v = {-v.x, -v.y};
  return out;
}

void validate_flow(const FlowField& flow) {
  const double bound = std::max(flow.width(), flow.height());
  for (const auto& v : flow.data()) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw FormatError("flow contains non-finite components");
    }
    if (std::hypot(static_cast<double>(v.x), static_cast<double>(v.y)) > bound) {
      throw FormatError("flow vector magnitude exceeds max(width, height)");
    }
  }
}

}  // namespace cinemagraph
