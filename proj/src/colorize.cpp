#include "cinemagraph/colorize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cinemagraph {
namespace {

// Fully saturated RGB for a hue in degrees.
void hue_to_rgb(double hue, double rgb[3]) {
  const double h = hue / 60.0;
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  switch (sector) {
    case 0: rgb[0] = 1; rgb[1] = f;     rgb[2] = 0;     break;
    case 1: rgb[0] = 1 - f; rgb[1] = 1; rgb[2] = 0;     break;
    case 2: rgb[0] = 0; rgb[1] = 1;     rgb[2] = f;     break;
    case 3: rgb[0] = 0; rgb[1] = 1 - f; rgb[2] = 1;     break;
    case 4: rgb[0] = f; rgb[1] = 0;     rgb[2] = 1;     break;
    default: rgb[0] = 1; rgb[1] = 0;    rgb[2] = 1 - f; break;
  }
}

}  // namespace

Image colorize_flow(const FlowField& flow, std::optional<double> max_magnitude) {
  double scale = 0.0;
  if (max_magnitude) {
    if (!(*max_magnitude > 0.0) || !std::isfinite(*max_magnitude)) {
      throw InvalidArgument("colorize_flow: max magnitude must be finite and > 0");
    }
    scale = *max_magnitude;
  } else {
    for (const auto& v : flow.data()) {
      if (std::isfinite(v.x) && std::isfinite(v.y)) scale = std::max(scale, std::hypot(static_cast<double>(v.x), static_cast<double>(v.y)));
    }
  }

  Image out(flow.width(), flow.height(), 3);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const Vec2f v = flow.at(x, y);
      const double mag = std::hypot(static_cast<double>(v.x), static_cast<double>(v.y));
      auto px = out.pixel(x, y);
      if (!(mag > 0.0) || !(scale > 0.0) || !std::isfinite(mag)) {
        std::fill(px.begin(), px.end(), 1.0f);
        continue;
      }
      double hue = std::atan2(v.y, v.x) * 180.0 / std::numbers::pi;
      if (hue < 0.0) hue += 360.0;
      if (hue >= 360.0) hue -= 360.0;
      double rgb[3];
      hue_to_rgb(hue, rgb);
      const double s = std::min(1.0, mag / scale);
      for (int c = 0; c < 3; ++c) px[c] = static_cast<float>(1.0 - s * (1.0 - rgb[c]));
    }
  }
  return out;
}

}  // namespace cinemagraph
