#include "cinemagraph/flowsynth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace cinemagraph {
namespace {

std::string normalize(std::string_view text) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::string strip_wrapper(std::string s) {
  constexpr std::string_view prefix = "in ";
  constexpr std::string_view suffix = " direction";
  if (s.starts_with(prefix)) s.erase(0, prefix.size());
  if (s.ends_with(suffix)) s.erase(s.size() - suffix.size());
  return s;
}

std::string phrase_list() {
  std::string out;
  for (std::size_t i = 0; i < kDirectionPhrases.size(); ++i) {
    if (i) out += ", ";
    out += '"';
    out += kDirectionPhrases[i];
    out += '"';
  }
  return out;
}

int canonical_index(const std::string& part) {
  for (int i = 0; i < kQuadrantCount; ++i) {
    if (kDirectionPhrases[static_cast<std::size_t>(i)] == part) return i;
  }
  return -1;
}

void require_quadrant(int quadrant_index) {
  if (quadrant_index < 0 || quadrant_index >= kQuadrantCount) {
    throw InvalidArgument("quadrant index must be in [0, 12), got " +
                          std::to_string(quadrant_index));
  }
}

}  // namespace

double degrees_to_radians(double degrees) { return degrees * std::numbers::pi / 180.0; }
double radians_to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

double quadrant_center_deg(int quadrant_index) {
  require_quadrant(quadrant_index);
  return kQuadrantWidthDeg * quadrant_index;
}

int quadrant_for_angle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("angle must be finite");
  double t = std::fmod(theta, 2.0 * std::numbers::pi);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  int q = static_cast<int>(
      std::floor((radians_to_degrees(t) + kQuadrantWidthDeg / 2) / kQuadrantWidthDeg));
  // The degree estimate can straddle an edge after rounding; settle it against
  // the edges in radians, converted the same way sample_angle converts them.
  const auto edge = [](int k) { return degrees_to_radians(k * kQuadrantWidthDeg - kQuadrantWidthDeg / 2); };
  if (t < edge(q)) {
    --q;
  } else if (t >= edge(q + 1)) {
    ++q;
  }
  return (q + kQuadrantCount) % kQuadrantCount;
}

int quadrant_for_phrase(std::string_view phrase) {
  const std::string text = strip_wrapper(normalize(phrase));
  std::vector<int> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string part = normalize(text.substr(start, comma - start));
    const int index = canonical_index(part);
    if (index < 0) {
      throw InvalidArgument("unknown direction phrase \"" + std::string(phrase) +
                            "\"; expected one of " + phrase_list() +
                            " or a comma-separated combination");
    }
    parts.push_back(index);
    start = comma + 1;
  }
  if (parts.size() == 1) return parts.front();

  double sx = 0.0;
  double sy = 0.0;
  for (int index : parts) {
    const double theta = degrees_to_radians(quadrant_center_deg(index));
    sx += std::cos(theta);
    sy += std::sin(theta);
  }
  if (std::hypot(sx, sy) < 1e-9) {
    throw InvalidArgument("direction phrase \"" + std::string(phrase) +
                          "\" names opposing directions");
  }
  return quadrant_for_angle(std::atan2(sy, sx));
}

double sample_angle(int quadrant_index, std::uint64_t seed, bool deterministic) {
  const double center = quadrant_center_deg(quadrant_index);
  if (deterministic) return degrees_to_radians(center);
  const double lo = degrees_to_radians(center - kQuadrantWidthDeg / 2);
  const double hi = degrees_to_radians(center + kQuadrantWidthDeg / 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  const double theta = dist(rng);
  // uniform_real_distribution may round up to hi; keep the arc half-open.
  return theta < hi ? theta : std::nextafter(hi, lo);
}

DirectionHint make_direction_hint(std::string_view phrase, std::uint64_t seed,
                                  bool deterministic) {
  const int q = quadrant_for_phrase(phrase);
  return {q, sample_angle(q, seed, deterministic),
          std::string(kDirectionPhrases[static_cast<std::size_t>(q)])};
}

FlowField hint_from_angle(double theta, const BinaryMask& mask) {
  const Vec2f unit{static_cast<float>(std::cos(theta)), static_cast<float>(-std::sin(theta))};
  FlowField out(mask.width(), mask.height());
  const auto gate = mask.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i]) dst[i] = unit;
  }
  return out;
}

FlowField synth_flow(const BinaryMask& mask, double theta, double speed) {
  if (!(speed >= 0.0) || !std::isfinite(speed)) {
    throw InvalidArgument("synth_flow: speed must be finite and >= 0");
  }
  FlowField out = hint_from_angle(theta, mask);
  const float s = static_cast<float>(speed);
  for (auto& v : out.data()) v = {s * v.x, s * v.y};
  return out;
}

BinaryMask flow_to_mask(const FlowField& avg_flow, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("flow_to_mask: tau must be >= 0");
  std::vector<std::uint8_t> data(avg_flow.pixel_count());
  const auto src = avg_flow.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    data[i] = std::hypot(static_cast<double>(src[i].x), static_cast<double>(src[i].y)) > tau;
  }
  return BinaryMask(avg_flow.width(), avg_flow.height(), std::move(data));
}

}  // namespace cinemagraph
