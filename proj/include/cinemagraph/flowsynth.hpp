#pragma once

// Direction hints and procedural flows.
//
// The circle is split into 12 arcs of 30 degrees. Arc i covers
// [30i - 15, 30i + 15) degrees, measured counterclockwise on screen from the
// +x axis, and is named by one phrase in kDirectionPhrases. Screen y points
// down, so angle theta maps to the vector (cos theta, -sin theta).

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "cinemagraph/fields.hpp"

namespace cinemagraph {

inline constexpr int kQuadrantCount = 12;
inline constexpr double kQuadrantWidthDeg = 30.0;
inline constexpr double kDefaultFlowMaskThreshold = 0.25;

inline constexpr std::array<std::string_view, kQuadrantCount> kDirectionPhrases = {
    "left to right",     "up-right shallow", "up-right steep",   "upwards",
    "up-left steep",     "up-left shallow",  "right to left",    "down-left shallow",
    "down-left steep",   "downwards",        "down-right steep", "down-right shallow",
};

struct DirectionHint {
  int quadrant_index = 0;
  double angle_theta = 0.0;  // radians
  std::string phrase;
};

double degrees_to_radians(double degrees);
double radians_to_degrees(double radians);

/// Arc center in degrees.
double quadrant_center_deg(int quadrant_index);

/// Arc containing `theta` (any real angle, wrapped into [0, 360)).
int quadrant_for_angle(double theta);

/// Resolves a direction phrase to its arc. Accepts the canonical phrases,
/// an optional "in ... direction" wrapper, and comma-separated composites
/// ("left to right, downwards") which are resolved by summing the unit
/// vectors of the parts. Throws InvalidArgument listing the canonical
/// phrases when a part is unknown.
int quadrant_for_phrase(std::string_view phrase);

/// Uniform angle in [center - 15deg, center + 15deg) drawn from a generator
/// seeded with `seed`, or the arc center when `deterministic` is set.
double sample_angle(int quadrant_index, std::uint64_t seed, bool deterministic);

/// Phrase to hint: quadrant lookup plus angle sampling.
DirectionHint make_direction_hint(std::string_view phrase, std::uint64_t seed,
                                  bool deterministic);

/// (cos theta, -sin theta) inside the mask, zero outside.
FlowField hint_from_angle(double theta, const BinaryMask& mask);

/// speed * hint_from_angle(theta, mask).
FlowField synth_flow(const BinaryMask& mask, double theta, double speed);

/// True where the flow magnitude exceeds tau.
BinaryMask flow_to_mask(const FlowField& avg_flow, double tau = kDefaultFlowMaskThreshold);

}  // namespace cinemagraph
