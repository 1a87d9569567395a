#pragma once

#include <optional>

#include "cinemagraph/fields.hpp"

namespace cinemagraph {

/// Color-wheel rendering of a flow field. Hue follows atan2(dy, dx) with
/// red along +x; saturation is |flow| / max_magnitude clamped to 1; value is
/// always 1, so zero flow is white. Without `max_magnitude` the largest
/// magnitude in the field is used.
Image colorize_flow(const FlowField& flow, std::optional<double> max_magnitude = std::nullopt);

}  // namespace cinemagraph
