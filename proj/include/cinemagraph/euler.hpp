#pragma once

// Cumulative displacement from a constant per-frame flow by Euler steps:
//
//   forward:  C_0 = 0,  C_k(x) = C_{k-1}(x) + F(x + C_{k-1}(x))
//   backward: the same recurrence driven by -F.
//
// Lookups of F are bilinear with border clamping. Each step adds the
// looked-up displacement in double precision and stores the sum as float.

#include <vector>

#include "cinemagraph/fields.hpp"

namespace cinemagraph {

/// Cumulative flows used to render frame `n` of an `total`-frame loop.
struct CumulativeFlowPair {
  FlowField forward;   // frame 0 -> n
  FlowField backward;  // frame N -> N - n
  int n = 0;
  int total = 0;
};

/// Advances `cumulative` by one Euler step of `flow`, in place.
void euler_step(const FlowField& flow, FlowField& cumulative);

/// Displacement after `n` steps along `flow`. n = 0 gives the zero field.
FlowField euler_forward(const FlowField& flow, int n);

/// Displacement after `n` steps along the reversed flow.
FlowField euler_backward(const FlowField& flow, int n);

/// Pairs for n = 0..total, where pair[n].forward has n steps and
/// pair[n].backward has total - n steps. One incremental pass per direction.
std::vector<CumulativeFlowPair> integrate_sequence(const FlowField& flow, int total);

}  // namespace cinemagraph
