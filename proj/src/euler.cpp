#include "cinemagraph/euler.hpp"

#include <string>

namespace cinemagraph {
namespace {

void require_steps(int n, const char* what) {
  if (n < 0) throw InvalidArgument(std::string(what) + ": step count must be >= 0");
}

}  // namespace

void euler_step(const FlowField& flow, FlowField& cumulative) {
  require_same_shape(flow, cumulative, "euler_step");
  const int w = flow.width();
  const int h = flow.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Vec2f& c = cumulative.at(x, y);
      double dx = 0.0;
      double dy = 0.0;
      sample_bilinear(flow, x + static_cast<double>(c.x), y + static_cast<double>(c.y), dx, dy);
      c.x = static_cast<float>(static_cast<double>(c.x) + dx);
      c.y = static_cast<float>(static_cast<double>(c.y) + dy);
    }
  }
}

FlowField euler_forward(const FlowField& flow, int n) {
  require_steps(n, "euler_forward");
  FlowField cumulative(flow.width(), flow.height());
  for (int k = 0; k < n; ++k) euler_step(flow, cumulative);
  return cumulative;
}

FlowField euler_backward(const FlowField& flow, int n) {
  require_steps(n, "euler_backward");
  return euler_forward(reverse_flow(flow), n);
}

std::vector<CumulativeFlowPair> integrate_sequence(const FlowField& flow, int total) {
  if (total < 1) throw InvalidArgument("integrate_sequence: frame count must be >= 1");
  std::vector<CumulativeFlowPair> pairs(static_cast<std::size_t>(total) + 1);

  FlowField cumulative(flow.width(), flow.height());
  for (int n = 0; n <= total; ++n) {
    if (n > 0) euler_step(flow, cumulative);
    auto& p = pairs[static_cast<std::size_t>(n)];
    p.forward = cumulative;
    p.n = n;
    p.total = total;
  }

  const FlowField reversed = reverse_flow(flow);
  FlowField back(flow.width(), flow.height());
  for (int m = 0; m <= total; ++m) {
    if (m > 0) euler_step(reversed, back);
    pairs[static_cast<std::size_t>(total - m)].backward = back;
  }
  return pairs;
}

}  // namespace cinemagraph
