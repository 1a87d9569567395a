#include "cinemagraph/loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cinemagraph/euler.hpp"
#include "cinemagraph/splat.hpp"

namespace cinemagraph {
namespace {

void restore_static(const Image& source, const BinaryMask& mask, Image& frame) {
  const int channels = source.channels();
  const auto gate = mask.data();
  const auto src = source.data();
  auto dst = frame.data();
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i]) continue;
    for (int c = 0; c < channels; ++c) dst[i * channels + c] = src[i * channels + c];
  }
}

}  // namespace

int default_frame_count(Preset preset) { return preset == Preset::kArtistic ? 120 : 60; }

void LoopConfig::validate() const {
  if (frames < 1) throw InvalidArgument("loop frame count must be >= 1");
  if (fps < 1) throw InvalidArgument("loop fps must be >= 1");
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void generate_loop(const Image& image, const FlowField& flow, const BinaryMask& mask,
                   const LoopConfig& cfg, const FrameSink& sink) {
  cfg.validate();
  require_same_shape(image, flow, "generate_loop: image and flow");
  require_same_shape(image, mask, "generate_loop: image and mask");

  const int total = cfg.frames;
  const int w = image.width();
  const int h = image.height();
  const FlowField masked = mask_flow(flow, mask);
  const FlowField reversed = reverse_flow(masked);

  // Backward cumulative flow B_m (m steps of -F) is needed for m = N - n,
  // i.e. in decreasing m while n increases. Keep checkpoints every
  // `segment` steps and replay one segment at a time.
  const int segment = std::max(1, static_cast<int>(std::ceil(std::sqrt(total + 1.0))));
  std::vector<FlowField> checkpoints;
  {
    FlowField back(w, h);
    for (int m = 0; m <= total; ++m) {
      if (m % segment == 0) checkpoints.push_back(back);
      if (m < total) euler_step(reversed, back);
    }
  }

  FlowField forward(w, h);
  int next_forward = 0;  // steps already applied to `forward`
  std::vector<CumulativeFlowPair> batch;
  for (int k = static_cast<int>(checkpoints.size()) - 1; k >= 0; --k) {
    const int m_lo = k * segment;
    const int m_hi = std::min(total, m_lo + segment - 1);

    // Frames n = total - m_hi .. total - m_lo, in increasing n.
    const int count = m_hi - m_lo + 1;
    batch.assign(static_cast<std::size_t>(count), {});
    FlowField back = checkpoints[static_cast<std::size_t>(k)];
    for (int m = m_lo; m <= m_hi; ++m) {
      if (m > m_lo) euler_step(reversed, back);
      batch[static_cast<std::size_t>(m_hi - m)].backward = back;
    }
    for (int j = 0; j < count; ++j) {
      const int n = total - m_hi + j;
      while (next_forward < n) {
        euler_step(masked, forward);
        ++next_forward;
      }
      auto& pair = batch[static_cast<std::size_t>(j)];
      pair.forward = forward;
      pair.n = n;
      pair.total = total;
    }

    parallel_for(count, cfg.threads, [&](int j) {
      const auto& pair = batch[static_cast<std::size_t>(j)];
      Image frame = symmetric_splat_frame(image, pair);
      if (cfg.lock_static_region) restore_static(image, mask, frame);
      sink(pair.n, frame);
    });
  }
}

std::vector<Image> generate_loop(const Image& image, const FlowField& flow,
                                 const BinaryMask& mask, const LoopConfig& cfg) {
  cfg.validate();
  std::vector<Image> frames(static_cast<std::size_t>(cfg.frames) + 1);
  generate_loop(image, flow, mask, cfg,
                [&](int n, const Image& frame) { frames[static_cast<std::size_t>(n)] = frame; });
  return frames;
}

}  // namespace cinemagraph
