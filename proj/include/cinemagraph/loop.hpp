#pragma once

// Loop assembly: masked flow -> cumulative flows -> one splatted frame per
// index. Frames 0 and N are the input image.

#include <functional>
#include <vector>

#include "cinemagraph/fields.hpp"

namespace cinemagraph {

enum class Preset { kReal, kArtistic };

/// 60 frames for real-domain scenes, 120 for artistic ones.
int default_frame_count(Preset preset);

struct LoopConfig {
  int frames = 60;
  int fps = 30;
  /// Worker threads for frame rendering; <= 0 picks hardware concurrency.
  int threads = 0;
  /// Copy out-of-mask pixels from the input into every frame.
  bool lock_static_region = true;

  void validate() const;
};

/// Receives frame n. Called from worker threads, at most once per index and
/// possibly out of order; distinct indices may arrive concurrently.
using FrameSink = std::function<void(int n, const Image& frame)>;

/// Streams frames 0..cfg.frames to `sink`. Output depends only on the
/// inputs, never on the thread count. Memory stays O(sqrt(N)) flow fields:
/// backward integration is checkpointed and replayed per segment.
void generate_loop(const Image& image, const FlowField& flow, const BinaryMask& mask,
                   const LoopConfig& cfg, const FrameSink& sink);

/// Collects every frame in index order.
std::vector<Image> generate_loop(const Image& image, const FlowField& flow,
                                 const BinaryMask& mask, const LoopConfig& cfg);

/// Runs fn(0..count-1) on up to `threads` workers (<= 0: hardware
/// concurrency). The first exception thrown is rethrown after all workers
/// stop.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace cinemagraph
