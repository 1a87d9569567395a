#include <doctest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>

#include "cinemagraph/euler.hpp"
#include "cinemagraph/flowsynth.hpp"
#include "cinemagraph/loop.hpp"
#include "cinemagraph/splat.hpp"

using namespace cinemagraph;

namespace {

Image random_image(int w, int h, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(w, h, channels);
  for (auto& v : img.data()) v = u(rng);
  return img;
}

BinaryMask left_half(int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w / 2; ++x) m.set(x, y, true);
  return m;
}

FlowField swirl(int w, int h) {
  FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.at(x, y) = {0.6f * static_cast<float>(std::sin(y / 3.0)), 0.4f * static_cast<float>(std::cos(x / 4.0))};
  return f;
}

}  // namespace

TEST_CASE("default frame counts") {
  CHECK(default_frame_count(Preset::kReal) == 60);
  CHECK(default_frame_count(Preset::kArtistic) == 120);
  CHECK(LoopConfig{}.frames == 60);
}

TEST_CASE("config validation") {
  LoopConfig cfg;
  cfg.frames = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.frames = 5;
  cfg.fps = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  const Image img(4, 4, 3);
  CHECK_THROWS_AS(generate_loop(img, FlowField(5, 4), BinaryMask(4, 4), LoopConfig{}), DimensionMismatch);
  CHECK_THROWS_AS(generate_loop(img, FlowField(4, 4), BinaryMask(4, 5), LoopConfig{}), DimensionMismatch);
}

TEST_CASE("zero flow reproduces the input in every frame") {
  const Image img = random_image(12, 9, 3, 1);
  LoopConfig cfg;
  cfg.frames = 10;
  const auto frames = generate_loop(img, FlowField(12, 9), BinaryMask(12, 9, true), cfg);
  REQUIRE(frames.size() == 11);
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(std::abs(f.data()[i] - img.data()[i]) <= 1e-6);
  }
}

TEST_CASE("endpoints equal the input and static pixels never change") {
  const int w = 24, h = 16;
  const Image img = random_image(w, h, 3, 2);
  const BinaryMask mask = left_half(w, h);
  // Flow crosses the mask boundary on purpose.
  const FlowField flow(w, h, Vec2f{1.3f, 0.4f});
  LoopConfig cfg;
  cfg.frames = 17;
  const auto frames = generate_loop(img, flow, mask, cfg);
  CHECK(frames.front() == img);
  CHECK(frames.back() == img);
  bool moved = false;
  for (const auto& f : frames) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          if (!mask.at(x, y)) {
            CHECK(f.at(x, y, c) == img.at(x, y, c));
          } else if (f.at(x, y, c) != img.at(x, y, c)) {
            moved = true;
          }
        }
      }
    }
  }
  CHECK(moved);
}

TEST_CASE("checkpointed streaming matches the direct composition") {
  const int w = 20, h = 14;
  const Image img = random_image(w, h, 3, 3);
  const BinaryMask mask = left_half(w, h);
  const FlowField flow = swirl(w, h);
  for (int total : {1, 2, 7, 16, 30}) {
    LoopConfig cfg;
    cfg.frames = total;
    cfg.threads = 3;
    const auto frames = generate_loop(img, flow, mask, cfg);
    const auto pairs = integrate_sequence(mask_flow(flow, mask), total);
    REQUIRE(frames.size() == pairs.size());
    for (int n = 0; n <= total; ++n) {
      Image expected = symmetric_splat_frame(img, pairs[static_cast<std::size_t>(n)]);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (!mask.at(x, y))
            for (int c = 0; c < 3; ++c) expected.at(x, y, c) = img.at(x, y, c);
      CHECK(frames[static_cast<std::size_t>(n)] == expected);
    }
  }
}

TEST_CASE("unlocked static region follows the splat") {
  const int w = 16, h = 10;
  const Image img = random_image(w, h, 1, 4);
  const BinaryMask mask = left_half(w, h);
  const FlowField flow(w, h, Vec2f{2.0f, 0.0f});
  LoopConfig cfg;
  cfg.frames = 6;
  cfg.lock_static_region = false;
  const auto frames = generate_loop(img, flow, mask, cfg);
  const auto pairs = integrate_sequence(mask_flow(flow, mask), 6);
  for (int n = 0; n <= 6; ++n) {
    CHECK(frames[static_cast<std::size_t>(n)] == symmetric_splat_frame(img, pairs[static_cast<std::size_t>(n)]));
  }
}

TEST_CASE("output does not depend on the thread count") {
  const int w = 32, h = 24;
  const Image img = random_image(w, h, 3, 5);
  const BinaryMask mask = left_half(w, h);
  const FlowField flow = synth_flow(mask, 0.7, 1.5);
  LoopConfig cfg;
  cfg.frames = 25;
  cfg.threads = 1;
  const auto serial = generate_loop(img, flow, mask, cfg);
  for (int threads : {2, 4, 8, 0}) {
    cfg.threads = threads;
    CHECK(generate_loop(img, flow, mask, cfg) == serial);
  }
}

TEST_CASE("sink sees every index exactly once") {
  const Image img = random_image(8, 8, 3, 6);
  LoopConfig cfg;
  cfg.frames = 40;
  cfg.threads = 4;
  std::mutex mu;
  std::multiset<int> seen;
  generate_loop(img, FlowField(8, 8, Vec2f{0.5f, 0.0f}), BinaryMask(8, 8, true), cfg,
                [&](int n, const Image&) {
                  std::lock_guard lock(mu);
                  seen.insert(n);
                });
  CHECK(seen.size() == 41);
  for (int n = 0; n <= 40; ++n) CHECK(seen.count(n) == 1);
}

TEST_CASE("parallel_for") {
  std::atomic<int> sum{0};
  parallel_for(1000, 4, [&](int i) { sum += i; });
  CHECK(sum == 999 * 1000 / 2);
  parallel_for(0, 4, [&](int) { FAIL("not called"); });
  for (int threads : {1, 4}) {
    CHECK_THROWS_WITH_AS(parallel_for(100, threads,
                                      [](int i) {
                                        if (i == 37) throw std::runtime_error("boom");
                                      }),
                         "boom", std::runtime_error);
  }
}
