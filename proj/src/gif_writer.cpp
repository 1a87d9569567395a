#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "cinemagraph/codecs.hpp"

namespace cinemagraph {
namespace {

// Histogram bins hold colors reduced to 5 bits per channel.
constexpr int kBinBits = 5;
constexpr int kBinCount = 1 << (3 * kBinBits);

int bin_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  constexpr int shift = 8 - kBinBits;
  return ((r >> shift) << (2 * kBinBits)) | ((g >> shift) << kBinBits) | (b >> shift);
}

struct Bin {
  std::uint64_t count = 0;
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint8_t lo[3] = {255, 255, 255};
  std::uint8_t hi[3] = {0, 0, 0};
};

struct Box {
  std::vector<int> bins;
  std::uint64_t population = 0;
  int axis = 0;
  int extent = 0;
};

void measure(Box& box, const std::vector<Bin>& hist) {
  int lo[3] = {255, 255, 255};
  int hi[3] = {0, 0, 0};
  box.population = 0;
  for (int b : box.bins) {
    const Bin& bin = hist[static_cast<std::size_t>(b)];
    box.population += bin.count;
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min<int>(lo[c], bin.lo[c]);
      hi[c] = std::max<int>(hi[c], bin.hi[c]);
    }
  }
  box.extent = -1;
  for (int c = 0; c < 3; ++c) {
    if (hi[c] - lo[c] > box.extent) {
      box.extent = hi[c] - lo[c];
      box.axis = c;
    }
  }
}

double bin_mean(const Bin& bin, int c) { return static_cast<double>(bin.sum[c]) / bin.count; }

void put_u16(Bytes& out, int v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

class BitSink {
 public:
  explicit BitSink(Bytes& out) : out_(out) {}
  void put(std::uint32_t code, int width) {
    acc_ |= static_cast<std::uint64_t>(code) << bits_;
    bits_ += width;
    while (bits_ >= 8) {
      out_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
      acc_ >>= 8;
      bits_ -= 8;
    }
  }
  void flush() {
    if (bits_ > 0) out_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
    acc_ = 0;
    bits_ = 0;
  }

 private:
  Bytes& out_;
  std::uint64_t acc_ = 0;
  int bits_ = 0;
};

}  // namespace

std::vector<std::array<std::uint8_t, 3>> median_cut_palette(
    const std::vector<Bytes>& rgb_frames, int max_colors) {
  if (max_colors < 1) throw InvalidArgument("median_cut_palette: max_colors must be >= 1");
  std::vector<Bin> hist(kBinCount);
  for (const auto& frame : rgb_frames) {
    for (std::size_t i = 0; i + 2 < frame.size(); i += 3) {
      Bin& bin = hist[static_cast<std::size_t>(bin_of(frame[i], frame[i + 1], frame[i + 2]))];
      ++bin.count;
      for (int c = 0; c < 3; ++c) {
        bin.sum[c] += frame[i + c];
        bin.lo[c] = std::min(bin.lo[c], frame[i + c]);
        bin.hi[c] = std::max(bin.hi[c], frame[i + c]);
      }
    }
  }

  std::vector<Box> boxes(1);
  for (int b = 0; b < kBinCount; ++b) {
    if (hist[static_cast<std::size_t>(b)].count) boxes[0].bins.push_back(b);
  }
  if (boxes[0].bins.empty()) return {{0, 0, 0}};
  measure(boxes[0], hist);

  while (static_cast<int>(boxes.size()) < max_colors) {
    // Split the most populous box that still holds more than one bin.
    int pick = -1;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (boxes[i].bins.size() < 2) continue;
      if (pick < 0 || boxes[i].population > boxes[static_cast<std::size_t>(pick)].population) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;
    Box& box = boxes[static_cast<std::size_t>(pick)];
    const int axis = box.axis;
    std::stable_sort(box.bins.begin(), box.bins.end(), [&](int a, int b) {
      return bin_mean(hist[static_cast<std::size_t>(a)], axis) <
             bin_mean(hist[static_cast<std::size_t>(b)], axis);
    });
    std::uint64_t half = 0;
    std::size_t cut = 1;
    for (; cut < box.bins.size(); ++cut) {
      half += hist[static_cast<std::size_t>(box.bins[cut - 1])].count;
      if (2 * half >= box.population) break;
    }
    cut = std::clamp<std::size_t>(cut, 1, box.bins.size() - 1);
    Box upper;
    upper.bins.assign(box.bins.begin() + static_cast<std::ptrdiff_t>(cut), box.bins.end());
    box.bins.resize(cut);
    measure(box, hist);
    measure(upper, hist);
    boxes.push_back(std::move(upper));
  }

  std::vector<std::array<std::uint8_t, 3>> palette;
  palette.reserve(boxes.size());
  for (const auto& box : boxes) {
    double sum[3] = {0.0, 0.0, 0.0};
    for (int b : box.bins) {
      for (int c = 0; c < 3; ++c) sum[c] += static_cast<double>(hist[static_cast<std::size_t>(b)].sum[c]);
    }
    std::array<std::uint8_t, 3> color{};
    for (int c = 0; c < 3; ++c) {
      color[static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(std::lround(sum[c] / static_cast<double>(box.population)));
    }
    palette.push_back(color);
  }
  return palette;
}

Bytes lzw_encode(std::span<const std::uint8_t> indices, int min_code_size) {
  if (min_code_size < 2 || min_code_size > 8) {
    throw InvalidArgument("lzw_encode: min_code_size must be in [2, 8]");
  }
  const std::uint32_t clear = 1u << min_code_size;
  const std::uint32_t end = clear + 1;
  constexpr std::uint32_t kMaxCode = 4095;

  Bytes out;
  BitSink sink(out);
  std::unordered_map<std::uint32_t, std::uint32_t> table;
  table.reserve(8192);
  int width = min_code_size + 1;
  std::uint32_t next = end + 1;

  sink.put(clear, width);
  if (!indices.empty()) {
    std::uint32_t prefix = indices[0];
    for (std::size_t i = 1; i < indices.size(); ++i) {
      const std::uint32_t key = (prefix << 8) | indices[i];
      const auto it = table.find(key);
      if (it != table.end()) {
        prefix = it->second;
        continue;
      }
      sink.put(prefix, width);
      if (next <= kMaxCode) {
        table.emplace(key, next);
        // The decoder widens one code later than the encoder assigns.
        if (next == (1u << width) && width < 12) ++width;
        ++next;
      }
      if (next > kMaxCode) {
        sink.put(clear, width);
        table.clear();
        width = min_code_size + 1;
        next = end + 1;
      }
      prefix = indices[i];
    }
    sink.put(prefix, width);
  }
  sink.put(end, width);
  sink.flush();
  return out;
}

GifWriter::GifWriter(int width, int height, int fps) : width_(width), height_(height), fps_(fps) {
  if (width < 1 || height < 1 || width > 65535 || height > 65535) {
    throw InvalidArgument("gif: dimensions must be in [1, 65535]");
  }
  if (fps < 1) throw InvalidArgument("gif: fps must be >= 1");
}

void GifWriter::add_frame(const Image& frame) {
  if (frame.width() != width_ || frame.height() != height_) {
    throw DimensionMismatch("gif: frame size differs from the animation size");
  }
  const Bytes samples = to_bytes(frame);
  Bytes rgb(frame.pixel_count() * 3);
  const int ch = frame.channels();
  for (std::size_t p = 0; p < frame.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) rgb[p * 3 + c] = samples[p * ch + (ch >= 3 ? c : 0)];
  }
  frames_.push_back(std::move(rgb));
}

Bytes GifWriter::encode() const {
  if (frames_.empty()) throw InvalidArgument("gif: no frames");
  auto palette = median_cut_palette(frames_, 256);
  palette.resize(256, {0, 0, 0});

  // Nearest palette entry for each histogram bin center.
  std::vector<std::uint8_t> lookup(kBinCount);
  constexpr int shift = 8 - kBinBits;
  for (int b = 0; b < kBinCount; ++b) {
    const int rgb[3] = {((b >> (2 * kBinBits)) << shift) + (1 << (shift - 1)),
                        (((b >> kBinBits) & 31) << shift) + (1 << (shift - 1)),
                        ((b & 31) << shift) + (1 << (shift - 1))};
    int best = 0;
    int best_d = std::numeric_limits<int>::max();
    for (int p = 0; p < 256; ++p) {
      int d = 0;
      for (int c = 0; c < 3; ++c) {
        const int diff = rgb[c] - palette[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    lookup[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(best);
  }

  Bytes out = {'G', 'I', 'F', '8', '9', 'a'};
  put_u16(out, width_);
  put_u16(out, height_);
  out.push_back(0xF7);  // global table, 8-bit color resolution, 256 entries
  out.push_back(0);
  out.push_back(0);
  for (const auto& color : palette) out.insert(out.end(), color.begin(), color.end());

  // NETSCAPE2.0 extension: loop forever.
  const char app[] = "NETSCAPE2.0";
  out.insert(out.end(), {0x21, 0xFF, 0x0B});
  out.insert(out.end(), app, app + 11);
  out.insert(out.end(), {0x03, 0x01, 0x00, 0x00, 0x00});

  const int delay = std::max(1, static_cast<int>(std::lround(100.0 / fps_)));
  std::vector<std::uint8_t> indices(static_cast<std::size_t>(width_) * height_);
  for (const auto& frame : frames_) {
    out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04});  // dispose: leave in place
    put_u16(out, delay);
    out.insert(out.end(), {0x00, 0x00});

    out.push_back(0x2C);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, width_);
    put_u16(out, height_);
    out.push_back(0x00);

    for (std::size_t p = 0; p < indices.size(); ++p) {
      indices[p] = lookup[static_cast<std::size_t>(
          bin_of(frame[p * 3], frame[p * 3 + 1], frame[p * 3 + 2]))];
    }
    out.push_back(8);
    const Bytes data = lzw_encode(indices, 8);
    for (std::size_t i = 0; i < data.size(); i += 255) {
      const std::size_t n = std::min<std::size_t>(255, data.size() - i);
      out.push_back(static_cast<std::uint8_t>(n));
      out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(i),
                 data.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    out.push_back(0x00);
  }
  out.push_back(0x3B);
  return out;
}

void GifWriter::write(const std::filesystem::path& path) const { write_file(path, encode()); }

}  // namespace cinemagraph
