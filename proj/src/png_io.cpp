#include <png.h>

#include <cstring>
#include <memory>
#include <string>

#include "cinemagraph/codecs.hpp"

namespace cinemagraph {
namespace {

// Owns a png_image and releases libpng state on scope exit.
struct PngImage {
  png_image image;

  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

int channels_for(png_uint_32 format) {
  return static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(format));
}

Image finish_read(PngImage& png, const std::string& source) {
  // 16-bit data without color-space chunks is sRGB, not linear.
  png.image.flags |= PNG_IMAGE_FLAG_16BIT_sRGB;
  const bool alpha = png.image.format & PNG_FORMAT_FLAG_ALPHA;
  const bool color = png.image.format & PNG_FORMAT_FLAG_COLOR;
  if (alpha) {
    png.image.format = PNG_FORMAT_RGBA;
  } else {
    png.image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  }
  const int channels = channels_for(png.image.format);
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw FormatError("png: " + source + ": " + png.image.message);
  }
  const int width = static_cast<int>(png.image.width);
  const int height = static_cast<int>(png.image.height);
  std::vector<float> data(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) data[i] = buffer[i] / 255.0f;
  return Image(width, height, channels, std::move(data));
}

png_uint_32 format_for(int channels) {
  switch (channels) {
    case 1:
      return PNG_FORMAT_GRAY;
    case 3:
      return PNG_FORMAT_RGB;
    case 4:
      return PNG_FORMAT_RGBA;
    default:
      throw InvalidArgument("png: unsupported channel count " + std::to_string(channels));
  }
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw FormatError("png: " + path.string() + ": " + png.image.message);
  }
  return finish_read(png, path.string());
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("png: ") + png.image.message);
  }
  return finish_read(png, "<memory>");
}

Bytes encode_png(const Image& image) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width());
  png.image.height = static_cast<png_uint_32>(image.height());
  png.image.format = format_for(image.channels());
  const Bytes samples = to_bytes(image);

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, samples.data(), 0, nullptr)) {
    throw FormatError(std::string("png: ") + png.image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, samples.data(), 0, nullptr)) {
    throw FormatError(std::string("png: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  write_file(path, encode_png(image));
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw FormatError("png: " + path.string() + ": " + png.image.message);
  }
  png.image.flags |= PNG_IMAGE_FLAG_16BIT_sRGB;
  png.image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw FormatError("png: " + path.string() + ": " + png.image.message);
  }
  std::vector<std::uint8_t> data(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) data[i] = buffer[i] >= 128;
  return BinaryMask(static_cast<int>(png.image.width), static_cast<int>(png.image.height),
                    std::move(data));
}

void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<float> data(mask.pixel_count());
  const auto src = mask.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = src[i] ? 1.0f : 0.0f;
  write_png(Image(mask.width(), mask.height(), 1, std::move(data)), path);
}

}  // namespace cinemagraph
