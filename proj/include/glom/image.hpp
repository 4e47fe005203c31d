#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <glom/core.hpp>

namespace glom {

// 8-bit RGB image, interleaved row-major storage.
struct RGBImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  RGBImage() = default;
  RGBImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {
    if (w <= 0 || h <= 0) throw InvalidArgument("RGBImage: non-positive dimensions");
  }

  static RGBImage filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RGBImage img(w, h);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
      img.pixels[i] = r;
      img.pixels[i + 1] = g;
      img.pixels[i + 2] = b;
    }
    return img;
  }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * 3 + c;
  }
  std::uint8_t& at(int x, int y, int c) { return pixels[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[index(x, y, c)]; }

  bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  bool operator==(const RGBImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

inline RGBImage crop(const RGBImage& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > img.width || y0 + h > img.height)
    throw InvalidArgument("crop: window outside image");
  RGBImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

inline RGBImage resize_bilinear(const RGBImage& img, int nw, int nh) {
  if (nw <= 0 || nh <= 0) throw InvalidArgument("resize_bilinear: non-positive target");
  if (nw == img.width && nh == img.height) return img;
  RGBImage out(nw, nh);
  const double sx = static_cast<double>(img.width) / nw;
  const double sy = static_cast<double>(img.height) / nh;
  for (int y = 0; y < nh; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < nw; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = clamp_u8(std::round(top * (1.0 - wy) + bot * wy));
      }
    }
  }
  return out;
}

}  // namespace glom
