#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace botsort {

/// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f);

  float at(int x, int y) const noexcept { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) noexcept { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Pixel with coordinates clamped to the image (border replication).
  float clamped(int x, int y) const noexcept;

  /// Bilinear sample at a real-valued position, border replicated.
  float sample(double x, double y) const noexcept;

  bool empty() const noexcept { return pixels.empty(); }
};

/// Binary 8-bit or 16-bit PGM (P5).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// 5-tap Gaussian blur followed by 2x decimation. Output pixel x sits on input pixel 2x.
GrayImage pyr_down(const GrayImage& img);

/// Mean of each factor x factor block; trailing partial blocks are dropped.
GrayImage downscale(const GrayImage& img, int factor);

}  // namespace botsort
