#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "quantiscene/scene.hpp"

namespace quantiscene {

enum class Antialias : std::uint8_t {
  none,
  /// 4x4 ordered-grid supersampling, box-filtered down to the output resolution.
  supersample_4x,
};

struct RasterConfig {
  int resolution = 64;
  Rgb background{0, 0, 0};
  Antialias antialias = Antialias::none;
};

/// Row-major 8-bit RGB; row 0 is the top of the canvas (canvas y = 1).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Rgb at(int x, int y) const {
    const auto i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                        static_cast<std::size_t>(x));
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Flat-fill rendering in scene order; later objects draw over earlier ones.
/// Throws std::invalid_argument for resolution < 16.
Image render(const Scene& scene, const RasterConfig& config = {});

std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace quantiscene
