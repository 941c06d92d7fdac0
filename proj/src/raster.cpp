#include "quantiscene/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "quantiscene/errors.hpp"

namespace quantiscene {
namespace {

constexpr std::uint8_t kBackground = 0xFF;

struct Span {
  double x0, x1;
};

// x-extent of a row at height y through a rotated ellipse with full axes (w, h).
std::optional<Span> ellipse_span(Vec2 center, double rotation, double w, double h, double y) {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double dy = y - center.y;
  const double iw = 1.0 / (w * w), ih = 1.0 / (h * h);
  const double a = c * c * iw + s * s * ih;
  const double b = 2.0 * dy * s * c * (iw - ih);
  const double k = dy * dy * (s * s * iw + c * c * ih) - 0.25;
  const double disc = b * b - 4 * a * k;
  if (disc < 0) return std::nullopt;
  const double root = std::sqrt(disc);
  return Span{center.x + (-b - root) / (2 * a), center.x + (-b + root) / (2 * a)};
}

// Even-odd crossings of the horizontal line at y with a closed polygon.
std::vector<Span> polygon_spans(const Polygon& poly, double y) {
  std::vector<double> xs;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % n];
    if ((p.y <= y && y < q.y) || (q.y <= y && y < p.y)) {
      xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
  }
  std::sort(xs.begin(), xs.end());
  std::vector<Span> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) spans.push_back({xs[i], xs[i + 1]});
  return spans;
}

std::vector<Span> row_spans(const ObjectSpec& o, const Polygon& poly, double y) {
  switch (o.shape) {
    case ShapeKind::circle:
    case ShapeKind::ellipse: {
      if (auto s = ellipse_span(o.center, o.rotation, o.size.width, o.size.height, y)) return {*s};
      return {};
    }
    case ShapeKind::semicircle: {
      // Disk of diameter w centered w/4 below the object center (in its frame),
      // cut by the flat edge through that disk center.
      const double w = o.size.width;
      const double c = std::cos(o.rotation), s = std::sin(o.rotation);
      const Vec2 disk = o.center + rotate({0.0, -0.25 * w}, o.rotation);
      auto span = ellipse_span(disk, o.rotation, w, w, y);
      if (!span) return {};
      // Local height above the flat edge: -s * (x - disk.x) + c * (y - disk.y) >= 0.
      const double dy = y - disk.y;
      if (std::abs(s) < 1e-15) {
        if (c * dy < 0) return {};
      } else {
        const double bound = disk.x + c * dy / s;
        if (s > 0) span->x1 = std::min(span->x1, bound);
        else span->x0 = std::max(span->x0, bound);
      }
      if (span->x0 > span->x1) return {};
      return {*span};
    }
    default:
      return polygon_spans(poly, y);
  }
}

}  // namespace

Image render(const Scene& scene, const RasterConfig& config) {
  if (config.resolution < 16) throw std::invalid_argument("raster resolution must be at least 16");
  const int per_axis = config.antialias == Antialias::supersample_4x ? 4 : 1;
  const int n = config.resolution * per_axis;
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                                    kBackground);

  for (const ObjectSpec& o : scene.objects) {
    const Polygon poly = outline(o);
    const Footprint f = footprint(o);
    const double top = std::min(1.0, o.center.y + f.radius);
    const double bottom = std::max(0.0, o.center.y - f.radius);
    const int row_begin = std::max(0, static_cast<int>(std::floor((1.0 - top) * n - 0.5)));
    const int row_end = std::min(n - 1, static_cast<int>(std::ceil((1.0 - bottom) * n - 0.5)));
    const auto color = static_cast<std::uint8_t>(o.color);
    for (int row = row_begin; row <= row_end; ++row) {
      const double y = 1.0 - (row + 0.5) / n;
      for (const Span& span : row_spans(o, poly, y)) {
        const int first = std::max(0, static_cast<int>(std::ceil(span.x0 * n - 0.5)));
        const int last = std::min(n - 1, static_cast<int>(std::floor(span.x1 * n - 0.5)));
        auto* line = samples.data() + static_cast<std::size_t>(row) * static_cast<std::size_t>(n);
        for (int col = first; col <= last; ++col) line[col] = color;
      }
    }
  }

  Image image;
  image.width = image.height = config.resolution;
  image.rgb.resize(3 * static_cast<std::size_t>(config.resolution) *
                   static_cast<std::size_t>(config.resolution));
  const int count = per_axis * per_axis;
  for (int py = 0; py < config.resolution; ++py) {
    for (int px = 0; px < config.resolution; ++px) {
      int sum[3] = {0, 0, 0};
      for (int sy = 0; sy < per_axis; ++sy) {
        for (int sx = 0; sx < per_axis; ++sx) {
          const std::uint8_t s = samples[static_cast<std::size_t>(py * per_axis + sy) * n +
                                         static_cast<std::size_t>(px * per_axis + sx)];
          const Rgb c = s == kBackground ? config.background : rgb(static_cast<Color>(s));
          sum[0] += c.r;
          sum[1] += c.g;
          sum[2] += c.b;
        }
      }
      auto* out = image.rgb.data() + 3 * (static_cast<std::size_t>(py) * config.resolution + px);
      for (int ch = 0; ch < 3; ++ch) out[ch] = static_cast<std::uint8_t>((sum[ch] + count / 2) / count);
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encoding failed");
  }
  png_set_write_fn(
      png, &bytes,
      [](png_structp p, png_bytep data, png_size_t length) {
        auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        out->insert(out->end(), data, data + length);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.rgb.data() + 3 * static_cast<std::size_t>(y) * image.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("cannot write " + path.string());
}

}  // namespace quantiscene
