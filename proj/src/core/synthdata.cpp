#include "core/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spikebench::data {

namespace {

constexpr int kSide = 28;
constexpr double kPi = 3.14159265358979323846;

using Point = std::pair<double, double>;   // (x, y) in a unit box, y grows downward
using Stroke = std::vector<Point>;

Stroke line(Point a, Point b) { return {a, b}; }

// Circular arc from angle a0 to a1 (radians, clockwise with screen y).
Stroke arc(Point center, double rx, double ry, double a0, double a1, int segments = 24) {
  Stroke s;
  s.reserve(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    const double a = a0 + (a1 - a0) * k / segments;
    s.push_back({center.first + rx * std::cos(a), center.second + ry * std::sin(a)});
  }
  return s;
}

// Stroke skeletons per digit, drawn in a unit box. Kept deliberately plain:
// the jitter applied at render time provides the intra-class variation.
std::vector<Stroke> glyph(int digit) {
  switch (digit) {
    case 0:
      return {arc({0.5, 0.5}, 0.30, 0.42, 0.0, 2.0 * kPi, 40)};
    case 1:
      return {line({0.38, 0.26}, {0.56, 0.08}), line({0.56, 0.08}, {0.56, 0.92}),
              line({0.36, 0.92}, {0.74, 0.92})};
    case 2:
      return {arc({0.5, 0.30}, 0.28, 0.24, kPi, 2.0 * kPi, 20),
              line({0.78, 0.30}, {0.22, 0.90}), line({0.22, 0.90}, {0.80, 0.90})};
    case 3:
      return {arc({0.46, 0.28}, 0.26, 0.21, -0.75 * kPi, 0.4 * kPi, 20),
              arc({0.46, 0.70}, 0.28, 0.23, -0.4 * kPi, 0.75 * kPi, 20)};
    case 4:
      return {line({0.66, 0.08}, {0.22, 0.62}), line({0.22, 0.62}, {0.86, 0.62}),
              line({0.66, 0.08}, {0.66, 0.92})};
    case 5:
      return {line({0.76, 0.10}, {0.28, 0.10}), line({0.28, 0.10}, {0.26, 0.46}),
              arc({0.48, 0.66}, 0.26, 0.24, -0.55 * kPi, 0.8 * kPi, 22)};
    case 6:
      return {line({0.64, 0.08}, {0.34, 0.48}), arc({0.5, 0.68}, 0.22, 0.22, 0.0, 2.0 * kPi, 28)};
    case 7:
      return {line({0.20, 0.10}, {0.80, 0.10}), line({0.80, 0.10}, {0.42, 0.92})};
    case 8:
      return {arc({0.5, 0.30}, 0.21, 0.19, 0.0, 2.0 * kPi, 28),
              arc({0.5, 0.70}, 0.25, 0.21, 0.0, 2.0 * kPi, 28)};
    case 9:
      return {arc({0.5, 0.32}, 0.22, 0.21, 0.0, 2.0 * kPi, 28), line({0.72, 0.34}, {0.62, 0.92})};
    default:
      throw InvalidArgumentError("glyph: digit out of range");
  }
}

struct Jitter {
  double angle;      // radians
  double scale;
  double dx, dy;     // pixels
  double radius;     // stroke radius in pixels
  double peak;       // brightest pixel value
};

void render(int digit, const Jitter& j, Rng& noise_rng, std::uint8_t* out) {
  std::vector<double> canvas(kSide * kSide, 0.0);
  const double c = std::cos(j.angle), s = std::sin(j.angle);
  const double span = 22.0 * j.scale;  // glyph box in pixels, centered
  const double off = (kSide - 1) / 2.0;

  auto to_px = [&](Point p) -> Point {
    const double ux = (p.first - 0.5) * span;
    const double uy = (p.second - 0.5) * span;
    return {off + j.dx + c * ux - s * uy, off + j.dy + s * ux + c * uy};
  };

  const double sigma = j.radius / 1.5;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const int reach = static_cast<int>(std::ceil(j.radius * 2.2));

  auto stamp = [&](Point p) {
    const int cx = static_cast<int>(std::lround(p.first));
    const int cy = static_cast<int>(std::lround(p.second));
    for (int y = cy - reach; y <= cy + reach; ++y) {
      if (y < 0 || y >= kSide) continue;
      for (int x = cx - reach; x <= cx + reach; ++x) {
        if (x < 0 || x >= kSide) continue;
        const double ddx = x - p.first, ddy = y - p.second;
        const double val = std::exp(-(ddx * ddx + ddy * ddy) * inv2s2);
        double& px = canvas[y * kSide + x];
        px = std::max(px, val);
      }
    }
  };

  for (const auto& stroke : glyph(digit)) {
    for (std::size_t k = 0; k + 1 < stroke.size(); ++k) {
      const Point a = to_px(stroke[k]);
      const Point b = to_px(stroke[k + 1]);
      const double len = std::hypot(b.first - a.first, b.second - a.second);
      const int n = std::max(1, static_cast<int>(std::ceil(len / 0.4)));
      for (int q = 0; q <= n; ++q) {
        const double t = static_cast<double>(q) / n;
        stamp({a.first + t * (b.first - a.first), a.second + t * (b.second - a.second)});
      }
    }
  }

  double maxv = 0.0;
  for (double px : canvas) maxv = std::max(maxv, px);
  const double gain = maxv > 0.0 ? j.peak / maxv : 0.0;
  for (double& px : canvas) px *= gain;

  // A handful of dim speckles so backgrounds are not perfectly clean.
  const int speckles = 6 + static_cast<int>(uniform01(noise_rng) * 6.0);
  for (int k = 0; k < speckles; ++k) {
    const int x = static_cast<int>(uniform01(noise_rng) * kSide);
    const int y = static_cast<int>(uniform01(noise_rng) * kSide);
    canvas[y * kSide + x] += uniform_range(noise_rng, 8.0, 40.0);
  }

  for (int k = 0; k < kSide * kSide; ++k)
    out[k] = static_cast<std::uint8_t>(std::clamp(canvas[k], 0.0, 255.0));
}

}  // namespace

Dataset synthesize_digits(std::size_t per_class, std::uint64_t seed) {
  if (per_class == 0) throw InvalidArgumentError("synthesize_digits: per_class must be > 0");

  Dataset ds;
  ds.rows = kSide;
  ds.cols = kSide;
  const std::size_t n = per_class * 10;
  ds.images.resize(n * kSide * kSide);
  ds.labels.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const int digit = static_cast<int>(i % 10);
    const std::size_t instance = i / 10;
    // One generator per sample keyed by (seed, digit, instance):
    // regenerating any single image never depends on generation order.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(digit), instance));

    Jitter j;
    j.angle = uniform_range(rng, -0.16, 0.16);
    j.scale = uniform_range(rng, 0.82, 1.10);
    j.dx = uniform_range(rng, -2.2, 2.2);
    j.dy = uniform_range(rng, -2.2, 2.2);
    j.radius = uniform_range(rng, 1.0, 1.6);
    j.peak = uniform_range(rng, 180.0, 255.0);

    ds.labels[i] = static_cast<std::uint8_t>(digit);
    render(digit, j, rng, ds.images.data() + i * kSide * kSide);
  }
  return ds;
}

}  // namespace spikebench::data
