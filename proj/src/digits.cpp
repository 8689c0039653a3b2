#include "ghostsim/digits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ghostsim/error.hpp"

namespace ghostsim {
namespace {

struct Point {
  double x, y;
};
using Stroke = std::vector<Point>;

Stroke arc(double cx, double cy, double rx, double ry, double from_deg, double to_deg) {
  Stroke s;
  constexpr int kSteps = 24;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = (from_deg + (to_deg - from_deg) * i / kSteps) * std::numbers::pi / 180.0;
    s.push_back({cx + rx * std::cos(t), cy - ry * std::sin(t)});
  }
  return s;
}

// Unit-square glyphs, y growing downward. Angles in arc() are
// counterclockwise from +x.
std::vector<Stroke> glyph(int value) {
  switch (value) {
    case 0: return {arc(0.5, 0.5, 0.2, 0.31, 0, 360)};
    case 1: return {{{0.40, 0.30}, {0.53, 0.19}, {0.53, 0.81}}};
    case 2: return {arc(0.5, 0.35, 0.2, 0.16, 160, -40), {{0.65, 0.45}, {0.30, 0.81}, {0.72, 0.81}}};
    case 3: return {arc(0.49, 0.34, 0.19, 0.15, 150, -90), arc(0.49, 0.65, 0.21, 0.16, 90, -150)};
    case 4: return {{{0.62, 0.81}, {0.62, 0.19}, {0.28, 0.62}, {0.74, 0.62}}};
    case 5: return {{{0.70, 0.19}, {0.34, 0.19}, {0.31, 0.46}}, arc(0.49, 0.62, 0.21, 0.19, 140, -150)};
    case 6: return {{{0.64, 0.19}, {0.36, 0.52}}, arc(0.5, 0.64, 0.19, 0.17, 0, 360)};
    case 7: return {{{0.28, 0.20}, {0.72, 0.20}, {0.42, 0.82}}};
    case 8: return {arc(0.5, 0.34, 0.17, 0.15, 0, 360), arc(0.5, 0.65, 0.2, 0.16, 0, 360)};
    case 9: return {arc(0.5, 0.36, 0.19, 0.17, 0, 360), {{0.69, 0.40}, {0.40, 0.81}}};
    default: break;
  }
  throw Error(ErrorCode::IndexOutOfRange, "digit " + std::to_string(value) + " is not 0-9");
}

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace

Image render_digit(int value, std::size_t size, double stroke_fraction) {
  const std::vector<Stroke> strokes = glyph(value);
  if (size < 16) throw Error(ErrorCode::TooSmall, "digit canvas must be at least 16 px");
  Image out(size, size);
  const double scale = double(size);
  const double half_width = stroke_fraction * scale / 2.0;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const Point p{(double(c) + 0.5), (double(r) + 0.5)};
      double d = std::numeric_limits<double>::max();
      for (const Stroke& s : strokes) {
        for (std::size_t k = 0; k + 1 < s.size(); ++k) {
          const Point a{s[k].x * scale, s[k].y * scale};
          const Point b{s[k + 1].x * scale, s[k + 1].y * scale};
          d = std::min(d, segment_distance(p, a, b));
        }
      }
      // One-pixel linear ramp at the stroke edge.
      out(r, c) = std::clamp(half_width - d + 0.5, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace ghostsim
