#include "printguard/core/raster.hpp"

#include <cmath>

namespace printguard {

namespace {
int round_half_away(double v) { return static_cast<int>(std::lround(v)); }
}  // namespace

void draw_line(GrayImage& img, Point origin, double angle, double length, std::uint8_t ink) {
  if (!img.contains(origin)) {
    throw OutOfBounds("draw_line origin (" + std::to_string(origin.row) + "," + std::to_string(origin.col) +
                      ") outside image");
  }
  if (!(length >= 0.0)) throw InvalidArgument("draw_line length must be non-negative");
  if (ink != kInk && ink != kBackground) throw InvalidArgument("draw_line ink must be 0 or 255");
  const Point end{origin.row + round_half_away(-length * std::sin(angle)),
                  origin.col + round_half_away(length * std::cos(angle))};
  for_each_line_pixel(origin, end, [&](int r, int c) {
    if (img.contains(r, c)) img.at(r, c) = ink;
  });
}

}  // namespace printguard
