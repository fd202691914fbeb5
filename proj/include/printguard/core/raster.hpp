#pragma once

#include "printguard/core/image.hpp"

namespace printguard {

/// Pixels on the Bresenham segment between two (possibly off-image) points,
/// visited in order from `from` to `to`, clipped to the image.
template <typename Visit>
void for_each_line_pixel(Point from, Point to, Visit&& visit);

/// Rasterizes the segment from `origin` of the given length at `angle`
/// (cos along columns, -sin along rows) and paints it with `ink`.
/// The endpoint is origin + (round(-L sin), round(L cos)), rounded half away
/// from zero. Off-image pixels are clipped.
void draw_line(GrayImage& img, Point origin, double angle, double length, std::uint8_t ink);

// ---------------------------------------------------------------------------

template <typename Visit>
void for_each_line_pixel(Point from, Point to, Visit&& visit) {
  const int dr = to.row > from.row ? to.row - from.row : from.row - to.row;
  const int dc = to.col > from.col ? to.col - from.col : from.col - to.col;
  const int sr = to.row > from.row ? 1 : -1;
  const int sc = to.col > from.col ? 1 : -1;
  int err = dc - dr;
  int r = from.row;
  int c = from.col;
  while (true) {
    visit(r, c);
    if (r == to.row && c == to.col) break;
    const int e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c += sc;
    }
    if (e2 < dc) {
      err += dc;
      r += sr;
    }
  }
}

}  // namespace printguard
