#include "printguard/core/image.hpp"

#include <algorithm>
#include <string>

namespace printguard {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ShapeError("image buffer length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
}

bool GrayImage::is_binary() const {
  return std::all_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v == kInk || v == kBackground; });
}

std::size_t GrayImage::count_ink() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), kInk));
}

GrayImage GrayImage::crop(int row0, int col0, int row1, int col1) const {
  if (row0 < 0 || col0 < 0 || row1 > height_ || col1 > width_ || row0 >= row1 || col0 >= col1) {
    throw OutOfBounds("crop rectangle outside image");
  }
  GrayImage out(col1 - col0, row1 - row0);
  for (int r = row0; r < row1; ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(index(r, col0)), col1 - col0,
                out.data_.begin() + static_cast<std::ptrdiff_t>(out.index(r - row0, 0)));
  }
  return out;
}

std::size_t count_differences(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError("cannot compare images of different dimensions");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a.data()[i] != b.data()[i];
  return n;
}

}  // namespace printguard
