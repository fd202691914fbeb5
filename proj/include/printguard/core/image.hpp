#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "printguard/core/error.hpp"

namespace printguard {

inline constexpr std::uint8_t kInk = 255;
inline constexpr std::uint8_t kBackground = 0;

struct Point {
  int row = 0;
  int col = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// 8-bit single-channel raster, row-major. Ink is 255, background 0.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = kBackground);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool contains(Point p) const { return contains(p.row, p.col); }

  std::uint8_t& at(int row, int col) { return data_[index(row, col)]; }
  std::uint8_t at(int row, int col) const { return data_[index(row, col)]; }

  std::span<std::uint8_t> pixels() { return data_; }
  std::span<const std::uint8_t> pixels() const { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  std::span<const std::uint8_t> row(int r) const {
    return std::span<const std::uint8_t>(data_).subspan(index(r, 0), static_cast<std::size_t>(width_));
  }

  /// True when every pixel is 0 or 255.
  bool is_binary() const;
  std::size_t count_ink() const;

  /// Copies the sub-rectangle [row0,row1) x [col0,col1).
  GrayImage crop(int row0, int col0, int row1, int col1) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Number of positions at which two equally sized images differ.
std::size_t count_differences(const GrayImage& a, const GrayImage& b);

}  // namespace printguard
