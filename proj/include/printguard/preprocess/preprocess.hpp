#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "printguard/core/image.hpp"
#include "printguard/nn/tensor.hpp"
#include "printguard/textgen/textgen.hpp"

namespace printguard::preprocess {

using BoundingBox = textgen::Box;

inline constexpr int kStandardRows = 45;
inline constexpr int kStandardCols = 132;

/// Rec.601 luma, rounded to nearest.
GrayImage to_grayscale(std::span<const std::uint8_t> rgb, int width, int height);

/// Otsu threshold over the 256-bin histogram; pixels <= t form the dark class.
/// Returns -1 when the histogram holds a single level.
int otsu_threshold(const GrayImage& gray);

/// Global Otsu binarization that also normalizes polarity to ink = 255.
/// The dark class is ink unless it strictly outnumbers the bright class, in
/// which case the image is taken to be in ink-bright polarity already.
/// A single-level image maps to all background.
GrayImage binarize(const GrayImage& gray);

struct SegmentationConfig {
  int row_threshold = 2;  // rows with at most this many ink pixels count as blank
  int gap_rows = 10;
  int gap_cols = 12;
  int padding = 4;
};

/// Projection-profile segmentation of a binary sheet into word boxes, in
/// reading order.
std::vector<BoundingBox> segment_sheet(const GrayImage& sheet, const SegmentationConfig& cfg = {});

/// Bilinear resample to 45 x 132 (half-pixel centres, edge clamped), then
/// threshold at 128 back to {0, 255}.
GrayImage resize_to_standard(const GrayImage& seg);

/// 45 x 132 x 1 tensor, pixel / 255 (ink maps to 1.0).
nn::Tensor image_to_tensor(const GrayImage& img);

}  // namespace printguard::preprocess
