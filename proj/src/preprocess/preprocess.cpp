#include "printguard/preprocess/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace printguard::preprocess {

GrayImage to_grayscale(std::span<const std::uint8_t> rgb, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("to_grayscale: dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (rgb.size() != 3 * n) {
    throw ShapeError("to_grayscale: buffer has " + std::to_string(rgb.size()) + " bytes, expected " +
                     std::to_string(3 * n));
  }
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
  }
  return GrayImage(width, height, std::move(out));
}

int otsu_threshold(const GrayImage& gray) {
  std::array<double, 256> hist{};
  for (std::uint8_t v : gray.pixels()) hist[v] += 1.0;
  const double total = static_cast<double>(gray.size());
  double sum_all = 0.0;
  for (int v = 0; v < 256; ++v) sum_all += v * hist[static_cast<std::size_t>(v)];

  int best_t = -1;
  double best_var = 0.0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    sum0 += t * hist[static_cast<std::size_t>(t)];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return best_t;
}

GrayImage binarize(const GrayImage& gray) {
  GrayImage out(gray.width(), gray.height());
  const int t = otsu_threshold(gray);
  if (t < 0) return out;
  std::size_t dark = 0;
  for (std::uint8_t v : gray.pixels()) dark += v <= t;
  const bool dark_is_ink = dark <= gray.size() - dark;
  auto src = gray.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const bool is_dark = src[i] <= t;
    dst[i] = (is_dark == dark_is_ink) ? kInk : kBackground;
  }
  return out;
}

namespace {

struct Run {
  int begin = 0;
  int end = 0;  // exclusive
};

// Maximal runs of "occupied" indices, merging runs separated by fewer than
// `min_gap` unoccupied indices.
template <typename Occupied>
std::vector<Run> occupied_runs(int count, int min_gap, Occupied&& occupied) {
  std::vector<Run> runs;
  int start = -1;
  int last = -1;
  for (int i = 0; i < count; ++i) {
    if (!occupied(i)) continue;
    if (start < 0) {
      start = i;
    } else if (i - last - 1 >= min_gap) {
      runs.push_back({start, last + 1});
      start = i;
    }
    last = i;
  }
  if (start >= 0) runs.push_back({start, last + 1});
  return runs;
}

}  // namespace

std::vector<BoundingBox> segment_sheet(const GrayImage& sheet, const SegmentationConfig& cfg) {
  const int h = sheet.height();
  const int w = sheet.width();
  std::vector<int> row_counts(static_cast<std::size_t>(h), 0);
  for (int r = 0; r < h; ++r) {
    const auto row = sheet.row(r);
    row_counts[static_cast<std::size_t>(r)] = static_cast<int>(std::count(row.begin(), row.end(), kInk));
  }
  const auto lines = occupied_runs(h, cfg.gap_rows,
                                   [&](int r) { return row_counts[static_cast<std::size_t>(r)] > cfg.row_threshold; });

  std::vector<BoundingBox> boxes;
  std::vector<int> col_counts(static_cast<std::size_t>(w));
  for (const Run& line : lines) {
    std::fill(col_counts.begin(), col_counts.end(), 0);
    for (int r = line.begin; r < line.end; ++r) {
      const auto row = sheet.row(r);
      for (int c = 0; c < w; ++c) col_counts[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c)] == kInk;
    }
    const auto words =
        occupied_runs(w, cfg.gap_cols, [&](int c) { return col_counts[static_cast<std::size_t>(c)] > 0; });
    for (const Run& word : words) {
      // Tighten rows to the word's own ink.
      int top = line.end;
      int bottom = line.begin - 1;
      for (int r = line.begin; r < line.end; ++r) {
        const auto row = sheet.row(r);
        const bool any = std::any_of(row.begin() + word.begin, row.begin() + word.end,
                                     [](std::uint8_t v) { return v == kInk; });
        if (any) {
          top = std::min(top, r);
          bottom = std::max(bottom, r);
        }
      }
      boxes.push_back({std::max(0, top - cfg.padding), std::max(0, word.begin - cfg.padding),
                       std::min(h, bottom + 1 + cfg.padding), std::min(w, word.end + cfg.padding)});
    }
  }
  return boxes;
}

GrayImage resize_to_standard(const GrayImage& seg) {
  if (seg.empty()) throw InvalidArgument("resize_to_standard: empty input");
  GrayImage out(kStandardCols, kStandardRows);
  const double sy_scale = static_cast<double>(seg.height()) / kStandardRows;
  const double sx_scale = static_cast<double>(seg.width()) / kStandardCols;

  struct Tap {
    int i0;
    int i1;
    double f;
  };
  auto tap = [](int dst, double scale, int extent) {
    const double s = std::clamp((dst + 0.5) * scale - 0.5, 0.0, static_cast<double>(extent - 1));
    const int i0 = static_cast<int>(std::floor(s));
    return Tap{i0, std::min(i0 + 1, extent - 1), s - i0};
  };
  std::vector<Tap> xs(kStandardCols);
  for (int x = 0; x < kStandardCols; ++x) xs[static_cast<std::size_t>(x)] = tap(x, sx_scale, seg.width());

  for (int y = 0; y < kStandardRows; ++y) {
    const Tap ty = tap(y, sy_scale, seg.height());
    for (int x = 0; x < kStandardCols; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const double top = (1.0 - tx.f) * seg.at(ty.i0, tx.i0) + tx.f * seg.at(ty.i0, tx.i1);
      const double bot = (1.0 - tx.f) * seg.at(ty.i1, tx.i0) + tx.f * seg.at(ty.i1, tx.i1);
      const double v = (1.0 - ty.f) * top + ty.f * bot;
      out.at(y, x) = v >= 128.0 ? kInk : kBackground;
    }
  }
  return out;
}

nn::Tensor image_to_tensor(const GrayImage& img) {
  if (img.height() != kStandardRows || img.width() != kStandardCols) {
    throw ShapeError("image_to_tensor: expected 45x132, got " + std::to_string(img.height()) + "x" +
                     std::to_string(img.width()));
  }
  nn::Tensor t({static_cast<std::size_t>(kStandardRows), static_cast<std::size_t>(kStandardCols), 1});
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = static_cast<float>(px[i]) / 255.0f;
  return t;
}

}  // namespace printguard::preprocess
