#include <gtest/gtest.h>

#include <cmath>

#include "printguard/preprocess/preprocess.hpp"
#include "printguard/textgen/textgen.hpp"

using namespace printguard;
using namespace printguard::preprocess;

namespace {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const int r0 = std::max(a.row0, b.row0), r1 = std::min(a.row1, b.row1);
  const int c0 = std::max(a.col0, b.col0), c1 = std::min(a.col1, b.col1);
  const double inter = (r1 > r0 && c1 > c0) ? static_cast<double>(r1 - r0) * (c1 - c0) : 0.0;
  return inter / static_cast<double>(a.area() + b.area() - inter);
}

// Naive Otsu: evaluate the between-class variance for every t from scratch.
int brute_otsu(const GrayImage& g) {
  int best = -1;
  double best_var = 0;
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (std::uint8_t v : g.pixels()) {
      if (v <= t) {
        n0 += 1;
        s0 += v;
      } else {
        n1 += 1;
        s1 += v;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double d = s0 / n0 - s1 / n1;
    const double var = n0 * n1 * d * d;
    if (var > best_var * (1 + 1e-12)) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

}  // namespace

TEST(ToGrayscale, Rec601Luma) {
  const std::vector<std::uint8_t> rgb = {255, 255, 255, 255, 0, 0, 0, 255, 0, 0, 0, 255};
  const GrayImage g = to_grayscale(rgb, 4, 1);
  EXPECT_EQ(g.at(0, 0), 255);
  EXPECT_EQ(g.at(0, 1), 76);
  EXPECT_EQ(g.at(0, 2), 150);
  EXPECT_EQ(g.at(0, 3), 29);
}

TEST(ToGrayscale, GrayFixedPoint) {
  std::vector<std::uint8_t> rgb;
  for (int v = 0; v < 256; ++v) rgb.insert(rgb.end(), 3, static_cast<std::uint8_t>(v));
  const GrayImage g = to_grayscale(rgb, 256, 1);
  for (int v = 0; v < 256; ++v) EXPECT_EQ(g.at(0, v), v);
}

TEST(ToGrayscale, LengthMismatch) {
  EXPECT_THROW(to_grayscale(std::vector<std::uint8_t>(5), 2, 1), ShapeError);
}

TEST(Binarize, ConstantImageIsBlank) {
  for (std::uint8_t v : {0, 77, 255}) {
    const GrayImage out = binarize(GrayImage(9, 7, v));
    EXPECT_EQ(out.count_ink(), 0u);
    EXPECT_EQ(otsu_threshold(GrayImage(9, 7, v)), -1);
  }
}

TEST(Binarize, TwoSpikes) {
  GrayImage g(10, 10);
  for (std::size_t i = 0; i < g.size(); ++i) g.pixels()[i] = i % 2 ? 230 : 20;
  const int t = otsu_threshold(g);
  EXPECT_GE(t, 20);
  EXPECT_LT(t, 230);
  const GrayImage b = binarize(g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(b.data()[i], g.data()[i] == 20 ? kInk : kBackground);
}

TEST(Binarize, DarkTextOnLightPaper) {
  GrayImage g(20, 10, 240);
  for (int c = 3; c < 15; ++c) g.at(4, c) = 15;
  const GrayImage b = binarize(g);
  EXPECT_EQ(b.count_ink(), 12u);
  EXPECT_EQ(b.at(4, 3), kInk);
}

TEST(Binarize, IdempotentOnInkPolarityImages) {
  Rng rng(1, 1);
  const textgen::GlyphAtlas atlas;
  for (int i = 0; i < 50; ++i) {
    const GrayImage seg = resize_to_standard(textgen::render_segment({textgen::sample_word(rng, 2, 8), -2, 4}, atlas));
    EXPECT_EQ(binarize(seg), seg);
  }
}

TEST(Otsu, MatchesBruteForce) {
  Rng rng(2, 1);
  for (int trial = 0; trial < 30; ++trial) {
    GrayImage g(17, 13);
    const int a = static_cast<int>(rng.below(120)), b = 130 + static_cast<int>(rng.below(120));
    for (auto& v : g.pixels()) {
      const double centre = rng.below(3) ? a : b;
      v = static_cast<std::uint8_t>(std::clamp(std::lround(rng.normal(centre, 12)), 0L, 255L));
    }
    EXPECT_EQ(otsu_threshold(g), brute_otsu(g));
  }
}

TEST(Resize, IdentityAtStandardSize) {
  Rng rng(3, 1);
  GrayImage g(132, 45);
  for (auto& v : g.pixels()) v = rng.below(2) ? kInk : kBackground;
  EXPECT_EQ(resize_to_standard(g), g);
}

TEST(Resize, ConstantField) {
  const GrayImage out = resize_to_standard(GrayImage(301, 77, kInk));
  EXPECT_EQ(out.width(), 132);
  EXPECT_EQ(out.height(), 45);
  EXPECT_EQ(out.count_ink(), out.size());
}

TEST(Resize, ExactHalvingIsBlockAverage) {
  Rng rng(4, 1);
  for (int trial = 0; trial < 5; ++trial) {
    GrayImage g(264, 90);
    for (auto& v : g.pixels()) v = rng.below(2) ? kInk : kBackground;
    const GrayImage out = resize_to_standard(g);
    for (int y = 0; y < 45; ++y) {
      for (int x = 0; x < 132; ++x) {
        const int sum = g.at(2 * y, 2 * x) + g.at(2 * y, 2 * x + 1) + g.at(2 * y + 1, 2 * x) + g.at(2 * y + 1, 2 * x + 1);
        ASSERT_EQ(out.at(y, x), sum / 4.0 >= 128.0 ? kInk : kBackground);
      }
    }
  }
}

TEST(Resize, OutputAlwaysStandardAndBinary) {
  Rng rng(5, 1);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage g(1 + static_cast<int>(rng.below(300)), 1 + static_cast<int>(rng.below(100)));
    for (auto& v : g.pixels()) v = static_cast<std::uint8_t>(rng.below(256));
    const GrayImage out = resize_to_standard(g);
    ASSERT_EQ(out.width(), 132);
    ASSERT_EQ(out.height(), 45);
    ASSERT_TRUE(out.is_binary());
  }
  EXPECT_THROW(resize_to_standard(GrayImage()), InvalidArgument);
}

TEST(ImageToTensor, Scaling) {
  GrayImage g(132, 45);
  g.at(7, 9) = kInk;
  const nn::Tensor t = image_to_tensor(g);
  EXPECT_EQ(t.shape(), (nn::Shape{45, 132, 1}));
  for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(t[i], i == 7 * 132 + 9 ? 1.0f : 0.0f);
  const nn::Tensor full = image_to_tensor(GrayImage(132, 45, kInk));
  for (float v : full.values()) ASSERT_EQ(v, 1.0f);
  EXPECT_THROW(image_to_tensor(GrayImage(45, 132)), ShapeError);
}

TEST(Segment, BlankSheet) { EXPECT_TRUE(segment_sheet(GrayImage(500, 400)).empty()); }

TEST(Segment, SingleWordContainsAllInk) {
  const textgen::GlyphAtlas atlas;
  const GrayImage word = textgen::render_segment({"PRINT", -2, 4}, atlas);
  GrayImage sheet(400, 200);
  for (int r = 0; r < word.height(); ++r)
    for (int c = 0; c < word.width(); ++c) sheet.at(60 + r, 80 + c) = word.at(r, c);
  const auto boxes = segment_sheet(sheet);
  ASSERT_EQ(boxes.size(), 1u);
  const auto& b = boxes[0];
  EXPECT_EQ(sheet.crop(b.row0, b.col0, b.row1, b.col1).count_ink(), sheet.count_ink());
  EXPECT_EQ(b, (BoundingBox{60, 80, 60 + word.height(), 80 + word.width()}));
}

TEST(Segment, GridMatchesGroundTruth) {
  Rng rng(6, 1);
  const auto sheet = textgen::render_sheet(rng, 2, 3, textgen::GlyphAtlas());
  const auto boxes = segment_sheet(sheet.image);
  ASSERT_EQ(boxes.size(), 6u);
  for (std::size_t i = 0; i < boxes.size(); ++i) EXPECT_GE(iou(boxes[i], sheet.boxes[i]), 0.8);
}

TEST(Segment, BoxesDisjointAndCoverInk) {
  Rng rng(7, 1);
  const auto sheet = textgen::render_sheet(rng, 10, 8, textgen::GlyphAtlas());
  const auto boxes = segment_sheet(sheet.image);
  ASSERT_EQ(boxes.size(), 80u);
  GrayImage rest = sheet.image;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& a = boxes[i];
    EXPECT_GT(sheet.image.crop(a.row0, a.col0, a.row1, a.col1).count_ink(), 0u);
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const auto& b = boxes[j];
      EXPECT_FALSE(a.row0 < b.row1 && b.row0 < a.row1 && a.col0 < b.col1 && b.col0 < a.col1);
    }
    for (int r = a.row0; r < a.row1; ++r)
      for (int c = a.col0; c < a.col1; ++c) rest.at(r, c) = kBackground;
  }
  EXPECT_EQ(rest.count_ink(), 0u);
}

TEST(Segment, PaddingClippedAtSheetEdge) {
  GrayImage sheet(50, 30);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 5; ++c) sheet.at(r, c) = kInk;
  const auto boxes = segment_sheet(sheet);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0], (BoundingBox{0, 0, 14, 9}));
}
