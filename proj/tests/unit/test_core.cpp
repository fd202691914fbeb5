#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "printguard/core/error.hpp"
#include "printguard/core/image.hpp"
#include "printguard/core/pgm.hpp"
#include "printguard/core/raster.hpp"
#include "printguard/core/rng.hpp"

using namespace printguard;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "printguard_core_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

// --- Rng ---------------------------------------------------------------------

TEST(Rng, ReferenceSequence) {
  // pcg32-demo output for pcg32_srandom_r(42, 54)
  Rng rng(42, 54);
  const std::uint32_t expected[] = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e};
  for (std::uint32_t e : expected) EXPECT_EQ(rng.next_u32(), e);
}

TEST(Rng, SplitMixKnownValues) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ULL);
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(7, 3), b(7, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
}

TEST(Rng, StreamsDiffer) {
  Rng a(7, 1), b(7, 3);
  bool differ = false;
  for (int i = 0; i < 16; ++i) differ |= a.next_u32() != b.next_u32();
  EXPECT_TRUE(differ);
}

TEST(Rng, IncrementIsOdd) {
  for (std::uint64_t s : {0ULL, 1ULL, 2ULL, 1ULL << 63}) EXPECT_EQ(Rng(1, s).increment() & 1u, 1u);
}

TEST(Rng, ChildStreams) {
  EXPECT_EQ(Rng::sample_seed(5, 3), splitmix64(5 ^ 3));
  EXPECT_EQ(Rng::sample_stream(3), 7u);
  EXPECT_EQ(Rng::for_sample(5, 3), Rng(splitmix64(5 ^ 3), 7));
}

TEST(Rng, UniformRangeAndMean) {
  Rng rng(1, 1);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(2.0, 5.0);
    ASSERT_GE(u, 2.0);
    ASSERT_LT(u, 5.0);
    sum += u;
  }
  // mean 3.5, std of the mean = 3/sqrt(12 n)
  EXPECT_NEAR(sum / n, 3.5, 5 * 3.0 / std::sqrt(12.0 * n));
}

TEST(Rng, UniformDegenerateAndInvalid) {
  Rng rng(1, 1);
  EXPECT_EQ(rng.uniform(4.0, 4.0), 4.0);
  EXPECT_THROW(rng.uniform(5.0, 4.0), InvalidArgument);
}

TEST(Rng, NormalMoments) {
  Rng rng(3, 1);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(1.0, 2.0);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 1.0, 5 * 2.0 / std::sqrt(n));
  EXPECT_NEAR(var, 4.0, 0.1);
}

TEST(Rng, NormalConsumesTwoDraws) {
  Rng a(9, 1), b(9, 1);
  a.normal(0, 1);
  b.next_u32();
  b.next_u32();
  EXPECT_EQ(a, b);
}

TEST(Rng, NormalBoxMullerFormula) {
  Rng a(11, 5), b(11, 5);
  const double u1 = 1.0 - b.next_u32() / 4294967296.0;
  const double u2 = b.next_u32() / 4294967296.0;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  EXPECT_DOUBLE_EQ(a.normal(0.5, 3.0), 0.5 + 3.0 * z);
}

TEST(Rng, NormalZeroStdAndNegative) {
  Rng rng(1, 1);
  EXPECT_EQ(rng.normal(2.5, 0.0), 2.5);
  EXPECT_THROW(rng.normal(0.0, -1.0), InvalidArgument);
}

TEST(Rng, BelowIsInRangeAndCoversValues) {
  Rng rng(2, 2);
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_THROW(rng.below(0), InvalidArgument);
}

// --- GrayImage ----------------------------------------------------------------

TEST(GrayImage, ConstructionAndAccess) {
  GrayImage img(4, 3);
  EXPECT_EQ(img.width(), 4);
  EXPECT_EQ(img.height(), 3);
  EXPECT_EQ(img.count_ink(), 0u);
  img.at(2, 3) = kInk;
  EXPECT_EQ(img.data()[2 * 4 + 3], kInk);
  EXPECT_TRUE(img.is_binary());
  img.at(0, 0) = 7;
  EXPECT_FALSE(img.is_binary());
}

TEST(GrayImage, RejectsBadDimensions) {
  EXPECT_THROW(GrayImage(0, 3), InvalidArgument);
  EXPECT_THROW(GrayImage(3, -1), InvalidArgument);
  EXPECT_THROW(GrayImage(2, 2, std::vector<std::uint8_t>(3)), ShapeError);
}

TEST(GrayImage, CropCopiesRectangle) {
  GrayImage img(5, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) img.at(r, c) = static_cast<std::uint8_t>(10 * r + c);
  const GrayImage sub = img.crop(1, 2, 3, 5);
  ASSERT_EQ(sub.width(), 3);
  ASSERT_EQ(sub.height(), 2);
  EXPECT_EQ(sub.at(0, 0), 12);
  EXPECT_EQ(sub.at(1, 2), 24);
  EXPECT_THROW(img.crop(0, 0, 5, 5), OutOfBounds);
}

TEST(GrayImage, CountDifferences) {
  GrayImage a(3, 3), b(3, 3);
  b.at(1, 1) = kInk;
  b.at(2, 0) = kInk;
  EXPECT_EQ(count_differences(a, b), 2u);
  EXPECT_THROW(count_differences(a, GrayImage(2, 3)), ShapeError);
}

// --- draw_line ----------------------------------------------------------------

TEST(DrawLine, HorizontalRun) {
  GrayImage img(20, 20);
  draw_line(img, {10, 5}, 0.0, 7, kInk);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) EXPECT_EQ(img.at(r, c), (r == 10 && c >= 5 && c <= 12) ? kInk : 0) << r << "," << c;
}

TEST(DrawLine, UpwardVertical) {
  GrayImage img(10, 10);
  draw_line(img, {8, 4}, M_PI / 2, 5, kInk);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) EXPECT_EQ(img.at(r, c), (c == 4 && r >= 3 && r <= 8) ? kInk : 0);
}

TEST(DrawLine, DiagonalAndClipping) {
  GrayImage img(5, 5);
  // endpoint (0 - round(20 sin 45), 0 + round(20 cos 45)) leaves the image
  draw_line(img, {4, 0}, M_PI / 4, 20 * std::sqrt(2.0), kInk);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) EXPECT_EQ(img.at(r, c), r + c == 4 ? kInk : 0);
}

TEST(DrawLine, ZeroLengthPaintsOrigin) {
  GrayImage img(5, 5);
  draw_line(img, {2, 3}, 1.234, 0.0, kInk);
  EXPECT_EQ(img.count_ink(), 1u);
  EXPECT_EQ(img.at(2, 3), kInk);
}

TEST(DrawLine, SaturatedCanvasUnchanged) {
  GrayImage img(12, 12, kInk);
  const GrayImage before = img;
  draw_line(img, {6, 6}, 0.7, 9, kInk);
  EXPECT_EQ(img, before);
}

TEST(DrawLine, Errors) {
  GrayImage img(5, 5);
  EXPECT_THROW(draw_line(img, {5, 0}, 0, 2, kInk), OutOfBounds);
  EXPECT_THROW(draw_line(img, {0, 0}, 0, -1, kInk), InvalidArgument);
  EXPECT_THROW(draw_line(img, {0, 0}, 0, 1, 7), InvalidArgument);
}

TEST(DrawLine, MonotoneProperty) {
  Rng rng(5, 1);
  for (int t = 0; t < 500; ++t) {
    GrayImage img(30, 20);
    for (auto& v : img.pixels()) v = rng.below(2) ? kInk : kBackground;
    const GrayImage before = img;
    const std::uint8_t ink = rng.below(2) ? kInk : kBackground;
    const Point origin{static_cast<int>(rng.below(20)), static_cast<int>(rng.below(30))};
    draw_line(img, origin, rng.uniform(0, 2 * M_PI), rng.uniform(0, 40), ink);
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (ink == kInk) {
        ASSERT_GE(img.data()[i], before.data()[i]);
      } else {
        ASSERT_LE(img.data()[i], before.data()[i]);
      }
    }
  }
}

TEST(DrawLine, EndpointsAreConnected) {
  // every Bresenham step moves by at most one pixel in each axis
  Rng rng(6, 1);
  for (int t = 0; t < 200; ++t) {
    const Point a{static_cast<int>(rng.below(40)) - 20, static_cast<int>(rng.below(40)) - 20};
    const Point b{static_cast<int>(rng.below(40)) - 20, static_cast<int>(rng.below(40)) - 20};
    std::vector<Point> pts;
    for_each_line_pixel(a, b, [&](int r, int c) { pts.push_back({r, c}); });
    ASSERT_EQ(pts.front(), a);
    ASSERT_EQ(pts.back(), b);
    ASSERT_EQ(pts.size(), static_cast<std::size_t>(std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)) + 1));
    for (std::size_t i = 1; i < pts.size(); ++i) {
      ASSERT_LE(std::abs(pts[i].row - pts[i - 1].row), 1);
      ASSERT_LE(std::abs(pts[i].col - pts[i - 1].col), 1);
    }
  }
}

// --- PGM / PPM ----------------------------------------------------------------

TEST(Pgm, ExactHeaderAndRoundTrip) {
  GrayImage img(3, 2, std::vector<std::uint8_t>{0, 255, 7, 1, 2, 3});
  const std::string bytes = encode_pgm(img);
  EXPECT_EQ(bytes.substr(0, 11), "P5\n3 2\n255\n");
  EXPECT_EQ(bytes.size(), 11u + 6u);
  EXPECT_EQ(decode_pgm(bytes), img);
  const auto path = temp_path("rt.pgm");
  write_pgm(path, img);
  EXPECT_EQ(read_pgm(path), img);
  EXPECT_EQ(read_file(path), bytes);
}

TEST(Pgm, AcceptsCommentsAndWhitespace) {
  const std::string bytes = std::string("P5 # comment\n2\t1\n# another\n255\n") + '\x01' + '\x02';
  const GrayImage img = decode_pgm(bytes);
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img.at(0, 1), 2);
}

TEST(Pgm, RejectsMalformed) {
  EXPECT_THROW(decode_pgm("P2\n1 1\n255\n0"), IoError);
  EXPECT_THROW(decode_pgm("P5\n2 2\n255\nabc"), IoError);
  EXPECT_THROW(decode_pgm("P5\n1 1\n65535\n\x01\x02"), IoError);
  EXPECT_THROW(read_pgm(temp_path("does_not_exist.pgm")), IoError);
}

TEST(Ppm, RoundTrip) {
  RgbImage rgb{2, 1, {255, 0, 0, 1, 2, 3}};
  const auto path = temp_path("rt.ppm");
  write_ppm(path, rgb);
  const RgbImage back = read_ppm(path);
  EXPECT_EQ(back.width, 2);
  EXPECT_EQ(back.height, 1);
  EXPECT_EQ(back.data, rgb.data);
}
