#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "printguard/core/error.hpp"
#include "printguard/core/image.hpp"
#include "printguard/core/rng.hpp"

namespace printguard::textgen {

class UnsupportedGlyph : public Error {
 public:
  using Error::Error;
};

inline constexpr int kBaseGlyphRows = 7;
inline constexpr int kBaseGlyphCols = 5;

/// 26 uppercase glyphs (A-Z) from an embedded 7x5 bitmap font, each scaled by
/// an integer factor. Cells are binary {0,255}.
class GlyphAtlas {
 public:
  explicit GlyphAtlas(int scale = 6);

  /// Atlas whose cells are all background; rendering with it yields blank images.
  static GlyphAtlas blank(int scale = 6);

  int scale() const { return scale_; }
  int glyph_rows() const { return kBaseGlyphRows * scale_; }
  int glyph_cols() const { return kBaseGlyphCols * scale_; }

  /// Scaled cell for an uppercase letter.
  const GrayImage& glyph(char c) const;

 private:
  int scale_;
  std::array<GrayImage, 26> glyphs_;
};

struct SegmentSpec {
  std::string word;
  int kerning = -2;
  int margin = 4;
};

/// Inclusive-exclusive rectangle on a raster.
struct Box {
  int row0 = 0;
  int col0 = 0;
  int row1 = 0;
  int col1 = 0;

  int height() const { return row1 - row0; }
  int width() const { return col1 - col0; }
  long area() const { return static_cast<long>(height()) * width(); }
  friend bool operator==(const Box&, const Box&) = default;
};

struct SheetLayout {
  int width = 3500;
  int height = 4200;
  int page_margin = 100;
  int row_gap = 30;
  int word_gap = 20;
  int word_len_min = 2;
  int word_len_max = 8;
  int kerning = -2;
  int margin = 4;
};

struct Sheet {
  GrayImage image;
  std::vector<Box> boxes;  // reading order
};

/// Word of uniform length in [len_lo, len_hi] over A-Z.
std::string sample_word(Rng& rng, int len_lo, int len_hi);

/// Natural width of a rendered segment for the given word length.
int segment_width(const SegmentSpec& spec, const GlyphAtlas& atlas);

/// Glyphs blitted left to right with kerning; overlapping pixels keep the
/// maximum so ink always wins.
GrayImage render_segment(const SegmentSpec& spec, const GlyphAtlas& atlas);

/// Words on a regular grid. Each returned box is the full rendered segment
/// rectangle (including its margin), usable as a segmentation oracle.
Sheet render_sheet(Rng& rng, int rows, int words_per_row, const GlyphAtlas& atlas,
                   const SheetLayout& layout = {});

}  // namespace printguard::textgen
