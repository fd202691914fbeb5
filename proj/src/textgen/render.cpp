#include <algorithm>
#include <string>

#include "printguard/textgen/textgen.hpp"

namespace printguard::textgen {

std::string sample_word(Rng& rng, int len_lo, int len_hi) {
  if (len_lo < 1 || len_lo > len_hi) {
    throw InvalidArgument("sample_word: need 1 <= len_lo <= len_hi");
  }
  const auto span = static_cast<std::uint32_t>(len_hi - len_lo + 1);
  const int len = len_lo + static_cast<int>(rng.below(span));
  std::string word(static_cast<std::size_t>(len), 'A');
  for (auto& ch : word) ch = static_cast<char>('A' + rng.below(26));
  return word;
}

int segment_width(const SegmentSpec& spec, const GlyphAtlas& atlas) {
  const int n = static_cast<int>(spec.word.size());
  return 2 * spec.margin + n * atlas.glyph_cols() + (n - 1) * spec.kerning;
}

GrayImage render_segment(const SegmentSpec& spec, const GlyphAtlas& atlas) {
  if (spec.word.empty()) throw InvalidArgument("render_segment: empty word");
  if (spec.margin < 0) throw InvalidArgument("render_segment: negative margin");
  for (char c : spec.word) atlas.glyph(c);  // validate before allocating
  const int width = segment_width(spec, atlas);
  if (width <= 0 || spec.kerning <= -atlas.glyph_cols()) {
    throw InvalidArgument("render_segment: kerning collapses the word");
  }
  const int height = atlas.glyph_rows() + 2 * spec.margin;
  GrayImage out(width, height);
  int col = spec.margin;
  for (char c : spec.word) {
    const GrayImage& g = atlas.glyph(c);
    for (int r = 0; r < g.height(); ++r) {
      for (int k = 0; k < g.width(); ++k) {
        std::uint8_t& px = out.at(spec.margin + r, col + k);
        px = std::max(px, g.at(r, k));
      }
    }
    col += atlas.glyph_cols() + spec.kerning;
  }
  return out;
}

Sheet render_sheet(Rng& rng, int rows, int words_per_row, const GlyphAtlas& atlas, const SheetLayout& layout) {
  if (rows < 0 || words_per_row < 0) throw InvalidArgument("render_sheet: negative grid size");
  if (layout.row_gap < 30 || layout.word_gap < 20) {
    throw InvalidArgument("render_sheet: row gap must be >= 30 and word gap >= 20");
  }
  SegmentSpec widest{std::string(static_cast<std::size_t>(layout.word_len_max), 'W'), layout.kerning,
                     layout.margin};
  const int cell_w = segment_width(widest, atlas);
  const int cell_h = atlas.glyph_rows() + 2 * layout.margin;
  const long need_w = 2L * layout.page_margin + static_cast<long>(words_per_row) * cell_w +
                      static_cast<long>(std::max(words_per_row - 1, 0)) * layout.word_gap;
  const long need_h = 2L * layout.page_margin + static_cast<long>(rows) * cell_h +
                      static_cast<long>(std::max(rows - 1, 0)) * layout.row_gap;
  if (need_w > layout.width || need_h > layout.height) {
    throw InvalidArgument("render_sheet: layout of " + std::to_string(rows) + "x" + std::to_string(words_per_row) +
                          " words overflows the " + std::to_string(layout.width) + "x" +
                          std::to_string(layout.height) + " canvas");
  }

  Sheet sheet{GrayImage(layout.width, layout.height), {}};
  sheet.boxes.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(words_per_row));
  for (int r = 0; r < rows; ++r) {
    const int top = layout.page_margin + r * (cell_h + layout.row_gap);
    for (int w = 0; w < words_per_row; ++w) {
      const int left = layout.page_margin + w * (cell_w + layout.word_gap);
      const SegmentSpec spec{sample_word(rng, layout.word_len_min, layout.word_len_max), layout.kerning,
                             layout.margin};
      const GrayImage seg = render_segment(spec, atlas);
      for (int y = 0; y < seg.height(); ++y) {
        for (int x = 0; x < seg.width(); ++x) sheet.image.at(top + y, left + x) = seg.at(y, x);
      }
      sheet.boxes.push_back({top, left, top + seg.height(), left + seg.width()});
    }
  }
  return sheet;
}

}  // namespace printguard::textgen
