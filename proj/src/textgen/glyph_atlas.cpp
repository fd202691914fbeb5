#include <string>

#include "printguard/textgen/textgen.hpp"

namespace printguard::textgen {

namespace {

// Every glyph has ink in its top and bottom rows and leaves at most one blank
// column on each side, so neighbouring glyphs never open a word-sized gap.
constexpr std::array<std::array<const char*, kBaseGlyphRows>, 26> kFont = {{
    {".###.", "#...#", "#...#", "#...#", "#####", "#...#", "#...#"},  // A
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // B
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // C
    {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."},  // D
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // E
    {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // F
    {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"},  // G
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // H
    {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."},  // I
    {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},  // J
    {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // K
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // L
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // M
    {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // N
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // O
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // P
    {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"},  // Q
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // R
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // S
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // T
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // U
    {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // V
    {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."},  // W
    {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // X
    {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."},  // Y
    {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"},  // Z
}};

GrayImage scaled_glyph(const std::array<const char*, kBaseGlyphRows>& rows, int scale, bool blank) {
  GrayImage g(kBaseGlyphCols * scale, kBaseGlyphRows * scale);
  if (blank) return g;
  for (int r = 0; r < kBaseGlyphRows; ++r) {
    for (int c = 0; c < kBaseGlyphCols; ++c) {
      if (rows[r][c] != '#') continue;
      for (int dr = 0; dr < scale; ++dr) {
        for (int dc = 0; dc < scale; ++dc) g.at(r * scale + dr, c * scale + dc) = kInk;
      }
    }
  }
  return g;
}

}  // namespace

GlyphAtlas::GlyphAtlas(int scale) : scale_(scale) {
  if (scale <= 0) throw InvalidArgument("glyph scale must be positive");
  for (std::size_t i = 0; i < kFont.size(); ++i) glyphs_[i] = scaled_glyph(kFont[i], scale, false);
}

GlyphAtlas GlyphAtlas::blank(int scale) {
  GlyphAtlas atlas(scale);
  for (std::size_t i = 0; i < kFont.size(); ++i) atlas.glyphs_[i] = scaled_glyph(kFont[i], scale, true);
  return atlas;
}

const GrayImage& GlyphAtlas::glyph(char c) const {
  if (c < 'A' || c > 'Z') {
    throw UnsupportedGlyph(std::string("no glyph for character '") + c + "'");
  }
  return glyphs_[static_cast<std::size_t>(c - 'A')];
}

}  // namespace printguard::textgen
