#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "printguard/core/image.hpp"

namespace printguard {

/// Interleaved 8-bit RGB raster as read from a P6 file.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
};

/// Binary PGM (P5, maxval 255). Header is exactly "P5\n<w> <h>\n255\n".
std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::string& bytes);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace printguard
