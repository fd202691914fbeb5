#include "printguard/core/pgm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace printguard {

namespace {

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

// Parses "<magic> <w> <h> <maxval>" with optional '#' comments, then a single
// whitespace byte before the raster.
NetpbmHeader parse_header(const std::string& bytes) {
  NetpbmHeader h;
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw IoError("malformed netpbm header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw IoError("netpbm dimension too large");
      ++pos;
    }
    return static_cast<int>(v);
  };
  if (bytes.size() < 2) throw IoError("file too short for a netpbm header");
  h.magic = bytes.substr(0, 2);
  pos = 2;
  h.width = read_int();
  h.height = read_int();
  h.maxval = read_int();
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError("malformed netpbm header terminator");
  }
  h.data_offset = pos + 1;
  if (h.width <= 0 || h.height <= 0) throw IoError("netpbm dimensions must be positive");
  if (h.maxval != 255) throw IoError("only maxval 255 is supported");
  return h;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data().data()), img.size());
  return out;
}

GrayImage decode_pgm(const std::string& bytes) {
  const NetpbmHeader h = parse_header(bytes);
  if (h.magic != "P5") throw IoError("not a binary PGM (P5) file");
  const std::size_t n = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() < h.data_offset + n) throw IoError("truncated PGM raster");
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
  return GrayImage(h.width, h.height, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) { write_file(path, encode_pgm(img)); }

GrayImage read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const NetpbmHeader h = parse_header(bytes);
  if (h.magic != "P6") throw IoError(path.string() + ": not a binary PPM (P6) file");
  const std::size_t n = 3 * static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() < h.data_offset + n) throw IoError(path.string() + ": truncated PPM raster");
  RgbImage img;
  img.width = h.width;
  img.height = h.height;
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                  bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
  return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  write_file(path, out);
}

}  // namespace printguard
