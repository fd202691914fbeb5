#include "printguard/errorsim/errorsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "printguard/core/raster.hpp"

namespace printguard::errorsim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::LPE:
      return "LPE";
    case ErrorKind::LSE:
      return "LSE";
    case ErrorKind::LSE_VERTICAL_SOLID:
      return "LSE_VERTICAL_SOLID";
    case ErrorKind::BLOT:
      return "BLOT";
  }
  return "?";
}

ErrorKind parse_error_kind(std::string_view name) {
  for (ErrorKind k : {ErrorKind::LPE, ErrorKind::LSE, ErrorKind::LSE_VERTICAL_SOLID, ErrorKind::BLOT}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown error kind '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("invalid simulator config: ") + what);
  };
  require(girth_min > 0 && girth_min <= girth_max, "need 0 < girth_min <= girth_max");
  require(lines_per_girth > 0, "lines_per_girth must be positive");
  require(seed_spread >= 0, "seed_spread must be non-negative");
  require(seed_region > 0 && seed_region <= 1, "seed_region must be in (0, 1]");
  require(angle_std >= 0 && vertical_angle_std >= 0, "angle std must be non-negative");
  require(length_mean_frac >= 0 && length_std_frac >= 0, "length fractions must be non-negative");
  require(blot_radius_min > 0 && blot_radius_min <= blot_radius_max, "need 0 < blot_radius_min <= max");
  require(blot_splash_min >= 0 && blot_splash_min <= blot_splash_max, "need 0 <= blot_splash_min <= max");
  require(blot_rays >= 16, "blot_rays must be >= 16 (angle step <= pi/8)");
  require(visibility_threshold >= 1, "visibility_threshold must be >= 1");
  require(max_attempts >= 1, "max_attempts must be >= 1");
}

namespace {

int floor_to_int(double v) { return static_cast<int>(std::floor(v)); }

// Uniform integer coordinate from the centred `fraction` of [0, extent).
int sample_inner(Rng& rng, int extent, double fraction) {
  const double margin = 0.5 * (1.0 - fraction) * extent;
  const int v = floor_to_int(rng.uniform(margin, extent - margin));
  return std::clamp(v, 0, extent - 1);
}

}  // namespace

WedgeParams sample_wedge_params(Rng& rng, ErrorKind kind, ImageDims dims, const SimConfig& cfg) {
  if (kind == ErrorKind::BLOT) throw WrongSampler("sample_wedge_params called for BLOT");
  if (dims.width <= 0 || dims.height <= 0) throw InvalidArgument("sample_wedge_params: empty image");
  WedgeParams p;
  p.ink = kind == ErrorKind::LPE ? kInk : kBackground;
  p.primary_seed.row = sample_inner(rng, dims.height, cfg.seed_region);
  p.primary_seed.col = sample_inner(rng, dims.width, cfg.seed_region);
  p.girth = rng.uniform(cfg.girth_min, cfg.girth_max);
  p.n_lines = std::max(1, static_cast<int>(std::lround(cfg.lines_per_girth * p.girth)));
  if (kind == ErrorKind::LSE_VERTICAL_SOLID) {
    p.angle_mean = std::numbers::pi / 2;
    p.angle_std = cfg.vertical_angle_std;
  } else {
    p.angle_mean = rng.uniform(0.0, std::numbers::pi);
    p.angle_std = cfg.angle_std;
  }
  const double diag = std::hypot(static_cast<double>(dims.width), static_cast<double>(dims.height));
  p.len_mean = cfg.length_mean_frac * diag;
  p.len_std = cfg.length_std_frac * diag;
  p.seed_spread = cfg.seed_spread;
  return p;
}

void apply_wedge(GrayImage& img, const WedgeParams& p, Rng& rng) {
  if (p.n_lines < 1) throw InvalidArgument("apply_wedge: n_lines must be >= 1");
  if (!img.contains(p.primary_seed)) throw OutOfBounds("apply_wedge: primary seed outside image");
  const double spread = p.seed_spread * p.girth;
  for (int i = 0; i < p.n_lines; ++i) {
    const double dr = rng.normal(0.0, spread);
    const double dc = rng.normal(0.0, spread);
    const double angle = rng.normal(p.angle_mean, p.angle_std);
    const double length = std::abs(rng.normal(p.len_mean, p.len_std));
    const Point origin{std::clamp(static_cast<int>(std::lround(p.primary_seed.row + dr)), 0, img.height() - 1),
                       std::clamp(static_cast<int>(std::lround(p.primary_seed.col + dc)), 0, img.width() - 1)};
    draw_line(img, origin, angle, length, p.ink);
  }
}

BlotParams sample_blot_params(Rng& rng, ImageDims dims, const SimConfig& cfg) {
  if (dims.width <= 0 || dims.height <= 0) throw InvalidArgument("sample_blot_params: empty image");
  BlotParams p;
  p.center.row = std::min(floor_to_int(rng.uniform(0.0, dims.height)), dims.height - 1);
  p.center.col = std::min(floor_to_int(rng.uniform(0.0, dims.width)), dims.width - 1);
  p.radius_mean = rng.uniform(cfg.blot_radius_min, cfg.blot_radius_max);
  p.splash_std = rng.uniform(cfg.blot_splash_min, cfg.blot_splash_max);
  p.d_theta = 2.0 * std::numbers::pi / cfg.blot_rays;
  return p;
}

void apply_blot(GrayImage& img, const BlotParams& p, Rng& rng) {
  if (!(p.d_theta > 0.0) || p.d_theta > std::numbers::pi / 8 + 1e-12) {
    throw InvalidArgument("apply_blot: d_theta must be in (0, pi/8]");
  }
  if (!img.contains(p.center)) throw OutOfBounds("apply_blot: center outside image");
  for (long k = 0;; ++k) {
    const double theta = static_cast<double>(k) * p.d_theta;
    if (theta >= 2.0 * std::numbers::pi) break;
    const double length = std::abs(rng.normal(p.radius_mean, p.splash_std));
    draw_line(img, p.center, theta, length, kInk);
  }
}

Corruption corrupt(const GrayImage& img, ErrorKind kind, Rng& rng, const SimConfig& cfg) {
  const ImageDims dims{img.width(), img.height()};
  const auto threshold = static_cast<std::size_t>(cfg.visibility_threshold);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    GrayImage out = img;
    AppliedParams applied{kind, attempt, {}};
    if (kind == ErrorKind::BLOT) {
      const BlotParams p = sample_blot_params(rng, dims, cfg);
      apply_blot(out, p, rng);
      applied.params = p;
    } else {
      const WedgeParams p = sample_wedge_params(rng, kind, dims, cfg);
      apply_wedge(out, p, rng);
      applied.params = p;
    }
    if (count_differences(img, out) >= threshold) return {std::move(out), applied};
  }
  throw UnviableSample(std::string("no visible ") + std::string(to_string(kind)) + " after " +
                       std::to_string(cfg.max_attempts) + " attempts");
}

}  // namespace printguard::errorsim
