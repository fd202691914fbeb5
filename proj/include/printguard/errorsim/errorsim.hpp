#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "printguard/core/error.hpp"
#include "printguard/core/image.hpp"
#include "printguard/core/rng.hpp"

namespace printguard::errorsim {

enum class ErrorKind { LPE, LSE, LSE_VERTICAL_SOLID, BLOT };

std::string_view to_string(ErrorKind kind);
ErrorKind parse_error_kind(std::string_view name);

/// LSE variants erase ink; LPE and BLOT add it.
constexpr bool erases_ink(ErrorKind kind) {
  return kind == ErrorKind::LSE || kind == ErrorKind::LSE_VERTICAL_SOLID;
}

class WrongSampler : public Error {
 public:
  using Error::Error;
};

/// Raised when no parameter draw produces a visible defect.
class UnviableSample : public Error {
 public:
  using Error::Error;
};

struct ImageDims {
  int width = 0;
  int height = 0;
};

/// Tunable constants of the simulators. Defaults are the shipped corpus settings.
struct SimConfig {
  double girth_min = 2.0;
  double girth_max = 8.0;
  double lines_per_girth = 1.5;
  double seed_spread = 0.5;        // secondary-seed std as a fraction of girth
  double seed_region = 0.8;        // primary seeds come from this centred fraction
  double angle_std = 0.05;
  double vertical_angle_std = 0.01;
  double length_mean_frac = 0.35;  // of the image diagonal
  double length_std_frac = 0.1;
  double blot_radius_min = 3.0;
  double blot_radius_max = 7.0;
  double blot_splash_min = 0.5;
  double blot_splash_max = 2.5;
  int blot_rays = 720;
  int visibility_threshold = 25;
  int max_attempts = 50;

  void validate() const;
};

struct WedgeParams {
  std::uint8_t ink = kInk;
  Point primary_seed;
  double girth = 0.0;
  int n_lines = 1;
  double angle_mean = 0.0;
  double angle_std = 0.0;
  double len_mean = 0.0;
  double len_std = 0.0;
  double seed_spread = 0.5;
};

struct BlotParams {
  Point center;
  double radius_mean = 0.0;
  double splash_std = 0.0;
  double d_theta = 0.0;
};

/// Exactly what corrupt() applied, sufficient to regenerate the sample.
struct AppliedParams {
  ErrorKind kind = ErrorKind::LPE;
  int attempt = 0;
  std::variant<WedgeParams, BlotParams> params;
};

WedgeParams sample_wedge_params(Rng& rng, ErrorKind kind, ImageDims dims, const SimConfig& cfg = {});

/// Draws the bundle of n_lines lines. Per line the draw order is fixed:
/// row offset, column offset, angle, length.
void apply_wedge(GrayImage& img, const WedgeParams& p, Rng& rng);

BlotParams sample_blot_params(Rng& rng, ImageDims dims, const SimConfig& cfg = {});

/// One ray per angle step in [0, 2pi), each |Normal(radius_mean, splash_std)| long.
void apply_blot(GrayImage& img, const BlotParams& p, Rng& rng);

struct Corruption {
  GrayImage image;
  AppliedParams applied;
};

/// Samples parameters and applies the matching simulator until the result
/// differs from the input in at least cfg.visibility_threshold pixels, with
/// up to cfg.max_attempts fresh draws. Throws UnviableSample otherwise.
Corruption corrupt(const GrayImage& img, ErrorKind kind, Rng& rng, const SimConfig& cfg = {});

}  // namespace printguard::errorsim
