#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "printguard/core/image.hpp"
#include "printguard/errorsim/errorsim.hpp"
#include "printguard/nn/train.hpp"

namespace printguard::dataset {

/// Missing files, wrong dimensions or non-binary pixels in a corpus.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class BuildFailed : public Error {
 public:
  using Error::Error;
};

using errorsim::ErrorKind;

enum class Split { Train, Test, Validation };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::int64_t id = 0;
  std::string path;  // relative to the dataset root
  int label = nn::kGood;
  std::optional<ErrorKind> error_kind;
  std::uint64_t seed = 0;    // child PRNG seed
  std::uint64_t stream = 0;  // child PRNG stream
  std::optional<Split> split;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

using Manifest = std::vector<ManifestEntry>;

/// Class composition and rendering settings of a generated corpus.
struct DatasetConfig {
  int count = 20000;
  double good_fraction = 0.5;
  // shares of the bad budget; the vertical-solid LSE share takes the remainder
  double blot_share = 0.5;
  double lpe_share = 0.2;
  double lse_share = 0.2;
  int word_len_min = 2;
  int word_len_max = 8;
  int kerning = -2;
  int margin = 4;
  int glyph_scale = 6;
  double max_unviable_fraction = 0.001;
  errorsim::SimConfig sim;

  void validate() const;
};

/// Planned number of samples per class: good, BLOT, LPE, LSE, LSE_VERTICAL_SOLID.
struct Composition {
  int good = 0;
  int blot = 0;
  int lpe = 0;
  int lse = 0;
  int lse_vertical = 0;
};
Composition plan_composition(const DatasetConfig& cfg);

struct BuildResult {
  Manifest manifest;
  std::size_t unviable = 0;
  std::vector<std::string> log;
};

/// Renders every sample from its derived child stream, writes images/<id>.pgm,
/// params.jsonl and an unsplit manifest.jsonl under `out_dir`.
BuildResult build_dataset(const DatasetConfig& cfg, std::uint64_t master_seed, const std::filesystem::path& out_dir);

/// Re-creates one sample from its manifest entry, byte-identical to the build.
GrayImage regenerate_sample(const ManifestEntry& entry, const DatasetConfig& cfg);

/// Stratified 60/30/10 train/test/validation assignment per (label, kind)
/// group; test and validation get the rounded shares, train the remainder.
Manifest split_dataset(Manifest manifest, std::uint64_t seed);

std::string manifest_line(const ManifestEntry& e);
ManifestEntry parse_manifest_line(const std::string& line);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Images (count x 45 x 132) and labels loaded for one split.
struct PackedDataset {
  std::size_t count = 0;
  std::vector<std::uint8_t> images;
  std::vector<std::uint8_t> labels;
  std::vector<std::int64_t> ids;  // manifest ids; not stored in packed files

  nn::LabeledImages view() const;
  GrayImage image(std::size_t i) const;
};

/// Loads and validates every image of `split` in manifest order. Paths are
/// resolved against `root`.
PackedDataset pack(const Manifest& manifest, Split split, const std::filesystem::path& root);

/// PGDS file: magic, u32 version, u32 count, labels, images; little-endian.
void save_packed(const PackedDataset& data, const std::filesystem::path& path);
PackedDataset load_packed(const std::filesystem::path& path);

}  // namespace printguard::dataset
