#include "printguard/dataset/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"

#include "printguard/core/pgm.hpp"
#include "printguard/preprocess/preprocess.hpp"
#include "printguard/textgen/textgen.hpp"

namespace printguard::dataset {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint32_t kPackedVersion = 1;
constexpr int kRows = preprocess::kStandardRows;
constexpr int kCols = preprocess::kStandardCols;

std::string image_path(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%06lld.pgm", static_cast<long long>(id));
  return buf;
}

json params_json(std::int64_t id, const errorsim::AppliedParams& a) {
  json j;
  j["id"] = id;
  j["kind"] = std::string(errorsim::to_string(a.kind));
  j["attempt"] = a.attempt;
  if (const auto* w = std::get_if<errorsim::WedgeParams>(&a.params)) {
    j["ink"] = w->ink;
    j["primary_seed"] = {w->primary_seed.row, w->primary_seed.col};
    j["girth"] = w->girth;
    j["n_lines"] = w->n_lines;
    j["angle_mean"] = w->angle_mean;
    j["angle_std"] = w->angle_std;
    j["len_mean"] = w->len_mean;
    j["len_std"] = w->len_std;
    j["seed_spread"] = w->seed_spread;
  } else {
    const auto& b = std::get<errorsim::BlotParams>(a.params);
    j["center"] = {b.center.row, b.center.col};
    j["radius_mean"] = b.radius_mean;
    j["splash_std"] = b.splash_std;
    j["d_theta"] = b.d_theta;
  }
  return j;
}

struct Rendered {
  GrayImage image;
  std::optional<errorsim::AppliedParams> applied;
};

Rendered render_sample(Rng& rng, std::optional<ErrorKind> kind, const DatasetConfig& cfg,
                       const textgen::GlyphAtlas& atlas) {
  const textgen::SegmentSpec spec{textgen::sample_word(rng, cfg.word_len_min, cfg.word_len_max), cfg.kerning,
                                  cfg.margin};
  GrayImage seg = preprocess::resize_to_standard(textgen::render_segment(spec, atlas));
  if (!kind) return {std::move(seg), std::nullopt};
  auto c = errorsim::corrupt(seg, *kind, rng, cfg.sim);
  return {std::move(c.image), c.applied};
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Test:
      return "test";
    case Split::Validation:
      return "validation";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  for (Split s : {Split::Train, Split::Test, Split::Validation}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

void DatasetConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("invalid dataset config: ") + what);
  };
  require(count >= 2, "count must be at least 2");
  require(good_fraction > 0 && good_fraction < 1, "good_fraction must be in (0, 1)");
  require(blot_share >= 0 && lpe_share >= 0 && lse_share >= 0 && blot_share + lpe_share + lse_share <= 1.0 + 1e-12,
          "bad shares must be non-negative and sum to at most 1");
  require(word_len_min >= 1 && word_len_min <= word_len_max, "need 1 <= word_len_min <= word_len_max");
  require(glyph_scale >= 1, "glyph_scale must be positive");
  require(margin >= 0, "margin must be non-negative");
  require(kerning > -textgen::kBaseGlyphCols * glyph_scale, "kerning collapses glyphs");
  require(max_unviable_fraction >= 0, "max_unviable_fraction must be non-negative");
  sim.validate();
}

Composition plan_composition(const DatasetConfig& cfg) {
  Composition c;
  c.good = static_cast<int>(std::lround(cfg.count * cfg.good_fraction));
  const int bad = cfg.count - c.good;
  // Cumulative rounding keeps every class non-negative and the total exact.
  auto upto = [&](double share) { return static_cast<int>(std::lround(bad * share)); };
  const double s1 = cfg.blot_share, s2 = s1 + cfg.lpe_share, s3 = s2 + cfg.lse_share;
  c.blot = upto(s1);
  c.lpe = upto(s2) - upto(s1);
  c.lse = upto(s3) - upto(s2);
  c.lse_vertical = bad - upto(s3);
  if (c.lse_vertical < 0) throw InvalidArgument("bad-class shares exceed the bad budget");
  return c;
}

BuildResult build_dataset(const DatasetConfig& cfg, std::uint64_t master_seed, const fs::path& out_dir) {
  cfg.validate();
  const Composition comp = plan_composition(cfg);
  std::vector<std::optional<ErrorKind>> slots;
  slots.reserve(static_cast<std::size_t>(cfg.count));
  slots.insert(slots.end(), static_cast<std::size_t>(comp.good), std::nullopt);
  slots.insert(slots.end(), static_cast<std::size_t>(comp.blot), ErrorKind::BLOT);
  slots.insert(slots.end(), static_cast<std::size_t>(comp.lpe), ErrorKind::LPE);
  slots.insert(slots.end(), static_cast<std::size_t>(comp.lse), ErrorKind::LSE);
  slots.insert(slots.end(), static_cast<std::size_t>(comp.lse_vertical), ErrorKind::LSE_VERTICAL_SOLID);

  fs::create_directories(out_dir / "images");
  std::ofstream params(out_dir / "params.jsonl", std::ios::binary | std::ios::trunc);
  if (!params) throw IoError("cannot write " + (out_dir / "params.jsonl").string());

  const textgen::GlyphAtlas atlas(cfg.glyph_scale);
  BuildResult result;
  for (std::size_t slot = 0; slot < slots.size(); ++slot) {
    ManifestEntry e;
    e.seed = Rng::sample_seed(master_seed, slot);
    e.stream = Rng::sample_stream(slot);
    e.error_kind = slots[slot];
    e.label = e.error_kind ? nn::kBad : nn::kGood;
    Rng rng(e.seed, e.stream);
    try {
      Rendered r = render_sample(rng, e.error_kind, cfg, atlas);
      e.id = static_cast<std::int64_t>(result.manifest.size());
      e.path = image_path(e.id);
      write_pgm(out_dir / e.path, r.image);
      if (r.applied) params << params_json(e.id, *r.applied).dump() << '\n';
      result.manifest.push_back(std::move(e));
    } catch (const errorsim::UnviableSample& ex) {
      ++result.unviable;
      result.log.push_back("slot " + std::to_string(slot) + " skipped: " + ex.what());
    }
  }
  const double limit = cfg.max_unviable_fraction * static_cast<double>(slots.size());
  if (static_cast<double>(result.unviable) > limit) {
    throw BuildFailed(std::to_string(result.unviable) + " of " + std::to_string(slots.size()) +
                      " samples were unviable, above the allowed fraction");
  }
  write_manifest(out_dir / "manifest.jsonl", result.manifest);
  return result;
}

GrayImage regenerate_sample(const ManifestEntry& entry, const DatasetConfig& cfg) {
  Rng rng(entry.seed, entry.stream);
  const textgen::GlyphAtlas atlas(cfg.glyph_scale);
  return render_sample(rng, entry.error_kind, cfg, atlas).image;
}

Manifest split_dataset(Manifest manifest, std::uint64_t seed) {
  // Groups in a fixed order: good first, then each error kind.
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const int key = manifest[i].error_kind ? 1 + static_cast<int>(*manifest[i].error_kind) : 0;
    groups[key].push_back(i);
  }
  Rng rng(seed, kSplitStream);
  for (auto& [key, members] : groups) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(static_cast<std::uint32_t>(i))]);
    }
    const double n = static_cast<double>(members.size());
    const auto n_test = static_cast<std::size_t>(std::lround(0.3 * n));
    const auto n_val = static_cast<std::size_t>(std::lround(0.1 * n));
    for (std::size_t k = 0; k < members.size(); ++k) {
      Split s = Split::Train;
      if (k < n_test) {
        s = Split::Test;
      } else if (k < n_test + n_val) {
        s = Split::Validation;
      }
      manifest[members[k]].split = s;
    }
  }
  return manifest;
}

std::string manifest_line(const ManifestEntry& e) {
  json j;
  j["id"] = e.id;
  j["path"] = e.path;
  j["label"] = e.label;
  j["error_kind"] = e.error_kind ? json(std::string(errorsim::to_string(*e.error_kind))) : json(nullptr);
  j["seed"] = e.seed;
  j["stream"] = e.stream;
  j["split"] = e.split ? json(std::string(to_string(*e.split))) : json(nullptr);
  return j.dump();
}

ManifestEntry parse_manifest_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    ManifestEntry e;
    e.id = j.at("id").get<std::int64_t>();
    e.path = j.at("path").get<std::string>();
    e.label = j.at("label").get<int>();
    if (e.label != nn::kGood && e.label != nn::kBad) throw ValidationError("label must be 0 or 1");
    if (!j.at("error_kind").is_null()) e.error_kind = errorsim::parse_error_kind(j.at("error_kind").get<std::string>());
    if ((e.label == nn::kBad) != e.error_kind.has_value()) {
      throw ValidationError("bad samples must carry an error kind and good samples must not");
    }
    e.seed = j.at("seed").get<std::uint64_t>();
    e.stream = j.at("stream").get<std::uint64_t>();
    if (!j.at("split").is_null()) e.split = parse_split(j.at("split").get<std::string>());
    return e;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed manifest line: ") + ex.what());
  }
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest) out += manifest_line(e) + "\n";
  write_file(path, out);
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      m.push_back(parse_manifest_line(line));
    } catch (const Error& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return m;
}

nn::LabeledImages PackedDataset::view() const { return {count, kRows, kCols, images, labels}; }

GrayImage PackedDataset::image(std::size_t i) const {
  if (i >= count) throw OutOfBounds("packed image index out of range");
  const std::size_t px = static_cast<std::size_t>(kRows) * kCols;
  return GrayImage(kCols, kRows, std::vector<std::uint8_t>(images.begin() + static_cast<std::ptrdiff_t>(i * px),
                                                           images.begin() + static_cast<std::ptrdiff_t>((i + 1) * px)));
}

PackedDataset pack(const Manifest& manifest, Split split, const fs::path& root) {
  PackedDataset d;
  for (const auto& e : manifest) {
    if (e.split != split) continue;
    const fs::path file = root / e.path;
    GrayImage img;
    try {
      img = read_pgm(file);
    } catch (const IoError& ex) {
      throw ValidationError(ex.what());
    }
    if (img.height() != kRows || img.width() != kCols) {
      throw ValidationError(file.string() + ": expected 45x132, got " + std::to_string(img.height()) + "x" +
                            std::to_string(img.width()));
    }
    if (!img.is_binary()) throw ValidationError(file.string() + ": image is not binary");
    d.images.insert(d.images.end(), img.data().begin(), img.data().end());
    d.labels.push_back(static_cast<std::uint8_t>(e.label));
    d.ids.push_back(e.id);
    ++d.count;
  }
  return d;
}

void save_packed(const PackedDataset& data, const fs::path& path) {
  std::string out = "PGDS";
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  };
  put_u32(kPackedVersion);
  put_u32(static_cast<std::uint32_t>(data.count));
  out.append(data.labels.begin(), data.labels.end());
  out.append(data.images.begin(), data.images.end());
  write_file(path, out);
}

PackedDataset load_packed(const fs::path& path) {
  const std::string bytes = read_file(path);
  auto u32_at = [&](std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[pos + i])) << (8 * i);
    return v;
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "PGDS") != 0) throw ValidationError(path.string() + ": not a packed dataset");
  if (u32_at(4) != kPackedVersion) throw ValidationError(path.string() + ": unsupported packed version");
  PackedDataset d;
  d.count = u32_at(8);
  const std::size_t px = static_cast<std::size_t>(kRows) * kCols;
  if (bytes.size() != 12 + d.count + d.count * px) throw ValidationError(path.string() + ": truncated packed dataset");
  d.labels.assign(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(d.count));
  d.images.assign(bytes.begin() + 12 + static_cast<std::ptrdiff_t>(d.count), bytes.end());
  for (std::uint8_t l : d.labels) {
    if (l > 1) throw ValidationError(path.string() + ": label out of range");
  }
  for (std::uint8_t v : d.images) {
    if (v != kInk && v != kBackground) throw ValidationError(path.string() + ": image data is not binary");
  }
  d.ids.resize(d.count);
  for (std::size_t i = 0; i < d.count; ++i) d.ids[i] = static_cast<std::int64_t>(i);
  return d;
}

}  // namespace printguard::dataset
