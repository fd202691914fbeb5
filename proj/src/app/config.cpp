#include "printguard/app/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "printguard/core/pgm.hpp"

namespace printguard::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid value for '" + key + "': '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T, typename Access>
Field number(std::string key, Access access) {
  Field f;
  f.key = key;
  f.get = [access](const RunConfig& c) {
    const T v = access(const_cast<RunConfig&>(c));
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(v);
    } else {
      return std::to_string(v);
    }
  };
  f.set = [access, key](RunConfig& c, const std::string& v) { access(c) = parse_number<T>(key, v); };
  return f;
}

template <typename Access>
Field boolean(std::string key, Access access) {
  Field f;
  f.key = key;
  f.get = [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); };
  f.set = [access, key](RunConfig& c, const std::string& v) { access(c) = parse_bool(key, v); };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(number<std::uint64_t>("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
    {
      Field f;
      f.key = "train_seed";
      f.get = [](const RunConfig& c) { return c.train_seed ? std::to_string(*c.train_seed) : std::string("auto"); };
      f.set = [](RunConfig& c, const std::string& v) {
        if (v == "auto") {
          c.train_seed.reset();
        } else {
          c.train_seed = parse_number<std::uint64_t>("train_seed", v);
        }
      };
      t.push_back(f);
    }
    // dataset composition
    t.push_back(number<int>("count", [](RunConfig& c) -> int& { return c.data.count; }));
    t.push_back(number<double>("good_fraction", [](RunConfig& c) -> double& { return c.data.good_fraction; }));
    t.push_back(number<double>("blot_share", [](RunConfig& c) -> double& { return c.data.blot_share; }));
    t.push_back(number<double>("lpe_share", [](RunConfig& c) -> double& { return c.data.lpe_share; }));
    t.push_back(number<double>("lse_share", [](RunConfig& c) -> double& { return c.data.lse_share; }));
    t.push_back(number<int>("word_len_min", [](RunConfig& c) -> int& { return c.data.word_len_min; }));
    t.push_back(number<int>("word_len_max", [](RunConfig& c) -> int& { return c.data.word_len_max; }));
    t.push_back(number<int>("kerning", [](RunConfig& c) -> int& { return c.data.kerning; }));
    t.push_back(number<int>("segment_margin", [](RunConfig& c) -> int& { return c.data.margin; }));
    t.push_back(number<int>("glyph_scale", [](RunConfig& c) -> int& { return c.data.glyph_scale; }));
    t.push_back(
        number<double>("max_unviable_fraction", [](RunConfig& c) -> double& { return c.data.max_unviable_fraction; }));
    // error simulation
    t.push_back(number<double>("girth_min", [](RunConfig& c) -> double& { return c.data.sim.girth_min; }));
    t.push_back(number<double>("girth_max", [](RunConfig& c) -> double& { return c.data.sim.girth_max; }));
    t.push_back(number<double>("lines_per_girth", [](RunConfig& c) -> double& { return c.data.sim.lines_per_girth; }));
    t.push_back(number<double>("seed_spread", [](RunConfig& c) -> double& { return c.data.sim.seed_spread; }));
    t.push_back(number<double>("seed_region", [](RunConfig& c) -> double& { return c.data.sim.seed_region; }));
    t.push_back(number<double>("angle_std", [](RunConfig& c) -> double& { return c.data.sim.angle_std; }));
    t.push_back(
        number<double>("vertical_angle_std", [](RunConfig& c) -> double& { return c.data.sim.vertical_angle_std; }));
    t.push_back(number<double>("length_mean_frac", [](RunConfig& c) -> double& { return c.data.sim.length_mean_frac; }));
    t.push_back(number<double>("length_std_frac", [](RunConfig& c) -> double& { return c.data.sim.length_std_frac; }));
    t.push_back(number<double>("blot_radius_min", [](RunConfig& c) -> double& { return c.data.sim.blot_radius_min; }));
    t.push_back(number<double>("blot_radius_max", [](RunConfig& c) -> double& { return c.data.sim.blot_radius_max; }));
    t.push_back(number<double>("blot_splash_min", [](RunConfig& c) -> double& { return c.data.sim.blot_splash_min; }));
    t.push_back(number<double>("blot_splash_max", [](RunConfig& c) -> double& { return c.data.sim.blot_splash_max; }));
    t.push_back(number<int>("blot_rays", [](RunConfig& c) -> int& { return c.data.sim.blot_rays; }));
    t.push_back(
        number<int>("visibility_threshold", [](RunConfig& c) -> int& { return c.data.sim.visibility_threshold; }));
    t.push_back(number<int>("max_attempts", [](RunConfig& c) -> int& { return c.data.sim.max_attempts; }));
    // segmentation
    t.push_back(number<int>("seg_row_threshold", [](RunConfig& c) -> int& { return c.segmentation.row_threshold; }));
    t.push_back(number<int>("seg_gap_rows", [](RunConfig& c) -> int& { return c.segmentation.gap_rows; }));
    t.push_back(number<int>("seg_gap_cols", [](RunConfig& c) -> int& { return c.segmentation.gap_cols; }));
    t.push_back(number<int>("seg_padding", [](RunConfig& c) -> int& { return c.segmentation.padding; }));
    // training
    t.push_back(number<double>("learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }));
    t.push_back(number<double>("momentum", [](RunConfig& c) -> double& { return c.train.momentum; }));
    t.push_back(number<double>("l2", [](RunConfig& c) -> double& { return c.train.l2; }));
    t.push_back(number<int>("minibatch", [](RunConfig& c) -> int& { return c.train.minibatch; }));
    t.push_back(number<int>("epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    t.push_back(number<int>("validation_every", [](RunConfig& c) -> int& { return c.train.validation_every; }));
    t.push_back(boolean("square_filters", [](RunConfig& c) -> bool& { return c.square_filters; }));
    t.push_back(boolean("batch_norm", [](RunConfig& c) -> bool& { return c.batch_norm; }));
    {
      Field f;
      f.key = "bn_statistics";
      f.get = [](const RunConfig& c) {
        return std::string(c.train.bn_statistics == nn::NormStatistics::Population ? "population" : "running");
      };
      f.set = [](RunConfig& c, const std::string& v) {
        if (v == "population") {
          c.train.bn_statistics = nn::NormStatistics::Population;
        } else if (v == "running") {
          c.train.bn_statistics = nn::NormStatistics::Running;
        } else {
          throw ConfigError("invalid value for 'bn_statistics': '" + v + "' (population or running)");
        }
      };
      t.push_back(f);
    }
    return t;
  }();
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

nn::Architecture RunConfig::architecture() const {
  nn::Architecture a = square_filters ? nn::Architecture::square_filters() : nn::Architecture{};
  a.batch_norm = batch_norm;
  return a;
}

nn::TrainConfig RunConfig::train_config() const {
  nn::TrainConfig t = train;
  t.seed = train_seed.value_or(seed);
  return t;
}

void RunConfig::validate() const {
  try {
    data.validate();
    train.validate();
    if (segmentation.row_threshold < 0 || segmentation.gap_rows < 1 || segmentation.gap_cols < 1 ||
        segmentation.padding < 0) {
      throw InvalidArgument("segmentation thresholds must be positive and padding non-negative");
    }
    architecture().chain();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, value);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_config(text, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_environment(RunConfig& cfg) {
  if (const char* env = std::getenv("PRINTGUARD_SEED"); env && *env) {
    cfg.seed = parse_number<std::uint64_t>("PRINTGUARD_SEED", env);
  }
}

std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace printguard::app
