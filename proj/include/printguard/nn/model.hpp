#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "printguard/nn/layers.hpp"

namespace printguard::nn {

class CorruptModel : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr int kArchitectureVersion = 1;

/// Two valid-padded conv blocks around a non-overlapping max pool, then two
/// dense layers. Defaults are the shipped rectangular-filter network:
/// 45x132x1 -> 41x123x3 -> 13x41x3 -> 4x37x5 -> 740 -> 100 -> 2.
struct Architecture {
  int input_rows = 45;
  int input_cols = 132;
  int conv1_channels = 3;
  int conv1_rows = 5;
  int conv1_cols = 10;
  int pool = 3;
  int conv2_channels = 5;
  int conv2_rows = 10;
  int conv2_cols = 5;
  int hidden = 100;
  int classes = 2;
  bool batch_norm = true;
  float epsilon = 1e-5f;

  /// 5x5 filters in both conv layers.
  static Architecture square_filters();

  /// Activation shapes (C, H, W) after conv1, pool, conv2; throws ShapeError
  /// when the chain does not fit.
  struct Chain {
    Shape conv1, pool, conv2;
    std::size_t flatten = 0;
  };
  Chain chain() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

class Model {
 public:
  explicit Model(Architecture arch = {});
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const Architecture& arch() const { return arch_; }

  /// N x 1 x rows x cols -> N x classes logits.
  Tensor forward(const Tensor& batch, Mode mode);
  void backward(const Tensor& grad_logits);

  std::vector<Param<float>> params();
  std::vector<Buffer<float>> buffers();

  /// Every persistent tensor (parameters then running statistics, in layer
  /// order), as stored in a model file.
  std::vector<std::pair<std::string, Tensor*>> tensors();
  std::vector<std::pair<std::string, const Tensor*>> tensors() const;

  std::size_t layer_count() const { return layers_.size(); }
  const Layer<float>& layer(std::size_t i) const { return *layers_.at(i); }
  Layer<float>& layer(std::size_t i) { return *layers_.at(i); }

  friend bool operator==(const Model& a, const Model& b);

 private:
  void build();

  Architecture arch_;
  std::vector<std::unique_ptr<Layer<float>>> layers_;
};

/// He-normal conv and dense weights drawn in a fixed order from the seeded
/// stream; zero biases; unit gamma, zero beta; running mean 0 and var 1.
Model init_model(std::uint64_t seed, const Architecture& arch = {});

/// PGDM file: magic, u32 version, tensors (u8 name length, name, u32 rank,
/// u32 dims, little-endian f32 data), trailing CRC32 of everything before it.
std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace printguard::nn
