#include "printguard/nn/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <map>

#include <zlib.h>

#include "printguard/core/pgm.hpp"
#include "printguard/core/rng.hpp"

namespace printguard::nn {

namespace {
constexpr std::uint64_t kInitStream = 1;
constexpr char kMagic[4] = {'P', 'G', 'D', 'M'};
}  // namespace

Architecture Architecture::square_filters() {
  Architecture a;
  a.conv1_rows = a.conv1_cols = 5;
  a.conv2_rows = a.conv2_cols = 5;
  return a;
}

Architecture::Chain Architecture::chain() const {
  auto fail = [](const std::string& what) { throw ShapeError("architecture: " + what); };
  if (input_rows <= 0 || input_cols <= 0 || conv1_channels <= 0 || conv2_channels <= 0 || hidden <= 0 ||
      classes <= 1 || pool <= 0 || conv1_rows <= 0 || conv1_cols <= 0 || conv2_rows <= 0 || conv2_cols <= 0) {
    fail("all sizes must be positive");
  }
  if (conv1_rows > input_rows || conv1_cols > input_cols) fail("conv1 filter larger than input");
  Chain c;
  const auto sz = [](int v) { return static_cast<std::size_t>(v); };
  const int h1 = input_rows - conv1_rows + 1, w1 = input_cols - conv1_cols + 1;
  c.conv1 = {sz(conv1_channels), sz(h1), sz(w1)};
  const int hp = h1 / pool, wp = w1 / pool;
  if (hp <= 0 || wp <= 0) fail("pooling leaves no output");
  c.pool = {sz(conv1_channels), sz(hp), sz(wp)};
  if (conv2_rows > hp || conv2_cols > wp) fail("conv2 filter larger than pooled map");
  c.conv2 = {sz(conv2_channels), sz(hp - conv2_rows + 1), sz(wp - conv2_cols + 1)};
  c.flatten = shape_size(c.conv2);
  return c;
}

Model::Model(Architecture arch) : arch_(arch) { build(); }

Model::Model(const Model& other) : arch_(other.arch_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Model::build() {
  const auto chain = arch_.chain();
  const auto sz = [](int v) { return static_cast<std::size_t>(v); };
  layers_.clear();
  auto conv1 = std::make_unique<Conv2D<float>>("conv1", 1, sz(arch_.conv1_channels), sz(arch_.conv1_rows),
                                               sz(arch_.conv1_cols));
  conv1->set_input_grad(false);
  layers_.push_back(std::move(conv1));
  if (arch_.batch_norm) layers_.push_back(std::make_unique<BatchNorm2D<float>>("bn1", sz(arch_.conv1_channels), arch_.epsilon));
  layers_.push_back(std::make_unique<ReLU<float>>("relu1"));
  layers_.push_back(std::make_unique<MaxPool2D<float>>("pool1", arch_.pool, arch_.pool));
  layers_.push_back(std::make_unique<Conv2D<float>>("conv2", sz(arch_.conv1_channels), sz(arch_.conv2_channels),
                                                    sz(arch_.conv2_rows), sz(arch_.conv2_cols)));
  if (arch_.batch_norm) layers_.push_back(std::make_unique<BatchNorm2D<float>>("bn2", sz(arch_.conv2_channels), arch_.epsilon));
  layers_.push_back(std::make_unique<ReLU<float>>("relu2"));
  layers_.push_back(std::make_unique<Flatten<float>>("flatten"));
  layers_.push_back(std::make_unique<Dense<float>>("dense1", chain.flatten, sz(arch_.hidden)));
  layers_.push_back(std::make_unique<ReLU<float>>("relu3"));
  layers_.push_back(std::make_unique<Dense<float>>("dense2", sz(arch_.hidden), sz(arch_.classes)));
}

Tensor Model::forward(const Tensor& batch, Mode mode) {
  const Shape expected{1, static_cast<std::size_t>(arch_.input_rows), static_cast<std::size_t>(arch_.input_cols)};
  if (batch.rank() != 4 || Shape(batch.shape().begin() + 1, batch.shape().end()) != expected) {
    throw ShapeError("model input must be N x 1 x " + std::to_string(arch_.input_rows) + " x " +
                     std::to_string(arch_.input_cols) + ", got " + shape_string(batch.shape()));
  }
  Tensor x = batch;
  for (auto& l : layers_) x = l->forward(x, mode);
  return x;
}

void Model::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<Param<float>> Model::params() {
  std::vector<Param<float>> out;
  for (auto& l : layers_) {
    for (auto& p : l->params()) out.push_back(p);
  }
  return out;
}

std::vector<Buffer<float>> Model::buffers() {
  std::vector<Buffer<float>> out;
  for (auto& l : layers_) {
    for (auto& b : l->buffers()) out.push_back(b);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::tensors() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (auto& l : layers_) {
    for (auto& p : l->params()) out.emplace_back(p.name, p.value);
    for (auto& b : l->buffers()) out.emplace_back(b.name, b.value);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> Model::tensors() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<Model*>(this)->tensors()) out.emplace_back(name, t);
  return out;
}

bool operator==(const Model& a, const Model& b) {
  if (!(a.arch_ == b.arch_)) return false;
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].first != tb[i].first || ta[i].second->shape() != tb[i].second->shape()) return false;
    if (std::memcmp(ta[i].second->data(), tb[i].second->data(), ta[i].second->size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

Model init_model(std::uint64_t seed, const Architecture& arch) {
  Model model(arch);
  Rng rng(seed, kInitStream);
  for (auto& p : model.params()) {
    if (!p.decay) continue;  // biases and gamma/beta keep their defaults
    const Shape& s = p.value->shape();
    // conv: Cout x Cin x KH x KW; dense: in x out
    const std::size_t fan_in = s.size() == 4 ? s[1] * s[2] * s[3] : s[0];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : p.value->values()) v = static_cast<float>(rng.normal(0.0, stddev));
  }
  return model;
}

// --- serialization -----------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  bool done() const { return pos_ == end_; }

  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CorruptModel("model file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::string& bytes, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(n)));
}

void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
  if (name.size() > 255) throw InvalidArgument("tensor name too long: " + name);
  out.push_back(static_cast<char>(name.size()));
  out += name;
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  for (float v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

// meta.arch = [architecture version, epsilon, pool, input rows, input cols, batch norm]
Tensor arch_meta(const Architecture& a) {
  return Tensor({6}, {static_cast<float>(kArchitectureVersion), a.epsilon, static_cast<float>(a.pool),
                      static_cast<float>(a.input_rows), static_cast<float>(a.input_cols), a.batch_norm ? 1.0f : 0.0f});
}

}  // namespace

std::string serialize_model(const Model& model) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kModelFormatVersion);
  put_tensor(out, "meta.arch", arch_meta(model.arch()));
  for (const auto& [name, t] : model.tensors()) put_tensor(out, name, *t);
  put_u32(out, crc32_of(out, out.size()));
  return out;
}

Model deserialize_model(const std::string& bytes) {
  if (bytes.size() < 12) throw CorruptModel("model file truncated");
  if (bytes.compare(0, 4, kMagic, 4) != 0) throw CorruptModel("bad magic, not a model file");
  const std::size_t body = bytes.size() - 4;
  Reader crc_reader(bytes, bytes.size());
  crc_reader.str(body);
  if (crc_reader.u32() != crc32_of(bytes, body)) throw CorruptModel("checksum mismatch (truncated or damaged file)");

  Reader in(bytes, body);
  in.str(4);
  const std::uint32_t version = in.u32();
  if (version != kModelFormatVersion) throw CorruptModel("unsupported model version " + std::to_string(version));

  std::map<std::string, Tensor> found;
  std::vector<std::string> order;
  while (!in.done()) {
    const std::string name = in.str(in.u8());
    const std::uint32_t rank = in.u32();
    if (rank > 8) throw CorruptModel("tensor '" + name + "' has implausible rank");
    Shape shape(rank);
    for (auto& d : shape) d = in.u32();
    const std::size_t n = shape_size(shape);
    in.need(4 * n);
    std::vector<float> data(n);
    for (auto& v : data) v = std::bit_cast<float>(in.u32());
    if (!found.emplace(name, Tensor(shape, std::move(data))).second) {
      throw CorruptModel("duplicate tensor '" + name + "'");
    }
  }

  auto take = [&](const std::string& name) -> const Tensor& {
    auto it = found.find(name);
    if (it == found.end()) throw CorruptModel("missing tensor '" + name + "'");
    return it->second;
  };
  const Tensor& meta = take("meta.arch");
  if (meta.shape() != Shape{6} || meta[0] != static_cast<float>(kArchitectureVersion)) {
    throw CorruptModel("unsupported architecture metadata");
  }
  Architecture a;
  a.epsilon = meta[1];
  a.pool = static_cast<int>(meta[2]);
  a.input_rows = static_cast<int>(meta[3]);
  a.input_cols = static_cast<int>(meta[4]);
  a.batch_norm = meta[5] != 0.0f;
  const Tensor& c1 = take("conv1.weight");
  const Tensor& c2 = take("conv2.weight");
  const Tensor& d1 = take("dense1.weight");
  const Tensor& d2 = take("dense2.weight");
  if (c1.rank() != 4 || c2.rank() != 4 || d1.rank() != 2 || d2.rank() != 2) {
    throw CorruptModel("weight tensors have the wrong rank");
  }
  a.conv1_channels = static_cast<int>(c1.dim(0));
  a.conv1_rows = static_cast<int>(c1.dim(2));
  a.conv1_cols = static_cast<int>(c1.dim(3));
  a.conv2_channels = static_cast<int>(c2.dim(0));
  a.conv2_rows = static_cast<int>(c2.dim(2));
  a.conv2_cols = static_cast<int>(c2.dim(3));
  a.hidden = static_cast<int>(d1.dim(1));
  a.classes = static_cast<int>(d2.dim(1));

  Model model = [&] {
    try {
      return Model(a);
    } catch (const ShapeError& e) {
      throw CorruptModel(std::string("inconsistent architecture: ") + e.what());
    }
  }();
  std::size_t used = 1;
  for (auto& [name, t] : model.tensors()) {
    const Tensor& src = take(name);
    if (src.shape() != t->shape()) {
      throw CorruptModel("tensor '" + name + "' has shape " + shape_string(src.shape()) + ", expected " +
                         shape_string(t->shape()));
    }
    *t = src;
    ++used;
  }
  if (used != found.size()) throw CorruptModel("model file holds unexpected tensors");
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) { write_file(path, serialize_model(model)); }

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace printguard::nn
