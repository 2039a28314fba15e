#include "univar/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <unordered_map>

#include "univar/errors.hpp"

namespace univar {

namespace {

constexpr char kMagic[4] = {'U', 'V', 'A', 'R'};
constexpr std::uint32_t kVersion = 1;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated checkpoint while reading " + what);
  return v;
}

}  // namespace

double dot(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size())
    throw DimensionError("embedding dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += a.values[i] * b.values[i];
  return s;
}

std::uint64_t ngram_hash(std::uint64_t seed, const std::string& gram) {
  return fnv1a(kFnvOffset ^ seed, gram.data(), gram.size());
}

SparseVector featurize(const std::string& text, const EncoderConfig& config) {
  const std::vector<std::string> tokens = tokenize(text);
  std::unordered_map<int, double> counts;
  for (int order : config.ngram_orders) {
    if (order < 1) throw DimensionError("ngram order must be >= 1");
    const std::size_t k = static_cast<std::size_t>(order);
    if (tokens.size() < k) continue;
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t j = 1; j < k; ++j) {
        gram += ' ';
        gram += tokens[i + j];
      }
      const int bucket = static_cast<int>(
          ngram_hash(config.hash_seed, gram) %
          static_cast<std::uint64_t>(config.feature_dim));
      counts[bucket] += 1.0;
    }
  }
  SparseVector features(counts.begin(), counts.end());
  std::sort(features.begin(), features.end());
  double norm_sq = 0.0;
  for (const auto& [_, v] : features) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [_, v] : features) v *= inv;
  }
  return features;
}

Encoder::Encoder(const EncoderConfig& config) : config_(config) {
  if (config_.feature_dim < config_.embed_dim || config_.embed_dim < 2)
    throw DimensionError("encoder requires F >= d >= 2");
  const std::size_t f = static_cast<std::size_t>(config_.feature_dim);
  const std::size_t h = static_cast<std::size_t>(config_.hidden_dim);
  const std::size_t d = static_cast<std::size_t>(config_.embed_dim);
  params_.assign(h * f + h + d * h + d, 0.0);
}

std::size_t Encoder::b1_offset() const {
  return static_cast<std::size_t>(config_.hidden_dim) *
         static_cast<std::size_t>(config_.feature_dim);
}

std::size_t Encoder::w2_offset() const {
  return b1_offset() + static_cast<std::size_t>(config_.hidden_dim);
}

std::size_t Encoder::b2_offset() const {
  return w2_offset() + static_cast<std::size_t>(config_.embed_dim) *
                           static_cast<std::size_t>(config_.hidden_dim);
}

void Encoder::init_parameters(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(config_.feature_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
  for (std::size_t i = 0; i < b1_offset(); ++i) params_[i] = s1 * dist(rng);
  for (std::size_t i = b1_offset(); i < w2_offset(); ++i) params_[i] = 0.0;
  for (std::size_t i = w2_offset(); i < b2_offset(); ++i)
    params_[i] = s2 * dist(rng);
  for (std::size_t i = b2_offset(); i < params_.size(); ++i) params_[i] = 0.0;
}

Encoder::Trace Encoder::forward(const std::string& text) const {
  const int h = config_.hidden_dim;
  const int d = config_.embed_dim;
  const std::size_t f = static_cast<std::size_t>(config_.feature_dim);

  Trace t;
  t.x = featurize(text, config_);

  t.hidden.assign(static_cast<std::size_t>(h), 0.0);
  const double* w1 = params_.data();
  const double* b1 = params_.data() + b1_offset();
  for (int j = 0; j < h; ++j) {
    double acc = b1[j];
    const double* row = w1 + static_cast<std::size_t>(j) * f;
    for (const auto& [bucket, v] : t.x) acc += row[bucket] * v;
    t.hidden[static_cast<std::size_t>(j)] = std::tanh(acc);
  }

  t.pre_norm.assign(static_cast<std::size_t>(d), 0.0);
  const double* w2 = params_.data() + w2_offset();
  const double* b2 = params_.data() + b2_offset();
  for (int i = 0; i < d; ++i) {
    double acc = b2[i];
    const double* row = w2 + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j)
      acc += row[j] * t.hidden[static_cast<std::size_t>(j)];
    t.pre_norm[static_cast<std::size_t>(i)] = acc;
  }

  double norm_sq = 0.0;
  for (double v : t.pre_norm) norm_sq += v * v;
  t.norm = std::sqrt(norm_sq);
  t.z.values.assign(static_cast<std::size_t>(d), 0.0);
  if (t.norm < 1e-12) {
    t.z.values[0] = 1.0;  // degenerate projection; fixed fallback direction
  } else {
    for (int i = 0; i < d; ++i)
      t.z.values[static_cast<std::size_t>(i)] =
          t.pre_norm[static_cast<std::size_t>(i)] / t.norm;
  }
  return t;
}

Embedding Encoder::encode_one(const std::string& text) const {
  return forward(text).z;
}

std::vector<Embedding> Encoder::encode(
    const std::vector<std::string>& texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode_one(t));
  return out;
}

void Encoder::backward(const Trace& t, const std::vector<double>& grad_z,
                       std::vector<double>& grad_params) const {
  const int h = config_.hidden_dim;
  const int d = config_.embed_dim;
  const std::size_t f = static_cast<std::size_t>(config_.feature_dim);
  if (grad_z.size() != static_cast<std::size_t>(d))
    throw DimensionError("grad_z dimension mismatch");
  if (grad_params.size() != params_.size())
    throw DimensionError("grad_params size mismatch");
  if (t.norm < 1e-12) return;  // z constant in a neighborhood is not modeled

  // Through z = y / ||y||: dy = (g - (g.z) z) / ||y||.
  double gz = 0.0;
  for (int i = 0; i < d; ++i)
    gz += grad_z[static_cast<std::size_t>(i)] *
          t.z.values[static_cast<std::size_t>(i)];
  std::vector<double> grad_y(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    grad_y[static_cast<std::size_t>(i)] =
        (grad_z[static_cast<std::size_t>(i)] -
         gz * t.z.values[static_cast<std::size_t>(i)]) /
        t.norm;

  const double* w2 = params_.data() + w2_offset();
  double* gw2 = grad_params.data() + w2_offset();
  double* gb2 = grad_params.data() + b2_offset();
  std::vector<double> grad_h(static_cast<std::size_t>(h), 0.0);
  for (int i = 0; i < d; ++i) {
    const double gy = grad_y[static_cast<std::size_t>(i)];
    gb2[i] += gy;
    const double* row = w2 + static_cast<std::size_t>(i) * h;
    double* grow = gw2 + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) {
      grow[j] += gy * t.hidden[static_cast<std::size_t>(j)];
      grad_h[static_cast<std::size_t>(j)] += gy * row[j];
    }
  }

  double* gw1 = grad_params.data();
  double* gb1 = grad_params.data() + b1_offset();
  for (int j = 0; j < h; ++j) {
    const double hj = t.hidden[static_cast<std::size_t>(j)];
    const double gu = grad_h[static_cast<std::size_t>(j)] * (1.0 - hj * hj);
    gb1[j] += gu;
    double* grow = gw1 + static_cast<std::size_t>(j) * f;
    for (const auto& [bucket, v] : t.x) grow[bucket] += gu * v;
  }
}

std::uint64_t Encoder::parameter_checksum() const {
  return fnv1a(kFnvOffset, params_.data(), params_.size() * sizeof(double));
}

void save_checkpoint(const Encoder& encoder, const std::string& path,
                     const CheckpointExtras* extras) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");
  const EncoderConfig& c = encoder.config();
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(c.feature_dim));
  write_pod(out, static_cast<std::uint32_t>(c.hidden_dim));
  write_pod(out, static_cast<std::uint32_t>(c.embed_dim));
  write_pod(out, c.hash_seed);
  write_pod(out, static_cast<std::uint32_t>(c.ngram_orders.size()));
  for (int order : c.ngram_orders)
    write_pod(out, static_cast<std::uint32_t>(order));
  write_pod(out, static_cast<std::uint64_t>(encoder.parameter_count()));
  for (double p : encoder.parameters())
    write_pod(out, static_cast<float>(p));
  const std::uint8_t has_extras = extras ? 1 : 0;
  write_pod(out, has_extras);
  if (extras) {
    write_pod(out, static_cast<std::uint64_t>(extras->config_json.size()));
    out.write(extras->config_json.data(),
              static_cast<std::streamsize>(extras->config_json.size()));
    write_pod(out, extras->step);
    write_pod(out, static_cast<std::uint64_t>(extras->loss_history.size()));
    for (double v : extras->loss_history) write_pod(out, v);
  }
  if (!out) throw IOError("write failed: " + path);
}

Encoder load_checkpoint(const std::string& path, CheckpointExtras* extras) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad checkpoint magic in " + path);
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  EncoderConfig c;
  c.feature_dim = static_cast<int>(read_pod<std::uint32_t>(in, "feature_dim"));
  c.hidden_dim = static_cast<int>(read_pod<std::uint32_t>(in, "hidden_dim"));
  c.embed_dim = static_cast<int>(read_pod<std::uint32_t>(in, "embed_dim"));
  c.hash_seed = read_pod<std::uint64_t>(in, "hash_seed");
  const auto n_orders = read_pod<std::uint32_t>(in, "ngram order count");
  c.ngram_orders.clear();
  for (std::uint32_t i = 0; i < n_orders; ++i)
    c.ngram_orders.push_back(
        static_cast<int>(read_pod<std::uint32_t>(in, "ngram order")));

  Encoder encoder(c);
  const auto count = read_pod<std::uint64_t>(in, "parameter count");
  if (count != encoder.parameter_count())
    throw DimensionError("checkpoint parameter count disagrees with header");
  for (std::size_t i = 0; i < count; ++i)
    encoder.parameters()[i] = static_cast<double>(read_pod<float>(in, "param"));

  const auto has_extras = read_pod<std::uint8_t>(in, "extras flag");
  if (has_extras && extras) {
    const auto len = read_pod<std::uint64_t>(in, "config length");
    extras->config_json.resize(len);
    in.read(extras->config_json.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError("truncated config snapshot in " + path);
    extras->step = read_pod<std::uint64_t>(in, "step");
    const auto hist = read_pod<std::uint64_t>(in, "history length");
    if (hist != extras->step)
      throw FormatError("loss history length disagrees with step counter");
    extras->loss_history.resize(hist);
    for (std::size_t i = 0; i < hist; ++i)
      extras->loss_history[i] = read_pod<double>(in, "loss");
  }
  return encoder;
}

}  // namespace univar
