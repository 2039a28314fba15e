#ifndef UNIVAR_ENCODER_HPP
#define UNIVAR_ENCODER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace univar {

struct Embedding {
  std::vector<double> values;  // unit-norm after encode
};

double dot(const Embedding& a, const Embedding& b);

struct EncoderConfig {
  int feature_dim = 4096;  // hashed feature space F
  int embed_dim = 128;     // d
  int hidden_dim = 256;
  std::uint64_t hash_seed = 0x9e3779b97f4a7c15ULL;
  std::vector<int> ngram_orders = {1, 2};

  bool operator==(const EncoderConfig&) const = default;
};

// Sparse hashed bag-of-ngrams feature vector, l2-normalized.
using SparseVector = std::vector<std::pair<int, double>>;

// Seeded FNV-1a over the n-gram bytes; bucket = hash % F.
std::uint64_t ngram_hash(std::uint64_t seed, const std::string& gram);

// Lowercases, splits on non-alphanumeric bytes, hashes each n-gram of the
// configured orders into [0, F), accumulates counts, l2-normalizes.
// Empty text yields the empty (zero) vector.
SparseVector featurize(const std::string& text, const EncoderConfig& config);

// Two-layer projection over hashed features:
//   h = tanh(W1 x + b1),  y = W2 h + b2,  z = y / ||y||.
// Pure function of (parameters, text); both views of a pair always go through
// the same parameter set.
class Encoder {
 public:
  explicit Encoder(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }

  // Deterministic parameter init from the given seed.
  void init_parameters(std::uint64_t seed);

  Embedding encode_one(const std::string& text) const;
  std::vector<Embedding> encode(const std::vector<std::string>& texts) const;

  // Flat parameter access in declared order: W1, b1, W2, b2.
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  // FNV-1a digest of the parameter bytes; used to assert weight sharing.
  std::uint64_t parameter_checksum() const;

  // Layout offsets into the flat parameter vector.
  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const;
  std::size_t w2_offset() const;
  std::size_t b2_offset() const;

  // Forward pass with intermediates kept for backprop.
  struct Trace {
    SparseVector x;
    std::vector<double> hidden;   // tanh activations
    std::vector<double> pre_norm; // y
    double norm = 0.0;
    Embedding z;
  };
  Trace forward(const std::string& text) const;

  // Accumulates dL/dparams given dL/dz for a traced forward pass.
  void backward(const Trace& trace, const std::vector<double>& grad_z,
                std::vector<double>& grad_params) const;

 private:
  EncoderConfig config_;
  std::vector<double> params_;
};

// Binary checkpoint: "UVAR" magic, version, config header, float32 parameter
// blocks in declared order, then an optional JSON trailer (training state).
struct CheckpointExtras {
  std::string config_json;           // config snapshot
  std::uint64_t step = 0;
  std::vector<double> loss_history;  // one entry per step
};

void save_checkpoint(const Encoder& encoder, const std::string& path,
                     const CheckpointExtras* extras = nullptr);
Encoder load_checkpoint(const std::string& path,
                        CheckpointExtras* extras = nullptr);

}  // namespace univar

#endif
