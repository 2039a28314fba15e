#ifndef UNIVAR_TRAINER_HPP
#define UNIVAR_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "univar/encoder.hpp"
#include "univar/types.hpp"
#include "univar/views.hpp"

namespace univar {

struct TrainConfig {
  double learning_rate = 1e-5;
  int warmup_steps = 1000;
  int batch_size = 64;
  int epochs = 1;
  double temperature = 0.05;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Total optimizer steps; 0 means derive from epochs (one epoch covers the
  // corpus: ceil(|QA| / (B * E[n1 + n2])) steps).
  int max_steps = 0;
  int checkpoint_every = 100;
  double validation_fraction = 0.1;
  // Off by default: the loss anchors on the first view only.
  bool symmetric_loss = false;
};

double cosine_similarity(const Embedding& a, const Embedding& b);

// L = -(1/B) sum_i log[ exp(sim(z1_i, z2_i)/tau) / sum_j exp(sim(z1_i, z2_j)/tau) ]
// with cosine similarity and max-subtraction log-sum-exp stabilization.
double info_nce_loss(const std::vector<Embedding>& z1,
                     const std::vector<Embedding>& z2, double tau,
                     bool symmetric = false);

// Same loss over a precomputed similarity matrix S[i][j] already divided by
// nothing; tau is applied here.
double info_nce_loss_from_similarities(
    const std::vector<std::vector<double>>& sim, double tau,
    bool symmetric = false);

// I(Z1; Z2) >= log(B) - L.
double mi_lower_bound(double loss, int batch_size);

// Linear warmup to the base rate, constant afterwards.
double lr_at(int step, const TrainConfig& config);

struct StepRecord {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double mi_bound = 0.0;
};

struct TrainResult {
  EncoderConfig encoder_config;
  std::vector<double> final_params;
  std::vector<StepRecord> history;
  std::vector<double> validation_losses;  // one per checkpoint
  int steps_run = 0;
};

// Steps covered by one epoch under the sampler's expected view sizes.
int steps_per_epoch(std::size_t qa_count, const SamplerConfig& sampler);

// AdamW training of the encoder under the contrastive objective. Writes a
// checkpoint every checkpoint_every steps plus a final one when
// checkpoint_path is non-empty; appends one structured record per step to
// log_path when non-empty. Deterministic for a fixed seed. Throws
// NonFiniteLoss (with the offending step in the message) and propagates
// InsufficientCorpus from the batch sampler.
TrainResult train(const Corpus& corpus, const TrainConfig& train_config,
                  const SamplerConfig& sampler_config, Encoder& encoder,
                  const std::string& checkpoint_path = "",
                  const std::string& log_path = "");

// Analytic-vs-numeric gradient agreement of the composed encoder + loss on
// one fixed batch of serialized view-pair texts. Central differences with
// step epsilon over >= coordinate_samples randomly chosen parameters.
// Returns the max relative error.
double gradient_check(Encoder& encoder,
                      const std::vector<std::string>& texts1,
                      const std::vector<std::string>& texts2, double tau,
                      double epsilon, int coordinate_samples,
                      std::uint64_t seed);

// Batch loss and its gradient in one backward pass.
double batch_loss_and_grad(const Encoder& encoder,
                           const std::vector<std::string>& texts1,
                           const std::vector<std::string>& texts2, double tau,
                           bool symmetric, std::vector<double>& grad_params);

}  // namespace univar

#endif
