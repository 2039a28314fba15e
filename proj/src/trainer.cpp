#include "univar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "univar/errors.hpp"

namespace univar {

namespace {

// -(1/B) sum_i [ S_ii/tau - logsumexp_j S_ij/tau ] over one anchor direction.
double directed_loss(const std::vector<std::vector<double>>& sim, double tau,
                     bool transpose) {
  const std::size_t b = sim.size();
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b; ++j) {
      const double s = (transpose ? sim[j][i] : sim[i][j]) / tau;
      m = std::max(m, s);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const double s = (transpose ? sim[j][i] : sim[i][j]) / tau;
      acc += std::exp(s - m);
    }
    const double lse = m + std::log(acc);
    total += lse - sim[i][i] / tau;
  }
  return total / static_cast<double>(b);
}

// Softmax over row i of S/tau (or column i when transposed).
std::vector<double> row_softmax(const std::vector<std::vector<double>>& sim,
                                std::size_t i, double tau, bool transpose) {
  const std::size_t b = sim.size();
  std::vector<double> p(b);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < b; ++j)
    m = std::max(m, (transpose ? sim[j][i] : sim[i][j]) / tau);
  double z = 0.0;
  for (std::size_t j = 0; j < b; ++j) {
    p[j] = std::exp((transpose ? sim[j][i] : sim[i][j]) / tau - m);
    z += p[j];
  }
  for (double& v : p) v /= z;
  return p;
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int t = 0;
};

void adamw_step(std::vector<double>& params, const std::vector<double>& grad,
                AdamState& state, const TrainConfig& cfg, double lr) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, state.t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * grad[i];
    state.v[i] =
        cfg.adam_beta2 * state.v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) +
                       cfg.weight_decay * params[i]);
  }
}

}  // namespace

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return dot(a, b);
}

double info_nce_loss_from_similarities(
    const std::vector<std::vector<double>>& sim, double tau, bool symmetric) {
  if (tau <= 0.0) throw DimensionError("temperature must be positive");
  if (sim.empty()) throw DimensionError("empty similarity matrix");
  const double fwd = directed_loss(sim, tau, false);
  if (!symmetric) return fwd;
  return 0.5 * (fwd + directed_loss(sim, tau, true));
}

double info_nce_loss(const std::vector<Embedding>& z1,
                     const std::vector<Embedding>& z2, double tau,
                     bool symmetric) {
  if (z1.size() != z2.size())
    throw DimensionError("view batches differ in length: " +
                         std::to_string(z1.size()) + " vs " +
                         std::to_string(z2.size()));
  if (z1.empty()) throw DimensionError("empty batch");
  const std::size_t b = z1.size();
  std::vector<std::vector<double>> sim(b, std::vector<double>(b));
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      sim[i][j] = cosine_similarity(z1[i], z2[j]);
  return info_nce_loss_from_similarities(sim, tau, symmetric);
}

double mi_lower_bound(double loss, int batch_size) {
  return std::log(static_cast<double>(batch_size)) - loss;
}

double lr_at(int step, const TrainConfig& config) {
  if (step >= config.warmup_steps) return config.learning_rate;
  return config.learning_rate * static_cast<double>(step) /
         static_cast<double>(config.warmup_steps);
}

int steps_per_epoch(std::size_t qa_count, const SamplerConfig& sampler) {
  const double expected_pair_size = static_cast<double>(sampler.lambda) + 1.0;
  const double per_step =
      static_cast<double>(sampler.batch_size) * expected_pair_size;
  return std::max(1, static_cast<int>(std::ceil(
                         static_cast<double>(qa_count) / per_step)));
}

double batch_loss_and_grad(const Encoder& encoder,
                           const std::vector<std::string>& texts1,
                           const std::vector<std::string>& texts2, double tau,
                           bool symmetric, std::vector<double>& grad_params) {
  if (texts1.size() != texts2.size() || texts1.empty())
    throw DimensionError("batch text lists must be equal-length and non-empty");
  const std::size_t b = texts1.size();

  std::vector<Encoder::Trace> tr1, tr2;
  tr1.reserve(b);
  tr2.reserve(b);
  for (const auto& t : texts1) tr1.push_back(encoder.forward(t));
  for (const auto& t : texts2) tr2.push_back(encoder.forward(t));

  std::vector<std::vector<double>> sim(b, std::vector<double>(b));
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      sim[i][j] = dot(tr1[i].z, tr2[j].z);

  const double loss = info_nce_loss_from_similarities(sim, tau, symmetric);

  const std::size_t d = tr1[0].z.values.size();
  std::vector<std::vector<double>> g1(b, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> g2(b, std::vector<double>(d, 0.0));
  const double inv_b = 1.0 / static_cast<double>(b);
  const double scale = symmetric ? 0.5 : 1.0;

  // Forward direction: row i anchors z1_i against all z2_j.
  for (std::size_t i = 0; i < b; ++i) {
    const std::vector<double> p = row_softmax(sim, i, tau, false);
    for (std::size_t j = 0; j < b; ++j) {
      const double ds = scale * inv_b * (p[j] - (i == j ? 1.0 : 0.0)) / tau;
      for (std::size_t k = 0; k < d; ++k) {
        g1[i][k] += ds * tr2[j].z.values[k];
        g2[j][k] += ds * tr1[i].z.values[k];
      }
    }
  }
  if (symmetric) {
    // Reverse direction: column i anchors z2_i against all z1_j.
    for (std::size_t i = 0; i < b; ++i) {
      const std::vector<double> p = row_softmax(sim, i, tau, true);
      for (std::size_t j = 0; j < b; ++j) {
        const double ds = scale * inv_b * (p[j] - (i == j ? 1.0 : 0.0)) / tau;
        for (std::size_t k = 0; k < d; ++k) {
          g2[i][k] += ds * tr1[j].z.values[k];
          g1[j][k] += ds * tr2[i].z.values[k];
        }
      }
    }
  }

  grad_params.assign(encoder.parameter_count(), 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    encoder.backward(tr1[i], g1[i], grad_params);
    encoder.backward(tr2[i], g2[i], grad_params);
  }
  return loss;
}

namespace {

// Per-value-id split: ids with enough pairs donate a balanced slice to the
// validation side; small ids stay fully in training.
void split_corpus(const Corpus& corpus, double fraction, Corpus& train_side,
                  Corpus& val_side) {
  train_side = corpus;
  train_side.qa_pairs.clear();
  val_side = corpus;
  val_side.qa_pairs.clear();

  std::map<ValueID, std::vector<const QAPair*>> groups;
  for (const auto& qa : corpus.qa_pairs) groups[qa.value_id].push_back(&qa);
  for (auto& [id, members] : groups) {
    std::sort(members.begin(), members.end(),
              [](const QAPair* a, const QAPair* b) { return a->qa_id < b->qa_id; });
    std::size_t hold = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(members.size())));
    if (members.size() < 6 || hold < 2) hold = 0;  // too small to split
    const std::size_t cut = members.size() - hold;
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < cut ? train_side : val_side).qa_pairs.push_back(*members[i]);
  }
}

std::pair<std::vector<std::string>, std::vector<std::string>> batch_texts(
    const std::vector<ViewPair>& batch) {
  std::vector<std::string> t1, t2;
  t1.reserve(batch.size());
  t2.reserve(batch.size());
  for (const auto& pair : batch) {
    t1.push_back(pair.x1.text);
    t2.push_back(pair.x2.text);
  }
  return {std::move(t1), std::move(t2)};
}

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& train_config,
                  const SamplerConfig& sampler_config, Encoder& encoder,
                  const std::string& checkpoint_path,
                  const std::string& log_path) {
  Corpus train_side, val_side;
  split_corpus(corpus, train_config.validation_fraction, train_side, val_side);

  SamplerConfig sampler = sampler_config;
  sampler.batch_size = train_config.batch_size;

  int total_steps = train_config.max_steps;
  if (total_steps <= 0)
    total_steps = train_config.epochs *
                  steps_per_epoch(train_side.qa_pairs.size(), sampler);

  Rng rng(train_config.seed);
  Rng val_rng(train_config.seed + 1);

  AdamState adam;
  adam.m.assign(encoder.parameter_count(), 0.0);
  adam.v.assign(encoder.parameter_count(), 0.0);

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::binary);
    if (!log) throw IOError("cannot open training log " + log_path);
  }

  // Validation batch size: as many eligible held-out ids as fit under B.
  SamplerConfig val_sampler = sampler;
  val_sampler.batch_size = std::min<int>(
      sampler.batch_size,
      static_cast<int>(eligible_value_ids(val_side).size()));

  TrainResult result;
  result.encoder_config = encoder.config();

  nlohmann::json config_snapshot{
      {"learning_rate", train_config.learning_rate},
      {"warmup_steps", train_config.warmup_steps},
      {"batch_size", train_config.batch_size},
      {"epochs", train_config.epochs},
      {"temperature", train_config.temperature},
      {"seed", train_config.seed},
      {"weight_decay", train_config.weight_decay},
      {"adam_beta1", train_config.adam_beta1},
      {"adam_beta2", train_config.adam_beta2},
      {"adam_eps", train_config.adam_eps},
      {"symmetric_loss", train_config.symmetric_loss},
      {"lambda", sampler.lambda},
      {"total_steps", total_steps},
      {"steps_per_epoch", steps_per_epoch(train_side.qa_pairs.size(), sampler)}};

  std::vector<double> grad(encoder.parameter_count());
  std::vector<double> loss_history;

  auto write_checkpoint = [&](int step) {
    if (checkpoint_path.empty()) return;
    if (val_sampler.batch_size >= 1 &&
        static_cast<int>(eligible_value_ids(val_side).size()) >=
            val_sampler.batch_size) {
      Rng snapshot = val_rng;  // fixed stream so checkpoints are comparable
      auto vb = make_training_batch(val_side, val_sampler, snapshot);
      auto [vt1, vt2] = batch_texts(vb);
      const double vloss =
          info_nce_loss(encoder.encode(vt1), encoder.encode(vt2),
                        train_config.temperature, train_config.symmetric_loss);
      result.validation_losses.push_back(vloss);
    }
    CheckpointExtras extras;
    extras.config_json = config_snapshot.dump();
    extras.step = static_cast<std::uint64_t>(step);
    extras.loss_history = loss_history;
    save_checkpoint(encoder, checkpoint_path, &extras);
  };

  for (int step = 1; step <= total_steps; ++step) {
    auto batch = make_training_batch(train_side, sampler, rng);
    auto [t1, t2] = batch_texts(batch);
    const double loss =
        batch_loss_and_grad(encoder, t1, t2, train_config.temperature,
                            train_config.symmetric_loss, grad);
    if (!std::isfinite(loss))
      throw NonFiniteLoss("non-finite loss at step " + std::to_string(step));

    const double lr = lr_at(step, train_config);
    adamw_step(encoder.parameters(), grad, adam, train_config, lr);

    loss_history.push_back(loss);
    result.history.push_back(
        {step, lr, loss, mi_lower_bound(loss, train_config.batch_size)});
    if (log) {
      log << nlohmann::json{{"step", step},
                            {"lr", lr},
                            {"loss", loss},
                            {"mi_bound",
                             mi_lower_bound(loss, train_config.batch_size)}}
                 .dump()
          << "\n";
    }
    if (train_config.checkpoint_every > 0 &&
        step % train_config.checkpoint_every == 0 && step != total_steps)
      write_checkpoint(step);
  }
  write_checkpoint(total_steps);

  result.final_params = encoder.parameters();
  result.steps_run = total_steps;
  return result;
}

double gradient_check(Encoder& encoder,
                      const std::vector<std::string>& texts1,
                      const std::vector<std::string>& texts2, double tau,
                      double epsilon, int coordinate_samples,
                      std::uint64_t seed) {
  std::vector<double> analytic;
  batch_loss_and_grad(encoder, texts1, texts2, tau, false, analytic);

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0,
                                                  encoder.parameter_count() - 1);
  double max_rel = 0.0;
  for (int s = 0; s < coordinate_samples; ++s) {
    const std::size_t i = pick(rng);
    const double saved = encoder.parameters()[i];
    encoder.parameters()[i] = saved + epsilon;
    const double up = info_nce_loss(encoder.encode(texts1),
                                    encoder.encode(texts2), tau);
    encoder.parameters()[i] = saved - epsilon;
    const double down = info_nce_loss(encoder.encode(texts1),
                                      encoder.encode(texts2), tau);
    encoder.parameters()[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
  }
  return max_rel;
}

}  // namespace univar
