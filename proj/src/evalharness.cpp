#include "univar/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "univar/errors.hpp"

namespace univar {

namespace {

// Reference indices ranked by descending similarity to the query; similarity
// ties break toward the lower index.
std::vector<std::size_t> rank_by_similarity(
    const std::vector<EvalItem>& reference, const Embedding& query) {
  std::vector<double> sims(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i)
    sims[i] = dot(reference[i].embedding, query);
  std::vector<std::size_t> order(reference.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  return order;
}

}  // namespace

ValueID knn_classify(const std::vector<EvalItem>& reference,
                     const Embedding& query, int k) {
  if (reference.empty()) throw EmptyReference("empty kNN reference set");
  if (k < 1 || k > static_cast<int>(reference.size()))
    throw EmptyReference("k must be in [1, |reference|], got " +
                         std::to_string(k));

  const auto order = rank_by_similarity(reference, query);

  std::map<ValueID, int> votes;
  std::map<ValueID, std::size_t> best_rank;
  for (std::size_t r = 0; r < static_cast<std::size_t>(k); ++r) {
    const ValueID& label = reference[order[r]].label;
    ++votes[label];
    if (!best_rank.count(label)) best_rank[label] = r;
  }

  ValueID winner;
  int winner_votes = -1;
  std::size_t winner_rank = reference.size();
  for (const auto& [label, n] : votes) {
    const std::size_t rank = best_rank[label];
    if (n > winner_votes || (n == winner_votes && rank < winner_rank)) {
      winner = label;
      winner_votes = n;
      winner_rank = rank;
    }
  }
  return winner;
}

KnnMetrics knn_evaluate(const std::vector<EvalItem>& reference,
                        const std::vector<EvalItem>& queries, int k) {
  if (reference.empty()) throw EmptyReference("empty kNN reference set");
  if (queries.empty()) throw EmptyQueries("empty kNN query set");

  std::map<ValueID, int> tp, fp, fn;
  int correct = 0;
  for (const auto& q : queries) {
    const ValueID pred = knn_classify(reference, q.embedding, k);
    if (pred == q.label) {
      ++correct;
      ++tp[q.label];
    } else {
      ++fp[pred];
      ++fn[q.label];
    }
  }

  // Macro-F1 over labels present in the truth.
  std::map<ValueID, bool> truth_labels;
  for (const auto& q : queries) truth_labels[q.label] = true;
  double f1_sum = 0.0;
  for (const auto& [label, _] : truth_labels) {
    const double t = tp[label];
    const double denom = 2.0 * t + fp[label] + fn[label];
    f1_sum += denom > 0.0 ? 2.0 * t / denom : 0.0;
  }

  KnnMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(queries.size());
  m.macro_f1 = f1_sum / static_cast<double>(truth_labels.size());
  return m;
}

std::map<ValueID, double> per_label_accuracy(
    const std::vector<EvalItem>& reference,
    const std::vector<EvalItem>& queries, int k) {
  if (reference.empty()) throw EmptyReference("empty kNN reference set");
  if (queries.empty()) throw EmptyQueries("empty kNN query set");
  std::map<ValueID, int> total, correct;
  for (const auto& q : queries) {
    ++total[q.label];
    if (knn_classify(reference, q.embedding, k) == q.label) ++correct[q.label];
  }
  std::map<ValueID, double> acc;
  for (const auto& [label, n] : total)
    acc[label] = static_cast<double>(correct[label]) / static_cast<double>(n);
  return acc;
}

std::map<int, double> linear_probe(const std::vector<EvalItem>& train,
                                   const std::vector<EvalItem>& test,
                                   const ProbeConfig& config,
                                   const std::vector<int>& ks) {
  if (train.empty() || test.empty())
    throw EmptyQueries("probe needs non-empty train and test splits");

  std::vector<ValueID> labels;
  for (const auto& item : train) labels.push_back(item.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::map<ValueID, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i)
    label_index[labels[i]] = static_cast<int>(i);
  for (const auto& item : test) {
    if (!label_index.count(item.label))
      throw LabelMismatch("test label unseen in train: " + item.label.str());
  }

  const int c = static_cast<int>(labels.size());
  const int d = static_cast<int>(train[0].embedding.values.size());
  std::vector<double> w(static_cast<std::size_t>(c) * d, 0.0);
  std::vector<double> b(static_cast<std::size_t>(c), 0.0);
  std::vector<double> mw(w.size(), 0.0), vw(w.size(), 0.0);
  std::vector<double> mb(b.size(), 0.0), vb(b.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
  int t = 0;

  auto logits_of = [&](const Embedding& e) {
    std::vector<double> logits(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
      double acc = b[static_cast<std::size_t>(i)];
      const double* row = w.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) acc += row[j] * e.values[static_cast<std::size_t>(j)];
      logits[static_cast<std::size_t>(i)] = acc;
    }
    return logits;
  };

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);

      std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
      for (std::size_t s = start; s < end; ++s) {
        const EvalItem& item = train[order[s]];
        std::vector<double> logits = logits_of(item.embedding);
        const double m = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double& l : logits) {
          l = std::exp(l - m);
          z += l;
        }
        const int y = label_index[item.label];
        for (int i = 0; i < c; ++i) {
          const double g =
              inv * (logits[static_cast<std::size_t>(i)] / z - (i == y ? 1.0 : 0.0));
          gb[static_cast<std::size_t>(i)] += g;
          double* grow = gw.data() + static_cast<std::size_t>(i) * d;
          for (int j = 0; j < d; ++j)
            grow[j] += g * item.embedding.values[static_cast<std::size_t>(j)];
        }
      }

      ++t;
      const double bc1 = 1.0 - std::pow(beta1, t);
      const double bc2 = 1.0 - std::pow(beta2, t);
      auto update = [&](std::vector<double>& p, std::vector<double>& m1,
                        std::vector<double>& m2, const std::vector<double>& g,
                        double decay) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          m1[i] = beta1 * m1[i] + (1.0 - beta1) * g[i];
          m2[i] = beta2 * m2[i] + (1.0 - beta2) * g[i] * g[i];
          p[i] -= config.learning_rate *
                  ((m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps) + decay * p[i]);
        }
      };
      update(w, mw, vw, gw, weight_decay);
      update(b, mb, vb, gb, 0.0);
    }
  }

  std::map<int, double> acc_at;
  for (int k : ks) acc_at[k] = 0.0;
  for (const auto& item : test) {
    std::vector<double> logits = logits_of(item.embedding);
    std::vector<int> rank(static_cast<std::size_t>(c));
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(), [&](int a, int bdx) {
      if (logits[static_cast<std::size_t>(a)] != logits[static_cast<std::size_t>(bdx)])
        return logits[static_cast<std::size_t>(a)] > logits[static_cast<std::size_t>(bdx)];
      return a < bdx;
    });
    const int y = label_index[item.label];
    int pos = 0;
    while (rank[static_cast<std::size_t>(pos)] != y) ++pos;
    for (int k : ks)
      if (pos < k) acc_at[k] += 1.0;
  }
  for (auto& [_, v] : acc_at) v /= static_cast<double>(test.size());
  return acc_at;
}

BaselineScores baseline_scores(int label_count, const std::vector<int>& ks) {
  if (label_count < 1) throw DimensionError("label count must be >= 1");
  BaselineScores s;
  s.random_accuracy = 1.0 / static_cast<double>(label_count);
  for (int k : ks)
    s.majority_at_k[k] =
        std::min(1.0, static_cast<double>(k) / static_cast<double>(label_count));
  return s;
}

double balanced_average(
    const std::map<std::string, std::vector<double>>& per_corpus_label_accuracies) {
  if (per_corpus_label_accuracies.empty())
    throw EmptyQueries("balanced average needs at least one corpus report");
  double total = 0.0;
  for (const auto& [corpus, accs] : per_corpus_label_accuracies) {
    if (accs.empty())
      throw EmptyQueries("corpus " + corpus + " has no label accuracies");
    total += std::accumulate(accs.begin(), accs.end(), 0.0) /
             static_cast<double>(accs.size());
  }
  return total / static_cast<double>(per_corpus_label_accuracies.size());
}

ControlReport control_eval(const std::vector<EvalItem>& nonvalue_items,
                           const std::vector<EvalItem>& value_items,
                           const std::vector<EvalItem>& reference, int k) {
  ControlReport r;
  r.value_metrics = knn_evaluate(reference, value_items, k);
  r.nonvalue_metrics = knn_evaluate(reference, nonvalue_items, k);
  r.gap = r.value_metrics.accuracy - r.nonvalue_metrics.accuracy;
  return r;
}

std::string translationese_input(TranslationeseMode mode,
                                 const std::string& english_translation,
                                 const std::string& machine_translated_text) {
  if (english_translation.empty())
    throw EmptyText("english translation must be non-empty");
  if (mode == TranslationeseMode::TextOnly) return english_translation;
  if (machine_translated_text.empty())
    throw EmptyText("machine-translated text must be non-empty");
  return "What is the paraphrase of " + machine_translated_text +
         "?\nA: " + english_translation;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["knn"] = {{"accuracy", report.knn_accuracy},
              {"macro_f1", report.knn_macro_f1}};
  nlohmann::json probe;
  for (const auto& [k, v] : report.probe_acc_at)
    probe["acc@" + std::to_string(k)] = v;
  j["linear_probe"] = probe;
  nlohmann::json per_corpus;
  for (const auto& [tag, m] : report.per_corpus)
    per_corpus[tag] = {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
  j["per_corpus"] = per_corpus;
  j["balanced_average"] = report.balanced_average;
  nlohmann::json maj;
  for (const auto& [k, v] : report.baselines.majority_at_k)
    maj["acc@" + std::to_string(k)] = v;
  j["baselines"] = {{"random", report.baselines.random_accuracy},
                    {"majority", maj}};
  return j.dump(2);
}

}  // namespace univar
