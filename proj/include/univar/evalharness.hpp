#ifndef UNIVAR_EVALHARNESS_HPP
#define UNIVAR_EVALHARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "univar/encoder.hpp"
#include "univar/types.hpp"

namespace univar {

struct EvalItem {
  Embedding embedding;
  ValueID label;
  CorpusTag corpus_tag = CorpusTag::Custom;
};

struct KnnMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct ProbeConfig {
  double learning_rate = 2e-3;
  int batch_size = 512;
  int epochs = 20;
  std::uint64_t seed = 0;
};

struct BaselineScores {
  double random_accuracy = 0.0;
  std::map<int, double> majority_at_k;
};

struct EvalReport {
  double knn_accuracy = 0.0;
  double knn_macro_f1 = 0.0;
  std::map<int, double> probe_acc_at;  // keys 1, 5, 10
  std::map<std::string, KnnMetrics> per_corpus;
  double balanced_average = 0.0;
  BaselineScores baselines;
};

// Plurality vote over the k nearest reference items by cosine similarity.
// Similarity ties break toward the lower item index; vote ties break toward
// the label whose nearest member ranks highest.
ValueID knn_classify(const std::vector<EvalItem>& reference,
                     const Embedding& query, int k);

// Accuracy plus macro-F1 (unweighted mean of per-label F1 over labels present
// in the truth).
KnnMetrics knn_evaluate(const std::vector<EvalItem>& reference,
                        const std::vector<EvalItem>& queries, int k);

// Single affine layer on frozen embeddings, AdamW + softmax cross-entropy.
// Returns acc@k for each requested k (true label within the top-k logits,
// logit ties broken by ascending label index).
std::map<int, double> linear_probe(const std::vector<EvalItem>& train,
                                   const std::vector<EvalItem>& test,
                                   const ProbeConfig& config,
                                   const std::vector<int>& ks = {1, 5, 10});

// Chance heuristics under label-balanced evaluation: random = 1/C,
// majority@k = min(1, k/C).
BaselineScores baseline_scores(int label_count, const std::vector<int>& ks);

// Per-corpus macro (per-label) accuracy, then an unweighted mean across
// corpora.
double balanced_average(const std::map<std::string, std::vector<double>>&
                            per_corpus_label_accuracies);

// Per-label accuracy vector for a kNN run, ordered by label.
std::map<ValueID, double> per_label_accuracy(
    const std::vector<EvalItem>& reference,
    const std::vector<EvalItem>& queries, int k);

struct ControlReport {
  KnnMetrics value_metrics;
  KnnMetrics nonvalue_metrics;
  double gap = 0.0;  // value accuracy minus non-value accuracy
};

ControlReport control_eval(const std::vector<EvalItem>& nonvalue_items,
                           const std::vector<EvalItem>& value_items,
                           const std::vector<EvalItem>& reference, int k);

enum class TranslationeseMode { TextOnly, Paraphrase };

// Builds the source-language identification input: either the English
// translation alone, or the paraphrase-question form combining both texts.
std::string translationese_input(TranslationeseMode mode,
                                 const std::string& english_translation,
                                 const std::string& machine_translated_text);

// Table-style report serialization (JSON document).
std::string report_to_json(const EvalReport& report);

}  // namespace univar

#endif
