#ifndef UNIVAR_VIEWS_HPP
#define UNIVAR_VIEWS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "univar/types.hpp"

namespace univar {

using Rng = std::mt19937_64;

// A set of 1..lambda QA pairs sharing one ValueID, plus its serialized text.
struct View {
  ValueID value_id;
  std::vector<std::string> qa_ids;
  std::string text;
};

struct ViewPair {
  View x1;
  View x2;
};

struct SamplerConfig {
  int lambda = 5;        // max QA pairs per view
  std::uint64_t seed = 0;
  int batch_size = 64;
  // Character budget for serialized view text; trailing whole QA blocks are
  // dropped to fit, a single block is never split.
  std::size_t char_budget = 8192;
  // When false, the two views may share QA pairs. Disjoint is the default.
  bool disjoint_views = true;
};

// Renders each QA pair as "Q: {question}\nA: {answer}", blocks joined by one
// blank line, qa order preserved. Throws DanglingReference for unknown qa_ids.
std::string serialize_view_text(const std::vector<std::string>& qa_ids,
                                const Corpus& corpus,
                                std::size_t char_budget = 8192);

// Draws two views over one value's pool: sizes independently uniform in
// [1, min(lambda, remaining)], QA pairs sampled without replacement,
// disjoint across the two sides. Throws InsufficientPool when |pool| < 2.
ViewPair sample_view_pair(const std::vector<const QAPair*>& pool,
                          const Corpus& corpus, const SamplerConfig& config,
                          Rng& rng);

// Samples exactly batch_size view pairs with pairwise-distinct value_ids.
// Only value_ids with at least 2 QA pairs are eligible; throws
// InsufficientCorpus when fewer than batch_size such ids exist.
std::vector<ViewPair> make_training_batch(const Corpus& corpus,
                                          const SamplerConfig& config,
                                          Rng& rng);

// Eligible value_ids (>= 2 QA pairs), in canonical sorted order.
std::vector<ValueID> eligible_value_ids(const Corpus& corpus);

}  // namespace univar

#endif
