#include "univar/views.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "univar/errors.hpp"

namespace univar {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Draws k distinct indices from [0, n) without replacement (partial
// Fisher-Yates over a scratch index vector).
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t>& scratch,
                                                  std::size_t k, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(
        uniform_int(rng, static_cast<int>(i),
                    static_cast<int>(scratch.size()) - 1));
    std::swap(scratch[i], scratch[j]);
    picked.push_back(scratch[i]);
  }
  return picked;
}

}  // namespace

std::string serialize_view_text(const std::vector<std::string>& qa_ids,
                                const Corpus& corpus,
                                std::size_t char_budget) {
  std::unordered_map<std::string, const QAPair*> index;
  index.reserve(corpus.qa_pairs.size());
  for (const auto& qa : corpus.qa_pairs) index.emplace(qa.qa_id, &qa);

  std::string out;
  for (const auto& id : qa_ids) {
    auto it = index.find(id);
    if (it == index.end())
      throw DanglingReference("qa_id not in corpus: " + id);
    const QAPair& qa = *it->second;
    std::string block = "Q: " + qa.question_en + "\nA: " + qa.answer_en;
    if (out.empty()) {
      out = std::move(block);
      continue;
    }
    if (out.size() + 2 + block.size() > char_budget) break;
    out += "\n\n";
    out += block;
  }
  return out;
}

ViewPair sample_view_pair(const std::vector<const QAPair*>& pool,
                          const Corpus& corpus, const SamplerConfig& config,
                          Rng& rng) {
  const int n = static_cast<int>(pool.size());
  if (n < 2) throw InsufficientPool("view pool needs >= 2 QA pairs, got " +
                                    std::to_string(n));
  for (const QAPair* qa : pool) {
    if (qa->value_id != pool.front()->value_id)
      throw InsufficientPool("view pool mixes value ids");
  }

  std::vector<std::size_t> scratch(pool.size());
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = i;

  const int n1 = uniform_int(rng, 1, std::min(config.lambda, n - 1));
  auto idx1 = draw_without_replacement(scratch, static_cast<std::size_t>(n1), rng);

  std::vector<std::size_t> idx2;
  if (config.disjoint_views) {
    // Remaining indices live past position n1 in scratch after the first draw.
    std::vector<std::size_t> rest(scratch.begin() + n1, scratch.end());
    const int n2 = uniform_int(rng, 1, std::min(config.lambda, n - n1));
    idx2 = draw_without_replacement(rest, static_cast<std::size_t>(n2), rng);
  } else {
    std::vector<std::size_t> all(pool.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const int n2 = uniform_int(rng, 1, std::min(config.lambda, n));
    idx2 = draw_without_replacement(all, static_cast<std::size_t>(n2), rng);
  }

  auto build = [&](const std::vector<std::size_t>& idx) {
    View v;
    v.value_id = pool.front()->value_id;
    for (std::size_t i : idx) v.qa_ids.push_back(pool[i]->qa_id);
    v.text = serialize_view_text(v.qa_ids, corpus, config.char_budget);
    return v;
  };
  return {build(idx1), build(idx2)};
}

std::vector<ValueID> eligible_value_ids(const Corpus& corpus) {
  std::map<ValueID, int> counts;
  for (const auto& qa : corpus.qa_pairs) ++counts[qa.value_id];
  std::vector<ValueID> ids;
  for (const auto& [id, c] : counts)
    if (c >= 2) ids.push_back(id);
  return ids;
}

std::vector<ViewPair> make_training_batch(const Corpus& corpus,
                                          const SamplerConfig& config,
                                          Rng& rng) {
  std::vector<ValueID> ids = eligible_value_ids(corpus);
  const int b = config.batch_size;
  if (static_cast<int>(ids.size()) < b)
    throw InsufficientCorpus("need " + std::to_string(b) +
                             " value ids with >= 2 QA pairs, have " +
                             std::to_string(ids.size()));

  std::map<ValueID, std::vector<const QAPair*>> pools;
  for (const auto& qa : corpus.qa_pairs) pools[qa.value_id].push_back(&qa);

  std::vector<std::size_t> scratch(ids.size());
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = i;
  auto chosen = draw_without_replacement(scratch, static_cast<std::size_t>(b), rng);

  std::vector<ViewPair> batch;
  batch.reserve(static_cast<std::size_t>(b));
  for (std::size_t i : chosen)
    batch.push_back(sample_view_pair(pools[ids[i]], corpus, config, rng));
  return batch;
}

}  // namespace univar
