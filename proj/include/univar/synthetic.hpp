#ifndef UNIVAR_SYNTHETIC_HPP
#define UNIVAR_SYNTHETIC_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "univar/clients.hpp"
#include "univar/corpus.hpp"
#include "univar/types.hpp"

namespace univar {

// Deterministic scripted generation client. Output depends only on (seed,
// prompt), never on call order, so concurrent collection stays reproducible.
// Scenario prompts get a numbered list of `list_items` items, paraphrase
// prompts get `paraphrase_count` lines, question prompts get one question,
// and anything else is answered from the vocabulary keyed by `voice`.
class ScriptedGenClient : public TextGenClient {
 public:
  ScriptedGenClient(std::uint64_t seed, int list_items, int paraphrase_count,
                    std::string voice);

  std::string complete(const std::string& prompt) override;
  bool concurrent_safe() const override { return true; }

 private:
  std::uint64_t seed_;
  int list_items_;
  int paraphrase_count_;
  std::string voice_;
};

class ScriptedClientFactory : public LlmClientFactory {
 public:
  explicit ScriptedClientFactory(std::uint64_t seed) : seed_(seed) {}
  std::shared_ptr<TextGenClient> client_for(const std::string& llm_name) override;

 private:
  std::uint64_t seed_;
};

struct SyntheticSpec {
  int value_id_count = 8;
  int qa_per_value = 40;
  int answer_tokens = 12;   // tokens per generated answer
  int vocab_size = 16;      // per-value-id vocabulary size
  std::uint64_t seed = 0;
  CorpusTag tag = CorpusTag::Train;
  // When true, all value ids draw answers from one shared vocabulary, so
  // the answers carry no value signal (the non-value control).
  bool shared_vocabulary = false;
};

// Synthetic corpus with one distinct answer-template vocabulary per ValueID
// (or one shared vocabulary in control mode). Questions are common across
// value ids; the identification signal lives entirely in the answers.
Corpus make_synthetic_corpus(const SyntheticSpec& spec);

// The value ids the synthetic corpus uses, in canonical order.
std::vector<ValueID> synthetic_value_ids(int count);

}  // namespace univar

#endif
