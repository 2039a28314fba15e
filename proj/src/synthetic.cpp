#include "univar/synthetic.hpp"

#include <random>
#include <sstream>

#include "univar/encoder.hpp"

namespace univar {

namespace {

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::string vocab_token(const std::string& family, int index) {
  return family + "word" + std::to_string(index);
}

// Answer text: `count` tokens from the family vocabulary, chosen by a rng
// keyed on (seed, family, key) only.
std::string templated_answer(std::uint64_t seed, const std::string& family,
                             const std::string& key, int vocab_size,
                             int count) {
  std::mt19937_64 rng(seed ^ ngram_hash(seed, family + "\x1f" + key));
  std::uniform_int_distribution<int> pick(0, vocab_size - 1);
  std::ostringstream out;
  out << "I believe";
  for (int i = 0; i < count; ++i) out << ' ' << vocab_token(family, pick(rng));
  out << '.';
  return out.str();
}

}  // namespace

ScriptedGenClient::ScriptedGenClient(std::uint64_t seed, int list_items,
                                     int paraphrase_count, std::string voice)
    : seed_(seed),
      list_items_(list_items),
      paraphrase_count_(paraphrase_count),
      voice_(std::move(voice)) {}

std::string ScriptedGenClient::complete(const std::string& prompt) {
  const std::uint64_t h = ngram_hash(seed_, prompt);
  if (starts_with(prompt, "Create ")) {
    std::ostringstream out;
    for (int i = 1; i <= list_items_; ++i)
      out << i << ". scenario " << (h % 1000) << " variant " << i << "\n";
    return out.str();
  }
  if (starts_with(prompt, "Write ")) {
    std::ostringstream out;
    for (int i = 1; i <= paraphrase_count_; ++i)
      out << "paraphrase " << i << " of item " << (h % 1000) << "\n";
    return out.str();
  }
  if (starts_with(prompt, "Given a premise")) {
    return "Should you act on case " + std::to_string(h % 1000) + "?";
  }
  // Anything else is a question to answer in this client's voice.
  return templated_answer(seed_, voice_, prompt, 16, 10);
}

std::shared_ptr<TextGenClient> ScriptedClientFactory::client_for(
    const std::string& llm_name) {
  return std::make_shared<ScriptedGenClient>(seed_, 50, 4, llm_name);
}

std::vector<ValueID> synthetic_value_ids(int count) {
  std::vector<ValueID> ids;
  for (int i = 0; i < count; ++i)
    ids.push_back({"llm" + std::to_string(i), "eng"});
  return ids;
}

Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
  Corpus corpus;
  const std::vector<ValueID> ids = synthetic_value_ids(spec.value_id_count);
  for (const auto& id : ids) corpus.roster[id.llm_name] = {"eng"};

  corpus.registry.push_back({"v.synthetic", "Synthetic Probe Value",
                             SourceTaxonomy::Other});

  // Shared question bank: one question per slot, identical across value ids.
  for (int q = 0; q < spec.qa_per_value; ++q) {
    QuestionRecord rec;
    rec.question_id = "v.synthetic.q" + std::to_string(q + 1);
    rec.value = "v.synthetic";
    rec.text = "Should you choose option " + std::to_string(q + 1) + "?";
    rec.paraphrase_index = 0;
    rec.language = "eng";
    corpus.questions.push_back(rec);
  }

  for (const auto& id : ids) {
    const std::string family =
        spec.shared_vocabulary ? "shared" : id.llm_name;
    for (int q = 0; q < spec.qa_per_value; ++q) {
      const QuestionRecord& rec = corpus.questions[static_cast<std::size_t>(q)];
      QAPair qa;
      qa.qa_id = rec.question_id + "|" + id.llm_name + "|" + id.language;
      qa.question_id = rec.question_id;
      qa.value_id = id;
      qa.question_en = rec.text;
      qa.answer_en = templated_answer(spec.seed, family, qa.qa_id,
                                      spec.vocab_size, spec.answer_tokens);
      qa.original_language = "eng";
      qa.corpus_tag = spec.tag;
      qa.paraphrase_index = 0;
      corpus.qa_pairs.push_back(std::move(qa));
    }
  }
  return corpus;
}

}  // namespace univar
