#ifndef UNIVAR_CORPUS_HPP
#define UNIVAR_CORPUS_HPP

#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "univar/clients.hpp"
#include "univar/types.hpp"

namespace univar {

// Records every prompt sent through the pipeline, in issue order.
struct RequestLog {
  std::vector<std::string> prompts;
};

// One client failure collected during batch QA collection.
struct CollectFailure {
  std::string question_id;
  std::string llm_name;
  std::string language;
  std::string message;
};

struct CollectResult {
  std::vector<QAPair> qa_pairs;
  std::vector<CollectFailure> failures;
};

// Factory: one generation client per LLM name in the roster.
class LlmClientFactory {
 public:
  virtual ~LlmClientFactory() = default;
  virtual std::shared_ptr<TextGenClient> client_for(
      const std::string& llm_name) = 0;
};

// Generates n value-eliciting questions for one reference value: a scenario
// prompt producing a numbered list, then one question prompt per scenario.
// Throws ParseError when the scenario response does not split into n numbered
// items; ClientError propagates from the client.
std::vector<QuestionRecord> generate_questions(const ReferenceValue& value,
                                               TextGenClient& client, int n,
                                               RequestLog* log = nullptr);

// Expands each original (paraphrase_index = 0) into itself plus p paraphrases
// indexed 1..p. Output size is |questions| * (p + 1).
std::vector<QuestionRecord> paraphrase_and_expand(
    const std::vector<QuestionRecord>& questions, TextGenClient& client, int p,
    RequestLog* log = nullptr);

struct CollectOptions {
  CorpusTag corpus_tag = CorpusTag::Train;
  // Question ids dropped before collection (manual filtering step).
  std::unordered_set<std::string> excluded_question_ids;
  // Worker count for concurrent collection; 1 = sequential. Clients that are
  // not concurrent_safe() are wrapped in a serializing adapter.
  int workers = 1;
  RequestLog* log = nullptr;
};

// For each (question, llm, supported language): translate the question into
// the target language (skipped when it is already English), answer with that
// LLM, translate both sides back to English. Client failures are collected
// into the result, not fatal. Output ordering is canonical: sorted by
// (question_id, llm_name, language) regardless of completion order.
CollectResult collect_qa(const std::vector<QuestionRecord>& questions,
                         const Roster& roster, LlmClientFactory& llm_factory,
                         TranslatorClient& translator,
                         const CollectOptions& options = {});

// Splits a numbered-list response ("1.", "1)" or "1:" prefixes) into items.
// Throws ParseError when the text does not contain exactly expected_count
// numbered items.
std::vector<std::string> parse_numbered_list(const std::string& text,
                                             int expected_count);

// Checks id uniqueness, roster resolution, language codes, and provenance
// links. Throws SchemaError on the first violation.
void validate_corpus(const Corpus& corpus);

// Line-delimited persistence: one UTF-8 JSON object per QA pair at `path`,
// registry/roster/questions in a sidecar at `path` + ".meta.json".
// load(save(c)) is structurally equal to c, including ordering.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Loads the editable reference-value registry (JSON array of objects with
// value_id, name, source_taxonomy).
std::vector<ReferenceValue> load_registry(const std::string& path);

}  // namespace univar

#endif
