#include "univar/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "univar/errors.hpp"
#include "univar/prompts.hpp"

namespace univar {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a leading "<k>." / "<k>)" / "<k>:" prefix; returns the item body or
// nullopt when the line is not a numbered item.
std::optional<std::string> strip_number_prefix(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])))
    ++i;
  if (i == 0 || i >= line.size()) return std::nullopt;
  char sep = line[i];
  if (sep != '.' && sep != ')' && sep != ':') return std::nullopt;
  return trim(line.substr(i + 1));
}

void require_fields(const json& obj, const std::vector<std::string>& fields,
                    const std::string& what) {
  if (!obj.is_object()) throw SchemaError(what + ": expected a JSON object");
  for (const auto& f : fields) {
    if (!obj.contains(f)) throw SchemaError(what + ": missing field " + f);
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(fields.begin(), fields.end(), it.key()) == fields.end())
      throw SchemaError(what + ": unknown field " + it.key());
  }
}

json qa_to_json(const QAPair& qa) {
  return json{{"qa_id", qa.qa_id},
              {"question_id", qa.question_id},
              {"value_llm", qa.value_id.llm_name},
              {"value_lang", qa.value_id.language},
              {"question_en", qa.question_en},
              {"answer_en", qa.answer_en},
              {"original_language", qa.original_language},
              {"corpus_tag", to_string(qa.corpus_tag)},
              {"paraphrase_index", qa.paraphrase_index}};
}

QAPair qa_from_json(const json& j) {
  require_fields(j,
                 {"qa_id", "question_id", "value_llm", "value_lang",
                  "question_en", "answer_en", "original_language",
                  "corpus_tag", "paraphrase_index"},
                 "qa pair");
  QAPair qa;
  qa.qa_id = j.at("qa_id").get<std::string>();
  qa.question_id = j.at("question_id").get<std::string>();
  qa.value_id = {j.at("value_llm").get<std::string>(),
                 j.at("value_lang").get<std::string>()};
  qa.question_en = j.at("question_en").get<std::string>();
  qa.answer_en = j.at("answer_en").get<std::string>();
  qa.original_language = j.at("original_language").get<std::string>();
  qa.corpus_tag = corpus_tag_from_string(j.at("corpus_tag").get<std::string>());
  qa.paraphrase_index = j.at("paraphrase_index").get<int>();
  return qa;
}

}  // namespace

std::vector<std::string> parse_numbered_list(const std::string& text,
                                             int expected_count) {
  std::vector<std::string> items;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto item = strip_number_prefix(trim(line));
    if (item && !item->empty()) items.push_back(*item);
  }
  if (static_cast<int>(items.size()) != expected_count) {
    throw ParseError("expected " + std::to_string(expected_count) +
                     " numbered items, found " + std::to_string(items.size()));
  }
  return items;
}

std::vector<QuestionRecord> generate_questions(const ReferenceValue& value,
                                               TextGenClient& client, int n,
                                               RequestLog* log) {
  std::vector<QuestionRecord> records;
  if (n <= 0) return records;

  const std::string scenario_prompt =
      prompts::fill(prompts::kScenarioTemplate, "{VALUE}", value.name);
  if (log) log->prompts.push_back(scenario_prompt);
  const std::string response = client.complete(scenario_prompt);
  const std::vector<std::string> scenarios = parse_numbered_list(response, n);

  records.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string question_prompt = prompts::fill(
        prompts::kQuestionFromScenarioTemplate, "{SITUATION}", scenarios[i]);
    if (log) log->prompts.push_back(question_prompt);
    const std::string question = trim(client.complete(question_prompt));
    if (question.empty())
      throw ParseError("empty question response for scenario " +
                       std::to_string(i + 1));
    QuestionRecord rec;
    rec.question_id = value.value_id + ".q" + std::to_string(i + 1);
    rec.value = value.value_id;
    rec.text = question;
    rec.paraphrase_index = 0;
    rec.language = "eng";
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<QuestionRecord> paraphrase_and_expand(
    const std::vector<QuestionRecord>& questions, TextGenClient& client, int p,
    RequestLog* log) {
  for (const auto& q : questions) {
    if (q.paraphrase_index != 0)
      throw ParseError("paraphrase input must be originals (index 0), got " +
                       q.question_id);
  }
  std::vector<QuestionRecord> out;
  out.reserve(questions.size() * static_cast<std::size_t>(p + 1));
  for (const auto& q : questions) {
    out.push_back(q);
    if (p == 0) continue;
    const std::string prompt =
        prompts::fill(prompts::kParaphraseTemplate, "{QUESTION}", q.text);
    if (log) log->prompts.push_back(prompt);
    const std::string response = client.complete(prompt);

    std::vector<std::string> lines;
    std::istringstream in(response);
    std::string line;
    while (std::getline(in, line)) {
      // Paraphrase responses may come back numbered or plain.
      std::string body = trim(line);
      if (auto stripped = strip_number_prefix(body)) body = *stripped;
      if (!body.empty()) lines.push_back(body);
    }
    if (static_cast<int>(lines.size()) < p) {
      throw ParseError("expected " + std::to_string(p) + " paraphrases for " +
                       q.question_id + ", found " +
                       std::to_string(lines.size()));
    }
    for (int k = 0; k < p; ++k) {
      QuestionRecord para = q;
      para.question_id = q.question_id + ".p" + std::to_string(k + 1);
      para.text = lines[static_cast<std::size_t>(k)];
      para.paraphrase_index = k + 1;
      out.push_back(std::move(para));
    }
  }
  return out;
}

namespace {

struct CollectTask {
  const QuestionRecord* question;
  std::string llm_name;
  std::string language;
  std::shared_ptr<TextGenClient> client;
};

struct TaskOutcome {
  std::optional<QAPair> qa;
  std::optional<CollectFailure> failure;
  std::vector<std::string> prompts;
};

TaskOutcome run_task(const CollectTask& task, TranslatorClient& translator,
                     CorpusTag tag) {
  TaskOutcome outcome;
  const QuestionRecord& q = *task.question;
  try {
    std::string localized = q.text;
    if (task.language != "eng")
      localized = translator.translate(q.text, "eng", task.language);
    outcome.prompts.push_back(localized);
    const std::string answer = task.client->complete(localized);

    QAPair qa;
    qa.qa_id = q.question_id + "|" + task.llm_name + "|" + task.language;
    qa.question_id = q.question_id;
    qa.value_id = {task.llm_name, task.language};
    qa.original_language = task.language;
    qa.corpus_tag = tag;
    qa.paraphrase_index = q.paraphrase_index;
    if (task.language == "eng") {
      qa.question_en = q.text;
      qa.answer_en = answer;
    } else {
      qa.question_en = translator.translate(localized, task.language, "eng");
      qa.answer_en = translator.translate(answer, task.language, "eng");
    }
    outcome.qa = std::move(qa);
  } catch (const ClientError& e) {
    outcome.failure =
        CollectFailure{q.question_id, task.llm_name, task.language, e.what()};
  }
  return outcome;
}

}  // namespace

CollectResult collect_qa(const std::vector<QuestionRecord>& questions,
                         const Roster& roster, LlmClientFactory& llm_factory,
                         TranslatorClient& translator,
                         const CollectOptions& options) {
  for (const auto& [llm, langs] : roster) {
    if (langs.empty())
      throw RosterError("roster entry for " + llm + " has no languages");
    for (const auto& lang : langs) {
      if (!valid_language_code(lang))
        throw RosterError("invalid language code '" + lang + "' for " + llm);
    }
  }

  // Canonical task order: (question_id, llm_name, language).
  std::vector<const QuestionRecord*> sorted_questions;
  for (const auto& q : questions) {
    if (options.excluded_question_ids.count(q.question_id)) continue;
    sorted_questions.push_back(&q);
  }
  std::sort(sorted_questions.begin(), sorted_questions.end(),
            [](const QuestionRecord* a, const QuestionRecord* b) {
              return a->question_id < b->question_id;
            });

  std::vector<CollectTask> tasks;
  for (const QuestionRecord* q : sorted_questions) {
    for (const auto& [llm, langs] : roster) {
      std::vector<std::string> sorted_langs = langs;
      std::sort(sorted_langs.begin(), sorted_langs.end());
      auto client = llm_factory.client_for(llm);
      if (!client) throw RosterError("no client for " + llm);
      for (const auto& lang : sorted_langs)
        tasks.push_back({q, llm, lang, client});
    }
  }

  const int workers = std::max(1, options.workers);
  std::vector<TaskOutcome> outcomes(tasks.size());

  TranslatorClient* tr = &translator;
  std::unique_ptr<SerializingTranslatorClient> tr_guard;
  if (workers > 1) {
    std::unordered_map<TextGenClient*, std::shared_ptr<TextGenClient>> wrapped;
    for (auto& task : tasks) {
      if (task.client->concurrent_safe()) continue;
      auto& slot = wrapped[task.client.get()];
      if (!slot) slot = std::make_shared<SerializingTextGenClient>(task.client);
      task.client = slot;
    }
    if (!translator.concurrent_safe()) {
      tr_guard = std::make_unique<SerializingTranslatorClient>(
          std::shared_ptr<TranslatorClient>(&translator, [](auto*) {}));
      tr = tr_guard.get();
    }
  }

  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      outcomes[i] = run_task(tasks[i], *tr, options.corpus_tag);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          outcomes[i] = run_task(tasks[i], *tr, options.corpus_tag);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  CollectResult result;
  for (const auto& outcome : outcomes) {
    if (options.log)
      for (const auto& p : outcome.prompts) options.log->prompts.push_back(p);
    if (outcome.qa) result.qa_pairs.push_back(*outcome.qa);
    if (outcome.failure) result.failures.push_back(*outcome.failure);
  }
  return result;
}

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> qa_ids;
  std::unordered_set<std::string> value_ids;
  std::unordered_set<std::string> question_ids;
  for (const auto& v : corpus.registry) {
    if (v.name.empty())
      throw SchemaError("reference value " + v.value_id + " has empty name");
    if (!value_ids.insert(v.value_id).second)
      throw SchemaError("duplicate reference value id " + v.value_id);
  }
  for (const auto& q : corpus.questions) {
    if (q.text.empty())
      throw SchemaError("question " + q.question_id + " has empty text");
    if (q.paraphrase_index < 0)
      throw SchemaError("question " + q.question_id +
                        " has negative paraphrase index");
    if (!valid_language_code(q.language))
      throw SchemaError("question " + q.question_id + " has bad language " +
                        q.language);
    question_ids.insert(q.question_id);
  }
  for (const auto& qa : corpus.qa_pairs) {
    if (!qa_ids.insert(qa.qa_id).second)
      throw SchemaError("duplicate qa_id " + qa.qa_id);
    if (qa.question_en.empty() || qa.answer_en.empty())
      throw SchemaError("qa " + qa.qa_id + " has empty question or answer");
    if (!valid_language_code(qa.value_id.language) ||
        !valid_language_code(qa.original_language))
      throw SchemaError("qa " + qa.qa_id + " has an invalid language code");
    auto it = corpus.roster.find(qa.value_id.llm_name);
    if (it == corpus.roster.end())
      throw SchemaError("qa " + qa.qa_id + " names unknown llm " +
                        qa.value_id.llm_name);
    if (std::find(it->second.begin(), it->second.end(),
                  qa.value_id.language) == it->second.end())
      throw SchemaError("qa " + qa.qa_id + " language " +
                        qa.value_id.language + " not in roster for " +
                        qa.value_id.llm_name);
    if (!corpus.questions.empty() && !question_ids.count(qa.question_id))
      throw SchemaError("qa " + qa.qa_id + " links missing question " +
                        qa.question_id);
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  validate_corpus(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");
  for (const auto& qa : corpus.qa_pairs) out << qa_to_json(qa).dump() << "\n";
  if (!out) throw IOError("write failed: " + path);
  out.close();

  json meta;
  meta["registry"] = json::array();
  for (const auto& v : corpus.registry)
    meta["registry"].push_back({{"value_id", v.value_id},
                                {"name", v.name},
                                {"source_taxonomy",
                                 to_string(v.source_taxonomy)}});
  meta["roster"] = corpus.roster;
  meta["questions"] = json::array();
  for (const auto& q : corpus.questions)
    meta["questions"].push_back({{"question_id", q.question_id},
                                 {"value", q.value},
                                 {"text", q.text},
                                 {"paraphrase_index", q.paraphrase_index},
                                 {"language", q.language}});
  std::ofstream meta_out(path + ".meta.json", std::ios::binary);
  if (!meta_out) throw IOError("cannot open " + path + ".meta.json");
  meta_out << meta.dump(2) << "\n";
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    corpus.qa_pairs.push_back(qa_from_json(j));
  }

  std::ifstream meta_in(path + ".meta.json", std::ios::binary);
  if (meta_in) {
    json meta;
    try {
      meta_in >> meta;
    } catch (const json::exception& e) {
      throw SchemaError(path + ".meta.json: " + std::string(e.what()));
    }
    for (const auto& v : meta.value("registry", json::array())) {
      require_fields(v, {"value_id", "name", "source_taxonomy"},
                     "registry entry");
      corpus.registry.push_back(
          {v.at("value_id").get<std::string>(),
           v.at("name").get<std::string>(),
           taxonomy_from_string(v.at("source_taxonomy").get<std::string>())});
    }
    if (meta.contains("roster"))
      corpus.roster = meta.at("roster").get<Roster>();
    for (const auto& q : meta.value("questions", json::array())) {
      require_fields(
          q, {"question_id", "value", "text", "paraphrase_index", "language"},
          "question record");
      corpus.questions.push_back({q.at("question_id").get<std::string>(),
                                  q.at("value").get<std::string>(),
                                  q.at("text").get<std::string>(),
                                  q.at("paraphrase_index").get<int>(),
                                  q.at("language").get<std::string>()});
    }
  } else {
    // No sidecar: synthesize a permissive roster so validation still covers
    // id uniqueness and language-code shape.
    for (const auto& qa : corpus.qa_pairs) {
      auto& langs = corpus.roster[qa.value_id.llm_name];
      if (std::find(langs.begin(), langs.end(), qa.value_id.language) ==
          langs.end())
        langs.push_back(qa.value_id.language);
    }
    for (auto& [_, langs] : corpus.roster)
      std::sort(langs.begin(), langs.end());
  }

  validate_corpus(corpus);
  return corpus;
}

std::vector<ReferenceValue> load_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + std::string(e.what()));
  }
  if (!j.is_array()) throw SchemaError(path + ": expected a JSON array");
  std::vector<ReferenceValue> registry;
  for (const auto& v : j) {
    require_fields(v, {"value_id", "name", "source_taxonomy"},
                   "registry entry");
    registry.push_back(
        {v.at("value_id").get<std::string>(), v.at("name").get<std::string>(),
         taxonomy_from_string(v.at("source_taxonomy").get<std::string>())});
  }
  return registry;
}

}  // namespace univar
