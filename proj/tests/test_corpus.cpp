#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "univar/corpus.hpp"
#include "univar/errors.hpp"
#include "univar/prompts.hpp"
#include "univar/synthetic.hpp"

using namespace univar;

namespace {

std::string numbered_list(int n, const std::string& stem) {
  std::ostringstream out;
  for (int i = 1; i <= n; ++i) out << i << ". " << stem << " " << i << "\n";
  return out.str();
}

ReferenceValue test_value() {
  return {"vsm.individualism_collectivism", "Individualism vs Collectivism",
          SourceTaxonomy::VSM};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CountingTranslator : TranslatorClient {
  int calls = 0;
  std::string translate(const std::string& text, const std::string& src,
                        const std::string& tgt) override {
    ++calls;
    return "[" + src + ">" + tgt + "] " + text;
  }
  bool concurrent_safe() const override { return true; }
};

struct TestFactory : LlmClientFactory {
  std::uint64_t seed;
  explicit TestFactory(std::uint64_t s) : seed(s) {}
  std::shared_ptr<TextGenClient> client_for(const std::string& llm) override {
    return std::make_shared<ScriptedGenClient>(seed, 50, 4, llm);
  }
};

Corpus tiny_corpus() {
  SyntheticSpec spec;
  spec.value_id_count = 3;
  spec.qa_per_value = 3;
  spec.seed = 5;
  return make_synthetic_corpus(spec);
}

}  // namespace

TEST_CASE("numbered list parsing accepts dot paren colon prefixes") {
  const std::string text = "1. first\n2) second\n3: third\n";
  auto items = parse_numbered_list(text, 3);
  REQUIRE(items.size() == 3);
  CHECK(items[0] == "first");
  CHECK(items[1] == "second");
  CHECK(items[2] == "third");

  CHECK_THROWS_AS(parse_numbered_list("- first\n- second\n", 2), ParseError);
  CHECK_THROWS_AS(parse_numbered_list("1. only one\n", 2), ParseError);
}

TEST_CASE("generate_questions yields n records from a numbered list") {
  int scenario_calls = 0;
  LambdaTextGenClient client([&](const std::string& prompt) -> std::string {
    if (prompt.rfind("Create ", 0) == 0) {
      ++scenario_calls;
      CHECK(prompt.find("Individualism vs Collectivism") != std::string::npos);
      return numbered_list(50, "scenario");
    }
    return "Should you do it?";
  });

  RequestLog log;
  auto records = generate_questions(test_value(), client, 50, &log);
  REQUIRE(records.size() == 50);
  CHECK(scenario_calls == 1);
  for (const auto& r : records) {
    CHECK(r.paraphrase_index == 0);
    CHECK(r.language == "eng");
    CHECK(r.value == "vsm.individualism_collectivism");
    CHECK_FALSE(r.text.empty());
  }
  // The filled template goes out verbatim, modulo the value-name slot.
  const std::string expected = prompts::fill(
      prompts::kScenarioTemplate, "{VALUE}", "Individualism vs Collectivism");
  CHECK(log.prompts.front() == expected);
}

TEST_CASE("generate_questions with n=0 never invokes the client") {
  int calls = 0;
  LambdaTextGenClient client([&](const std::string&) {
    ++calls;
    return std::string("1. x");
  });
  auto records = generate_questions(test_value(), client, 0);
  CHECK(records.empty());
  CHECK(calls == 0);
}

TEST_CASE("generate_questions throws ParseError on unnumbered prose") {
  LambdaTextGenClient client(
      [](const std::string&) { return std::string("Here are some thoughts."); });
  CHECK_THROWS_AS(generate_questions(test_value(), client, 3), ParseError);
}

TEST_CASE("paraphrase_and_expand arithmetic and indexing") {
  LambdaTextGenClient client([](const std::string&) {
    return std::string("para one\npara two\npara three\npara four\n");
  });

  std::vector<QuestionRecord> originals;
  for (int i = 0; i < 2; ++i)
    originals.push_back({"q" + std::to_string(i), "v", "text " + std::to_string(i),
                         0, "eng"});

  auto out = paraphrase_and_expand(originals, client, 4);
  REQUIRE(out.size() == 10);
  for (int i = 0; i < 2; ++i) {
    std::set<int> indices;
    for (const auto& r : out)
      if (r.question_id.rfind("q" + std::to_string(i), 0) == 0)
        indices.insert(r.paraphrase_index);
    CHECK(indices == std::set<int>{0, 1, 2, 3, 4});
  }

  SUBCASE("p=0 is the identity") {
    auto same = paraphrase_and_expand(originals, client, 0);
    CHECK(same == originals);
  }
  SUBCASE("expansion arithmetic holds for varied sizes") {
    for (int n : {1, 3, 7}) {
      for (int p : {0, 1, 4}) {
        std::vector<QuestionRecord> qs;
        for (int i = 0; i < n; ++i)
          qs.push_back({"s" + std::to_string(i), "v", "t", 0, "eng"});
        CHECK(paraphrase_and_expand(qs, client, p).size() ==
              static_cast<std::size_t>(n * (p + 1)));
      }
    }
  }
  SUBCASE("too few paraphrases is a ParseError") {
    LambdaTextGenClient thin(
        [](const std::string&) { return std::string("only one line"); });
    CHECK_THROWS_AS(paraphrase_and_expand(originals, thin, 4), ParseError);
  }
  SUBCASE("non-original input is rejected") {
    std::vector<QuestionRecord> bad{{"q9.p1", "v", "t", 1, "eng"}};
    CHECK_THROWS_AS(paraphrase_and_expand(bad, client, 4), ParseError);
  }
}

TEST_CASE("collect_qa counting and language skip rule") {
  std::vector<QuestionRecord> questions{{"q1", "v", "Should you share?", 0, "eng"},
                                        {"q2", "v", "Should you lead?", 0, "eng"}};
  Roster roster{{"llm0", {"eng", "zho"}}};
  TestFactory factory(3);
  CountingTranslator translator;

  auto result = collect_qa(questions, roster, factory, translator);
  REQUIRE(result.failures.empty());
  REQUIRE(result.qa_pairs.size() == 4);

  std::set<std::pair<std::string, std::string>> ids;
  for (const auto& qa : result.qa_pairs)
    ids.insert({qa.value_id.llm_name, qa.value_id.language});
  CHECK(ids == std::set<std::pair<std::string, std::string>>{{"llm0", "eng"},
                                                             {"llm0", "zho"}});
  // eng slots: zero translator calls. zho slots: 3 each (out, question back,
  // answer back) for 2 questions.
  CHECK(translator.calls == 6);

  SUBCASE("canonical output ordering") {
    for (std::size_t i = 1; i < result.qa_pairs.size(); ++i) {
      const auto& a = result.qa_pairs[i - 1];
      const auto& b = result.qa_pairs[i];
      CHECK(std::tie(a.question_id, a.value_id.llm_name, a.value_id.language) <=
            std::tie(b.question_id, b.value_id.llm_name, b.value_id.language));
    }
  }
}

TEST_CASE("collect_qa rejects an empty roster language list") {
  std::vector<QuestionRecord> questions{{"q1", "v", "t?", 0, "eng"}};
  Roster roster{{"llm0", {}}};
  TestFactory factory(1);
  IdentityTranslator translator;
  CHECK_THROWS_AS(collect_qa(questions, roster, factory, translator),
                  RosterError);
}

TEST_CASE("collect_qa collects client failures instead of aborting") {
  struct FlakyFactory : LlmClientFactory {
    std::shared_ptr<TextGenClient> client_for(const std::string& llm) override {
      return std::make_shared<LambdaTextGenClient>(
          [llm](const std::string& prompt) -> std::string {
            if (prompt.find("fail") != std::string::npos)
              throw ClientError("scripted outage");
            return "answer from " + llm;
          });
    }
  };
  std::vector<QuestionRecord> questions{{"q1", "v", "please fail", 0, "eng"},
                                        {"q2", "v", "please answer", 0, "eng"}};
  Roster roster{{"llm0", {"eng"}}};
  FlakyFactory factory;
  IdentityTranslator translator;
  auto result = collect_qa(questions, roster, factory, translator);
  CHECK(result.qa_pairs.size() == 1);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].question_id == "q1");
}

TEST_CASE("collect_qa exclusion list drops questions at assembly") {
  std::vector<QuestionRecord> questions{{"q1", "v", "a?", 0, "eng"},
                                        {"q2", "v", "b?", 0, "eng"}};
  Roster roster{{"llm0", {"eng"}}};
  TestFactory factory(3);
  IdentityTranslator translator;
  CollectOptions options;
  options.excluded_question_ids = {"q1"};
  auto result = collect_qa(questions, roster, factory, translator, options);
  REQUIRE(result.qa_pairs.size() == 1);
  CHECK(result.qa_pairs[0].question_id == "q2");
}

TEST_CASE("concurrent collection matches sequential output") {
  std::vector<QuestionRecord> questions;
  for (int i = 0; i < 12; ++i)
    questions.push_back({"q" + std::to_string(i), "v",
                         "question " + std::to_string(i) + "?", 0, "eng"});
  Roster roster{{"llm0", {"eng", "zho"}}, {"llm1", {"eng"}}};
  TestFactory factory(9);
  IdentityTranslator translator;

  auto seq = collect_qa(questions, roster, factory, translator);
  CollectOptions options;
  options.workers = 4;
  auto par = collect_qa(questions, roster, factory, translator, options);
  CHECK(seq.qa_pairs == par.qa_pairs);
}

TEST_CASE("corpus save/load round trip preserves structure and order") {
  Corpus corpus = tiny_corpus();
  REQUIRE(corpus.qa_pairs.size() == 9);
  const std::string path = "test_corpus_roundtrip.jsonl";
  save_corpus(corpus, path);
  Corpus loaded = load_corpus(path);
  CHECK(loaded == corpus);
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
}

TEST_CASE("empty corpus round trips") {
  Corpus corpus;
  const std::string path = "test_corpus_empty.jsonl";
  save_corpus(corpus, path);
  Corpus loaded = load_corpus(path);
  CHECK(loaded.qa_pairs.empty());
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
}

TEST_CASE("loading rejects a value language outside the roster") {
  Corpus corpus = tiny_corpus();
  const std::string path = "test_corpus_badlang.jsonl";
  save_corpus(corpus, path);
  // Corrupt one line: swap the language to something outside the roster.
  std::string body = read_file(path);
  const std::string from = "\"value_lang\":\"eng\"";
  const auto hit = body.find(from);
  REQUIRE(hit != std::string::npos);
  body.replace(hit, from.size(), "\"value_lang\":\"zzq\"");
  std::ofstream(path, std::ios::binary) << body;
  CHECK_THROWS_AS(load_corpus(path), SchemaError);
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
}

TEST_CASE("loading rejects unknown fields") {
  const std::string path = "test_corpus_unknownfield.jsonl";
  std::ofstream(path, std::ios::binary)
      << R"({"qa_id":"a","question_id":"q","value_llm":"m","value_lang":"eng",)"
      << R"("question_en":"x","answer_en":"y","original_language":"eng",)"
      << R"("corpus_tag":"train","paraphrase_index":0,"extra":1})"
      << "\n";
  CHECK_THROWS_AS(load_corpus(path), SchemaError);
  std::remove(path.c_str());
}

TEST_CASE("validate_corpus enforces provenance closure") {
  Corpus corpus = tiny_corpus();
  corpus.qa_pairs[0].question_id = "missing.question";
  CHECK_THROWS_AS(validate_corpus(corpus), SchemaError);
}

TEST_CASE("scripted pipeline is byte-deterministic across runs") {
  auto build = [](const std::string& path) {
    ReferenceValue value = test_value();
    ScriptedGenClient gen(77, 4, 2, "generator");
    auto questions = generate_questions(value, gen, 4);
    auto expanded = paraphrase_and_expand(questions, gen, 2);
    Roster roster{{"llm0", {"eng"}}};
    TestFactory factory(77);
    IdentityTranslator translator;
    Corpus corpus;
    corpus.registry = {value};
    corpus.roster = roster;
    corpus.questions = expanded;
    corpus.qa_pairs =
        collect_qa(expanded, roster, factory, translator).qa_pairs;
    save_corpus(corpus, path);
  };
  build("det_a.jsonl");
  build("det_b.jsonl");
  CHECK(read_file("det_a.jsonl") == read_file("det_b.jsonl"));
  CHECK(read_file("det_a.jsonl.meta.json") == read_file("det_b.jsonl.meta.json"));
  for (const char* p : {"det_a.jsonl", "det_b.jsonl", "det_a.jsonl.meta.json",
                        "det_b.jsonl.meta.json"})
    std::remove(p);
}

TEST_CASE("prompt resource files match the embedded templates") {
  auto strip_trailing_newline = [](std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
  };
  const std::string dir = std::string(UNIVAR_SOURCE_DIR) + "/prompts/";
  CHECK(strip_trailing_newline(read_file(dir + "scenario.txt")) ==
        std::string(prompts::kScenarioTemplate));
  CHECK(strip_trailing_newline(read_file(dir + "question_from_scenario.txt")) ==
        std::string(prompts::kQuestionFromScenarioTemplate));
  CHECK(strip_trailing_newline(read_file(dir + "paraphrase.txt")) ==
        std::string(prompts::kParaphraseTemplate));
}
