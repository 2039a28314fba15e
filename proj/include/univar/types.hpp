#ifndef UNIVAR_TYPES_HPP
#define UNIVAR_TYPES_HPP

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace univar {

// One of the five value-taxonomy sources the reference registry draws from.
enum class SourceTaxonomy { RVS, WVS, SVS, VSM, Other };

std::string to_string(SourceTaxonomy t);
SourceTaxonomy taxonomy_from_string(const std::string& s);

struct ReferenceValue {
  std::string value_id;
  std::string name;
  SourceTaxonomy source_taxonomy = SourceTaxonomy::Other;

  bool operator==(const ReferenceValue&) const = default;
};

struct QuestionRecord {
  std::string question_id;
  std::string value;  // ReferenceValue id
  std::string text;
  int paraphrase_index = 0;  // 0 = original
  std::string language = "eng";  // ISO 639-3

  bool operator==(const QuestionRecord&) const = default;
};

// (LLM name, language) pair: the classification label of the whole system.
struct ValueID {
  std::string llm_name;
  std::string language;  // ISO 639-3

  auto operator<=>(const ValueID&) const = default;

  std::string str() const { return llm_name + "/" + language; }
};

enum class CorpusTag { Train, Wvs, Pvq, Globe, Valueprism, Nonvalue, Custom };

std::string to_string(CorpusTag t);
CorpusTag corpus_tag_from_string(const std::string& s);

struct QAPair {
  std::string qa_id;
  std::string question_id;
  ValueID value_id;
  std::string question_en;
  std::string answer_en;
  std::string original_language = "eng";
  CorpusTag corpus_tag = CorpusTag::Train;
  int paraphrase_index = 0;

  bool operator==(const QAPair&) const = default;
};

// llm_name -> supported ISO 639-3 language codes.
using Roster = std::map<std::string, std::vector<std::string>>;

struct Corpus {
  std::vector<QAPair> qa_pairs;
  std::vector<ReferenceValue> registry;
  Roster roster;
  std::vector<QuestionRecord> questions;

  bool operator==(const Corpus&) const = default;
};

// True for a well-formed ISO 639-3 code: exactly three lowercase ASCII letters.
bool valid_language_code(const std::string& code);

}  // namespace univar

#endif
