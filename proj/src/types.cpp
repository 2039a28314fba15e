#include "univar/types.hpp"

#include "univar/errors.hpp"

namespace univar {

std::string to_string(SourceTaxonomy t) {
  switch (t) {
    case SourceTaxonomy::RVS: return "RVS";
    case SourceTaxonomy::WVS: return "WVS";
    case SourceTaxonomy::SVS: return "SVS";
    case SourceTaxonomy::VSM: return "VSM";
    case SourceTaxonomy::Other: return "other";
  }
  throw SchemaError("unknown taxonomy enum value");
}

SourceTaxonomy taxonomy_from_string(const std::string& s) {
  if (s == "RVS") return SourceTaxonomy::RVS;
  if (s == "WVS") return SourceTaxonomy::WVS;
  if (s == "SVS") return SourceTaxonomy::SVS;
  if (s == "VSM") return SourceTaxonomy::VSM;
  if (s == "other") return SourceTaxonomy::Other;
  throw SchemaError("unknown source taxonomy: " + s);
}

std::string to_string(CorpusTag t) {
  switch (t) {
    case CorpusTag::Train: return "train";
    case CorpusTag::Wvs: return "wvs";
    case CorpusTag::Pvq: return "pvq";
    case CorpusTag::Globe: return "globe";
    case CorpusTag::Valueprism: return "valueprism";
    case CorpusTag::Nonvalue: return "nonvalue";
    case CorpusTag::Custom: return "custom";
  }
  throw SchemaError("unknown corpus tag enum value");
}

CorpusTag corpus_tag_from_string(const std::string& s) {
  if (s == "train") return CorpusTag::Train;
  if (s == "wvs") return CorpusTag::Wvs;
  if (s == "pvq") return CorpusTag::Pvq;
  if (s == "globe") return CorpusTag::Globe;
  if (s == "valueprism") return CorpusTag::Valueprism;
  if (s == "nonvalue") return CorpusTag::Nonvalue;
  if (s == "custom") return CorpusTag::Custom;
  throw SchemaError("unknown corpus tag: " + s);
}

bool valid_language_code(const std::string& code) {
  if (code.size() != 3) return false;
  for (char c : code) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

}  // namespace univar
