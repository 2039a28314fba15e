#ifndef UNIVAR_STORE_HPP
#define UNIVAR_STORE_HPP

#include <string>
#include <vector>

#include "univar/encoder.hpp"
#include "univar/types.hpp"

namespace univar {

struct StoreEntry {
  std::string qa_id;
  ValueID value_id;
  CorpusTag corpus_tag = CorpusTag::Custom;
};

struct EmbeddingStore {
  int dim = 0;
  std::vector<std::vector<float>> rows;
  std::vector<StoreEntry> metadata;  // one entry per row, same order
};

// Binary store: "UVEM" magic, version, count N, dim d, then N rows of d
// little-endian float32, with a JSON sidecar at path + ".meta.json" mapping
// row index to {qa_id, value_id, corpus_tag}. Round trips are bit-exact.
// Throws FormatError on bad magic/version, SidecarMismatch when the sidecar
// length disagrees with N.
void store_save(const EmbeddingStore& store, const std::string& path);
EmbeddingStore store_load(const std::string& path);

// Widening to the double-precision embeddings the evaluation side uses.
Embedding store_row_embedding(const EmbeddingStore& store, std::size_t row);

}  // namespace univar

#endif
