#include "univar/store.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "univar/errors.hpp"

namespace univar {

namespace {

constexpr char kMagic[4] = {'U', 'V', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void store_save(const EmbeddingStore& store, const std::string& path) {
  if (store.rows.size() != store.metadata.size())
    throw SidecarMismatch("metadata length " +
                          std::to_string(store.metadata.size()) +
                          " does not match row count " +
                          std::to_string(store.rows.size()));
  for (const auto& row : store.rows)
    if (static_cast<int>(row.size()) != store.dim)
      throw DimensionError("store row dimension disagrees with header");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  const std::uint32_t version = kVersion;
  const std::uint64_t count = store.rows.size();
  const std::uint32_t dim = static_cast<std::uint32_t>(store.dim);
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  for (const auto& row : store.rows)
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  if (!out) throw IOError("write failed: " + path);

  nlohmann::json meta = nlohmann::json::array();
  for (const auto& e : store.metadata)
    meta.push_back({{"qa_id", e.qa_id},
                    {"value_llm", e.value_id.llm_name},
                    {"value_lang", e.value_id.language},
                    {"corpus_tag", to_string(e.corpus_tag)}});
  std::ofstream meta_out(path + ".meta.json", std::ios::binary);
  if (!meta_out) throw IOError("cannot open " + path + ".meta.json");
  meta_out << meta.dump(2) << "\n";
}

EmbeddingStore store_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad store magic in " + path);
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  std::uint32_t dim = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  if (!in) throw FormatError("truncated store header in " + path);
  if (version != kVersion)
    throw FormatError("unsupported store version " + std::to_string(version));

  EmbeddingStore store;
  store.dim = static_cast<int>(dim);
  store.rows.assign(count, std::vector<float>(dim));
  for (auto& row : store.rows) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw FormatError("truncated store body in " + path);
  }

  std::ifstream meta_in(path + ".meta.json", std::ios::binary);
  if (!meta_in) throw IOError("cannot open " + path + ".meta.json");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ".meta.json: " + std::string(e.what()));
  }
  if (!meta.is_array() || meta.size() != count)
    throw SidecarMismatch("sidecar has " + std::to_string(meta.size()) +
                          " entries, store has " + std::to_string(count));
  for (const auto& e : meta) {
    store.metadata.push_back(
        {e.at("qa_id").get<std::string>(),
         {e.at("value_llm").get<std::string>(),
          e.at("value_lang").get<std::string>()},
         corpus_tag_from_string(e.at("corpus_tag").get<std::string>())});
  }
  return store;
}

Embedding store_row_embedding(const EmbeddingStore& store, std::size_t row) {
  Embedding e;
  e.values.assign(store.rows[row].begin(), store.rows[row].end());
  return e;
}

}  // namespace univar
