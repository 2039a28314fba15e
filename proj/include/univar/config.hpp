#ifndef UNIVAR_CONFIG_HPP
#define UNIVAR_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

#include "univar/encoder.hpp"
#include "univar/evalharness.hpp"
#include "univar/trainer.hpp"
#include "univar/types.hpp"
#include "univar/views.hpp"

namespace univar {

// Flat "section.key" -> string view of a TOML-style config file. Supported
// syntax: [section] headers, key = value with string/number/bool scalars,
// '#' comments. String values may interpolate environment variables as
// ${ENV:NAME}; credentials never live in the file itself.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // FNV-1a digest of the raw config text, for run manifests.
  std::uint64_t digest() const { return digest_; }

 private:
  std::map<std::string, std::string> values_;
  std::uint64_t digest_ = 0;
};

struct RunPaths {
  std::string corpus = "corpus.jsonl";
  std::string checkpoint = "model.uvar";
  std::string store = "embeddings.uvem";
  std::string report = "report.json";
  std::string map = "map.csv";
  std::string registry = "data/reference_values.json";
  std::string train_log = "";
  std::string exclusions = "";
};

struct CorpusBuildConfig {
  int questions_per_value = 50;
  int paraphrases = 4;
  int workers = 1;
  std::string client_type = "scripted";
  std::uint64_t client_seed = 0;
};

// Everything one run needs; numeric defaults follow the training and probing
// settings the embedding method was reported with.
struct RunConfig {
  SamplerConfig sampler;
  TrainConfig trainer;
  EncoderConfig encoder;
  ProbeConfig probe;
  CorpusBuildConfig corpus_build;
  RunPaths paths;
  Roster roster;
  int knn_k = 50;
  std::uint64_t config_digest = 0;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_config(const ConfigFile& file);

  std::string summary() const;  // printed at startup
};

}  // namespace univar

#endif
