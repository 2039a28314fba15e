#include "univar/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "univar/errors.hpp"

namespace univar {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string interpolate_env(const std::string& value) {
  std::string out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    const std::size_t hit = value.find("${ENV:", pos);
    if (hit == std::string::npos) {
      out += value.substr(pos);
      break;
    }
    out += value.substr(pos, hit - pos);
    const std::size_t close = value.find('}', hit);
    if (close == std::string::npos)
      throw ConfigError("unterminated ${ENV:...} in config value");
    const std::string name = value.substr(hit + 6, close - hit - 6);
    const char* env = std::getenv(name.c_str());
    if (!env) throw ConfigError("environment variable not set: " + name);
    out += env;
    pos = close + 1;
  }
  return out;
}

std::uint64_t fnv1a_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  cfg.digest_ = fnv1a_str(text);
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("empty key at line " + std::to_string(lineno));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    value = interpolate_env(value);
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number: " + key + " = " + it->second);
  }
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("expected an integer for " + key);
  return i;
}

std::uint64_t ConfigFile::get_u64(const std::string& key,
                                  std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("not an unsigned integer: " + key);
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("expected true/false for " + key);
}

RunConfig RunConfig::from_config(const ConfigFile& file) {
  RunConfig rc;
  rc.config_digest = file.digest();

  rc.sampler.lambda = file.get_int("sampler.lambda", rc.sampler.lambda);
  rc.sampler.batch_size = file.get_int("sampler.batch_size", rc.sampler.batch_size);
  rc.sampler.char_budget = static_cast<std::size_t>(
      file.get_int("sampler.char_budget", static_cast<int>(rc.sampler.char_budget)));
  rc.sampler.disjoint_views =
      file.get_bool("sampler.disjoint_views", rc.sampler.disjoint_views);

  rc.trainer.learning_rate =
      file.get_double("trainer.learning_rate", rc.trainer.learning_rate);
  rc.trainer.warmup_steps =
      file.get_int("trainer.warmup_steps", rc.trainer.warmup_steps);
  rc.trainer.batch_size = file.get_int("trainer.batch_size", rc.trainer.batch_size);
  rc.trainer.epochs = file.get_int("trainer.epochs", rc.trainer.epochs);
  rc.trainer.temperature =
      file.get_double("trainer.temperature", rc.trainer.temperature);
  rc.trainer.weight_decay =
      file.get_double("trainer.weight_decay", rc.trainer.weight_decay);
  rc.trainer.max_steps = file.get_int("trainer.max_steps", rc.trainer.max_steps);
  rc.trainer.checkpoint_every =
      file.get_int("trainer.checkpoint_every", rc.trainer.checkpoint_every);
  rc.trainer.symmetric_loss =
      file.get_bool("trainer.symmetric_loss", rc.trainer.symmetric_loss);
  if (rc.trainer.temperature <= 0.0)
    throw ConfigError("trainer.temperature must be positive");
  if (rc.trainer.warmup_steps < 1)
    throw ConfigError("trainer.warmup_steps must be >= 1");

  rc.encoder.feature_dim = file.get_int("encoder.feature_dim", rc.encoder.feature_dim);
  rc.encoder.hidden_dim = file.get_int("encoder.hidden_dim", rc.encoder.hidden_dim);
  rc.encoder.embed_dim = file.get_int("encoder.embed_dim", rc.encoder.embed_dim);
  rc.encoder.hash_seed = file.get_u64("encoder.hash_seed", rc.encoder.hash_seed);

  rc.probe.learning_rate =
      file.get_double("probe.learning_rate", rc.probe.learning_rate);
  rc.probe.batch_size = file.get_int("probe.batch_size", rc.probe.batch_size);
  rc.probe.epochs = file.get_int("probe.epochs", rc.probe.epochs);

  rc.corpus_build.questions_per_value =
      file.get_int("corpus.questions_per_value", rc.corpus_build.questions_per_value);
  rc.corpus_build.paraphrases =
      file.get_int("corpus.paraphrases", rc.corpus_build.paraphrases);
  rc.corpus_build.workers = file.get_int("corpus.workers", rc.corpus_build.workers);
  rc.corpus_build.client_type =
      file.get_string("clients.type", rc.corpus_build.client_type);
  rc.corpus_build.client_seed = file.get_u64("clients.seed", 0);

  rc.paths.corpus = file.get_string("paths.corpus", rc.paths.corpus);
  rc.paths.checkpoint = file.get_string("paths.checkpoint", rc.paths.checkpoint);
  rc.paths.store = file.get_string("paths.store", rc.paths.store);
  rc.paths.report = file.get_string("paths.report", rc.paths.report);
  rc.paths.map = file.get_string("paths.map", rc.paths.map);
  rc.paths.registry = file.get_string("paths.registry", rc.paths.registry);
  rc.paths.train_log = file.get_string("paths.train_log", rc.paths.train_log);
  rc.paths.exclusions = file.get_string("paths.exclusions", rc.paths.exclusions);

  rc.knn_k = file.get_int("eval.k", rc.knn_k);

  // [roster] llm_name = "lang,lang,..."
  for (const auto& [key, value] : file.values()) {
    if (key.rfind("roster.", 0) != 0) continue;
    const std::string llm = key.substr(7);
    std::vector<std::string> langs;
    std::istringstream langs_in(value);
    std::string lang;
    while (std::getline(langs_in, lang, ',')) {
      lang = trim(lang);
      if (lang.empty()) continue;
      if (!valid_language_code(lang))
        throw ConfigError("bad language code '" + lang + "' for " + llm);
      langs.push_back(lang);
    }
    if (langs.empty()) throw ConfigError("roster entry " + llm + " is empty");
    rc.roster[llm] = langs;
  }
  return rc;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_config(ConfigFile::parse_file(path));
}

std::string RunConfig::summary() const {
  std::ostringstream out;
  out << "sampler: lambda=" << sampler.lambda
      << " batch_size=" << sampler.batch_size
      << " char_budget=" << sampler.char_budget
      << " disjoint=" << (sampler.disjoint_views ? "true" : "false") << "\n"
      << "trainer: lr=" << trainer.learning_rate
      << " warmup=" << trainer.warmup_steps << " B=" << trainer.batch_size
      << " epochs=" << trainer.epochs << " tau=" << trainer.temperature
      << " weight_decay=" << trainer.weight_decay << "\n"
      << "encoder: F=" << encoder.feature_dim << " hidden=" << encoder.hidden_dim
      << " d=" << encoder.embed_dim << "\n"
      << "probe: lr=" << probe.learning_rate << " batch=" << probe.batch_size
      << " epochs=" << probe.epochs << "\n"
      << "eval: k=" << knn_k << "\n";
  return out.str();
}

}  // namespace univar
