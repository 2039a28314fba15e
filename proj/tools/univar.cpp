#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "univar/config.hpp"
#include "univar/corpus.hpp"
#include "univar/encoder.hpp"
#include "univar/errors.hpp"
#include "univar/evalharness.hpp"
#include "univar/store.hpp"
#include "univar/synthetic.hpp"
#include "univar/trainer.hpp"
#include "univar/valuemap.hpp"
#include "univar/views.hpp"

namespace {

constexpr const char* kCodeVersion = "univar 0.1.0";

using namespace univar;

void write_manifest(const std::string& output_path, const RunConfig& config,
                    std::uint64_t seed) {
  nlohmann::json m{{"config_digest", config.config_digest},
                   {"seed", seed},
                   {"code_version", kCodeVersion}};
  std::ofstream out(output_path + ".manifest.json", std::ios::binary);
  if (!out) throw IOError("cannot write manifest for " + output_path);
  out << m.dump(2) << "\n";
}

RunConfig load_run_config(const std::string& config_path) {
  RunConfig rc = config_path.empty() ? RunConfig{}
                                     : RunConfig::from_file(config_path);
  std::cout << rc.summary();
  return rc;
}

std::string qa_text(const QAPair& qa) {
  return "Q: " + qa.question_en + "\nA: " + qa.answer_en;
}

int cmd_build_corpus(const std::string& config_path, std::uint64_t seed,
                     const std::string& out_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.paths.corpus = out_override;
  if (rc.corpus_build.client_type != "scripted")
    throw ConfigError(
        "client type '" + rc.corpus_build.client_type +
        "' is not bundled; attach a client through the library API");
  if (rc.roster.empty())
    throw ConfigError("build-corpus needs a [roster] section");

  std::vector<ReferenceValue> registry = load_registry(rc.paths.registry);

  std::unordered_set<std::string> exclusions;
  if (!rc.paths.exclusions.empty()) {
    std::ifstream in(rc.paths.exclusions);
    if (!in) throw IOError("cannot open exclusion list " + rc.paths.exclusions);
    std::string id;
    while (std::getline(in, id))
      if (!id.empty()) exclusions.insert(id);
  }

  const std::uint64_t client_seed = rc.corpus_build.client_seed ^ seed;
  ScriptedGenClient generator(client_seed, rc.corpus_build.questions_per_value,
                              rc.corpus_build.paraphrases, "generator");
  ScriptedClientFactory factory(client_seed);
  IdentityTranslator translator;

  RequestLog log;
  Corpus corpus;
  corpus.registry = registry;
  corpus.roster = rc.roster;
  for (const auto& value : registry) {
    auto questions = generate_questions(
        value, generator, rc.corpus_build.questions_per_value, &log);
    auto expanded = paraphrase_and_expand(questions, generator,
                                          rc.corpus_build.paraphrases, &log);
    corpus.questions.insert(corpus.questions.end(), expanded.begin(),
                            expanded.end());
  }

  CollectOptions options;
  options.excluded_question_ids = exclusions;
  options.workers = rc.corpus_build.workers;
  options.log = &log;
  CollectResult collected =
      collect_qa(corpus.questions, rc.roster, factory, translator, options);
  corpus.qa_pairs = std::move(collected.qa_pairs);

  save_corpus(corpus, rc.paths.corpus);
  write_manifest(rc.paths.corpus, rc, seed);

  std::ofstream req(rc.paths.corpus + ".requests.log", std::ios::binary);
  for (const auto& p : log.prompts) req << p << "\n---\n";

  std::cout << "questions: " << corpus.questions.size()
            << "  qa pairs: " << corpus.qa_pairs.size()
            << "  failures: " << collected.failures.size() << "\n";
  for (const auto& f : collected.failures)
    std::cerr << "failed: " << f.question_id << " " << f.llm_name << "/"
              << f.language << ": " << f.message << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed,
              const std::string& out_override, int lambda_override,
              double tau_override, int batch_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.paths.checkpoint = out_override;
  if (lambda_override > 0) rc.sampler.lambda = lambda_override;
  if (tau_override > 0.0) rc.trainer.temperature = tau_override;
  if (batch_override > 0) rc.trainer.batch_size = batch_override;
  rc.sampler.seed = seed;
  rc.trainer.seed = seed;

  Corpus corpus = load_corpus(rc.paths.corpus);
  Encoder encoder(rc.encoder);
  encoder.init_parameters(seed);

  const std::string log_path = rc.paths.train_log.empty()
                                   ? rc.paths.checkpoint + ".log.jsonl"
                                   : rc.paths.train_log;
  TrainResult result = train(corpus, rc.trainer, rc.sampler, encoder,
                             rc.paths.checkpoint, log_path);
  write_manifest(rc.paths.checkpoint, rc, seed);

  std::cout << "steps: " << result.steps_run << "  first loss: "
            << (result.history.empty() ? 0.0 : result.history.front().loss)
            << "  final loss: "
            << (result.history.empty() ? 0.0 : result.history.back().loss)
            << "\n";
  return 0;
}

int cmd_embed(const std::string& config_path, std::uint64_t seed,
              const std::string& out_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.paths.store = out_override;

  Corpus corpus = load_corpus(rc.paths.corpus);
  Encoder encoder = load_checkpoint(rc.paths.checkpoint);

  EmbeddingStore store;
  store.dim = encoder.config().embed_dim;
  for (const auto& qa : corpus.qa_pairs) {
    const Embedding z = encoder.encode_one(qa_text(qa));
    std::vector<float> row(z.values.begin(), z.values.end());
    store.rows.push_back(std::move(row));
    store.metadata.push_back({qa.qa_id, qa.value_id, qa.corpus_tag});
  }
  store_save(store, rc.paths.store);
  write_manifest(rc.paths.store, rc, seed);
  std::cout << "embedded " << store.rows.size() << " QA pairs (d=" << store.dim
            << ")\n";
  return 0;
}

std::vector<EvalItem> store_items(const EmbeddingStore& store) {
  std::vector<EvalItem> items;
  items.reserve(store.rows.size());
  for (std::size_t i = 0; i < store.rows.size(); ++i)
    items.push_back({store_row_embedding(store, i), store.metadata[i].value_id,
                     store.metadata[i].corpus_tag});
  return items;
}

int cmd_eval(const std::string& config_path, std::uint64_t seed,
             const std::string& out_override, int k_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.paths.report = out_override;
  if (k_override > 0) rc.knn_k = k_override;

  const EmbeddingStore store = store_load(rc.paths.store);
  std::vector<EvalItem> items = store_items(store);

  std::vector<EvalItem> reference;
  std::map<std::string, std::vector<EvalItem>> query_groups;
  for (const auto& item : items) {
    if (item.corpus_tag == CorpusTag::Train)
      reference.push_back(item);
    else
      query_groups[to_string(item.corpus_tag)].push_back(item);
  }
  if (query_groups.empty()) {
    // Single-corpus store: alternate rows between bank and queries.
    std::vector<EvalItem> bank, queries;
    for (std::size_t i = 0; i < items.size(); ++i)
      (i % 2 == 0 ? bank : queries).push_back(items[i]);
    reference = std::move(bank);
    query_groups["train"] = std::move(queries);
  }
  if (reference.empty()) throw EmptyReference("store has no reference items");

  const int k = std::min<int>(rc.knn_k, static_cast<int>(reference.size()));
  std::set<ValueID> labels;
  for (const auto& item : reference) labels.insert(item.label);

  EvalReport report;
  report.baselines = baseline_scores(static_cast<int>(labels.size()), {1, 5, 10});

  std::map<std::string, std::vector<double>> per_corpus_label_acc;
  std::map<int, double> probe_sums;
  double acc_sum = 0.0, f1_sum = 0.0;
  ProbeConfig probe = rc.probe;
  probe.seed = seed;
  for (const auto& [tag, queries] : query_groups) {
    const KnnMetrics m = knn_evaluate(reference, queries, k);
    report.per_corpus[tag] = m;
    acc_sum += m.accuracy;
    f1_sum += m.macro_f1;
    for (const auto& [label, acc] : per_label_accuracy(reference, queries, k))
      per_corpus_label_acc[tag].push_back(acc);
    for (const auto& [kk, acc] : linear_probe(reference, queries, probe))
      probe_sums[kk] += acc;
  }
  const double n = static_cast<double>(query_groups.size());
  report.knn_accuracy = acc_sum / n;
  report.knn_macro_f1 = f1_sum / n;
  for (const auto& [kk, sum] : probe_sums) report.probe_acc_at[kk] = sum / n;
  report.balanced_average = balanced_average(per_corpus_label_acc);

  std::ofstream out(rc.paths.report, std::ios::binary);
  if (!out) throw IOError("cannot open " + rc.paths.report);
  out << report_to_json(report) << "\n";
  write_manifest(rc.paths.report, rc, seed);
  std::cout << report_to_json(report) << "\n";
  return 0;
}

int cmd_map(const std::string& config_path, std::uint64_t seed,
            const std::string& out_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.paths.map = out_override;

  const EmbeddingStore store = store_load(rc.paths.store);
  std::vector<ProjectionInput> inputs;
  for (std::size_t i = 0; i < store.rows.size(); ++i) {
    std::vector<double> row(store.rows[i].begin(), store.rows[i].end());
    inputs.push_back({store.metadata[i].qa_id, store.metadata[i].value_id,
                      std::move(row)});
  }
  PcaProjector projector;
  auto points = project_2d(inputs, projector, seed);
  export_map(points, projector.name(), seed, store.dim, rc.paths.map);
  write_manifest(rc.paths.map, rc, seed);
  std::cout << "projected " << points.size() << " points -> " << rc.paths.map
            << "\n";
  return 0;
}

ValueID parse_value_id(const std::string& s) {
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos)
    throw ConfigError("value id must look like llm/lang: " + s);
  return {s.substr(0, slash), s.substr(slash + 1)};
}

int cmd_transfer(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path,
                 const std::vector<std::string>& store_paths,
                 const std::string& reference_path, const std::string& subject,
                 const std::string& source, const std::string& target) {
  RunConfig rc = load_run_config(config_path);

  std::vector<std::vector<EvalItem>> sets;
  for (const auto& p : store_paths) sets.push_back(store_items(store_load(p)));
  const std::vector<EvalItem> bank = store_items(store_load(reference_path));

  auto trajectory =
      transfer_trajectory(sets, parse_value_id(subject), parse_value_id(source),
                          parse_value_id(target), bank);

  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : trajectory)
    j.push_back({{"step", t.step},
                 {"d_source", t.d_source},
                 {"d_target", t.d_target}});
  const std::string path = out_path.empty() ? "trajectory.json" : out_path;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path);
  out << j.dump(2) << "\n";
  write_manifest(path, rc, seed);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_selfcheck() {
  bool ok = true;
  auto check = [&](const std::string& name, bool pass, double got) {
    std::cout << (pass ? "[pass] " : "[FAIL] ") << name << " = " << got << "\n";
    ok = ok && pass;
  };

  // Orthogonal pairs at B=2, tau=1.
  std::vector<Embedding> z1{{{1.0, 0.0}}, {{0.0, 1.0}}};
  std::vector<Embedding> z2{{{1.0, 0.0}}, {{0.0, 1.0}}};
  const double l2 = info_nce_loss(z1, z2, 1.0);
  check("loss(B=2 orthogonal, tau=1)", std::abs(l2 - std::log(1.0 + std::exp(-1.0))) < 1e-7, l2);

  const double l1 = info_nce_loss({{{1.0, 0.0}}}, {{{0.0, 1.0}}}, 0.05);
  check("loss(B=1)", l1 == 0.0, l1);

  std::vector<Embedding> same(4, Embedding{{1.0, 0.0}});
  const double l4 = info_nce_loss(same, same, 0.7);
  check("loss(B=4 identical)", std::abs(l4 - std::log(4.0)) < 1e-7, l4);

  EncoderConfig cfg;
  cfg.feature_dim = 64;
  cfg.hidden_dim = 16;
  cfg.embed_dim = 8;
  Encoder encoder(cfg);
  encoder.init_parameters(7);
  std::vector<std::string> t1{"apples and oranges", "rivers run deep",
                              "quiet mountain trail", "bright city lights"};
  std::vector<std::string> t2{"oranges and apples", "deep rivers run",
                              "trail on a quiet mountain", "city lights bright"};
  const double err = gradient_check(encoder, t1, t2, 0.5, 1e-5, 200, 11);
  check("gradient max relative error", err <= 1e-4, err);

  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-embedding corpus, training, and evaluation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  int lambda_override = 0, batch_override = 0, k_override = 0;
  double tau_override = 0.0;
  std::vector<std::string> store_paths;
  std::string reference_path, subject, source, target;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file path");
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--out", out_path, "output path override");
  };

  auto* build = app.add_subcommand("build-corpus", "assemble the QA corpus");
  add_common(build);
  auto* train_cmd = app.add_subcommand("train", "train the encoder");
  add_common(train_cmd);
  train_cmd->add_option("--lambda", lambda_override, "max QA pairs per view");
  train_cmd->add_option("--tau", tau_override, "loss temperature");
  train_cmd->add_option("--batch-size", batch_override, "training batch size");
  auto* embed = app.add_subcommand("embed", "embed the corpus into a store");
  add_common(embed);
  auto* eval_cmd = app.add_subcommand("eval", "kNN + linear-probe evaluation");
  add_common(eval_cmd);
  eval_cmd->add_option("--k", k_override, "kNN neighbour count");
  auto* map_cmd = app.add_subcommand("map", "2D value map export");
  add_common(map_cmd);
  auto* transfer = app.add_subcommand("transfer", "centroid-distance trajectory");
  add_common(transfer);
  transfer->add_option("--stores", store_paths, "checkpoint embedding stores, in order")
      ->required();
  transfer->add_option("--reference", reference_path, "fixed reference bank store")
      ->required();
  transfer->add_option("--subject", subject, "moving value id (llm/lang)")->required();
  transfer->add_option("--source", source, "source value id (llm/lang)")->required();
  transfer->add_option("--target", target, "target value id (llm/lang)")->required();
  auto* selfcheck = app.add_subcommand("selfcheck", "analytic loss and gradient oracles");
  (void)selfcheck;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) return cmd_build_corpus(config_path, seed, out_path);
    if (train_cmd->parsed())
      return cmd_train(config_path, seed, out_path, lambda_override,
                       tau_override, batch_override);
    if (embed->parsed()) return cmd_embed(config_path, seed, out_path);
    if (eval_cmd->parsed())
      return cmd_eval(config_path, seed, out_path, k_override);
    if (map_cmd->parsed()) return cmd_map(config_path, seed, out_path);
    if (transfer->parsed())
      return cmd_transfer(config_path, seed, out_path, store_paths,
                          reference_path, subject, source, target);
    if (selfcheck->parsed()) return cmd_selfcheck();
  } catch (const univar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
