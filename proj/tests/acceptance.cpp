// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained apart from the trained encoder
// shared between the recovery run and the non-value control.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "univar/corpus.hpp"
#include "univar/encoder.hpp"
#include "univar/errors.hpp"
#include "univar/evalharness.hpp"
#include "univar/prompts.hpp"
#include "univar/store.hpp"
#include "univar/synthetic.hpp"
#include "univar/trainer.hpp"
#include "univar/valuemap.hpp"
#include "univar/views.hpp"

using namespace univar;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << number << ". " << name;
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Embedding> random_unit_batch(int b, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Embedding> out;
  for (int i = 0; i < b; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    double norm = 0.0;
    for (double& x : v) {
      x = dist(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    out.push_back({std::move(v)});
  }
  return out;
}

std::string qa_text(const QAPair& qa) {
  return "Q: " + qa.question_en + "\nA: " + qa.answer_en;
}

// Brute-force kNN reference: full sort, documented tie rules, independent of
// the library implementation.
ValueID brute_force_knn(const std::vector<EvalItem>& reference,
                        const Embedding& query, int k) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < query.values.size(); ++j)
      s += reference[i].embedding.values[j] * query.values[j];
    scored.push_back({s, i});
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::map<ValueID, int> votes, first_seen;
  for (int r = 0; r < k; ++r) {
    const ValueID& l = reference[scored[static_cast<std::size_t>(r)].second].label;
    ++votes[l];
    if (!first_seen.count(l)) first_seen[l] = r;
  }
  ValueID best;
  int best_votes = -1, best_rank = static_cast<int>(reference.size());
  for (const auto& [l, v] : votes)
    if (v > best_votes || (v == best_votes && first_seen[l] < best_rank)) {
      best = l;
      best_votes = v;
      best_rank = first_seen[l];
    }
  return best;
}

// Macro-F1 from an explicit confusion matrix, independent of knn_evaluate.
double confusion_macro_f1(const std::vector<ValueID>& truth,
                          const std::vector<ValueID>& predicted) {
  std::set<ValueID> labels(truth.begin(), truth.end());
  double sum = 0.0;
  for (const auto& label : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool is_true = truth[i] == label;
      const bool is_pred = predicted[i] == label;
      if (is_true && is_pred) ++tp;
      if (!is_true && is_pred) ++fp;
      if (is_true && !is_pred) ++fn;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sum += precision + recall > 0
               ? 2.0 * precision * recall / (precision + recall)
               : 0.0;
  }
  return sum / static_cast<double>(labels.size());
}

std::vector<EvalItem> random_items(int n, int d, int labels,
                                   std::mt19937_64& rng) {
  auto batch = random_unit_batch(n, d, rng);
  std::vector<EvalItem> items;
  for (int i = 0; i < n; ++i)
    items.push_back({batch[static_cast<std::size_t>(i)],
                     synthetic_value_ids(labels)[rng() % static_cast<unsigned>(labels)],
                     CorpusTag::Custom});
  return items;
}

// Shared state between the recovery run and the non-value control.
struct RecoveryState {
  bool trained = false;
  Encoder encoder{EncoderConfig{}};
  std::vector<EvalItem> reference;   // training-split single-QA embeddings
  std::vector<EvalItem> heldout;     // held-out single-QA embeddings
  double value_accuracy = 0.0;
};
RecoveryState recovery;

std::vector<EvalItem> embed_corpus(Encoder& encoder, const Corpus& corpus) {
  std::vector<EvalItem> items;
  for (const auto& qa : corpus.qa_pairs)
    items.push_back({encoder.encode_one(qa_text(qa)), qa.value_id,
                     qa.corpus_tag});
  return items;
}

}  // namespace

int main() {
  criterion(1, "InfoNCE loss matches the analytic oracles", [](std::string& d) {
    const auto start = Clock::now();
    std::vector<Embedding> z1{{{1.0, 0.0}}, {{0.0, 1.0}}};
    const double l2 = info_nce_loss(z1, z1, 1.0);
    const double want2 = std::log(1.0 + std::exp(-1.0));
    const double l1 = info_nce_loss({{{1.0, 0.0}}}, {{{0.0, 1.0}}}, 0.05);
    std::vector<Embedding> same(4, Embedding{{1.0, 0.0}});
    const double l4 = info_nce_loss(same, same, 0.7);
    const double elapsed = seconds_since(start);
    std::ostringstream out;
    out << "B=2 err " << std::abs(l2 - want2) << ", B=1 " << l1 << ", B=4 err "
        << std::abs(l4 - std::log(4.0)) << ", " << elapsed << "s";
    d = out.str();
    return std::abs(l2 - want2) < 1e-7 && l1 == 0.0 &&
           std::abs(l4 - std::log(4.0)) < 1e-7 && elapsed < 1.0;
  });

  criterion(2, "analytic gradient matches central differences", [](std::string& d) {
    const auto start = Clock::now();
    EncoderConfig cfg;
    cfg.feature_dim = 64;
    cfg.hidden_dim = 16;
    cfg.embed_dim = 8;
    Encoder encoder(cfg);
    encoder.init_parameters(17);
    std::vector<std::string> t1{"apples and oranges", "rivers run deep",
                                "quiet mountain trail", "bright city lights"};
    std::vector<std::string> t2{"oranges and apples", "deep rivers run",
                                "trail on a quiet mountain",
                                "city lights bright"};
    const double err = gradient_check(encoder, t1, t2, 0.5, 1e-5, 200, 23);
    const double elapsed = seconds_since(start);
    std::ostringstream out;
    out << "max rel err " << err << ", " << elapsed << "s";
    d = out.str();
    return err <= 1e-4 && elapsed < 10.0;
  });

  criterion(3, "synthetic 8-value recovery (kNN and probe >= 0.80)",
            [](std::string& d) {
    const auto start = Clock::now();
    SyntheticSpec spec;
    spec.value_id_count = 8;
    spec.qa_per_value = 40;
    spec.seed = 404;
    const Corpus full = make_synthetic_corpus(spec);

    // Hold out the last 8 QA pairs of each value id; train on the rest.
    std::map<ValueID, int> seen;
    Corpus train_corpus;
    train_corpus.registry = full.registry;
    train_corpus.roster = full.roster;
    train_corpus.questions = full.questions;
    std::vector<QAPair> heldout;
    std::map<ValueID, int> totals;
    for (const auto& qa : full.qa_pairs) ++totals[qa.value_id];
    for (const auto& qa : full.qa_pairs) {
      if (++seen[qa.value_id] <= totals[qa.value_id] - 8)
        train_corpus.qa_pairs.push_back(qa);
      else
        heldout.push_back(qa);
    }

    EncoderConfig ecfg;
    ecfg.feature_dim = 2048;
    ecfg.hidden_dim = 128;
    ecfg.embed_dim = 64;
    recovery.encoder = Encoder(ecfg);
    recovery.encoder.init_parameters(7);

    TrainConfig tc;
    tc.learning_rate = 2e-3;
    tc.warmup_steps = 20;
    tc.batch_size = 8;
    tc.max_steps = 200;
    tc.seed = 7;
    tc.validation_fraction = 0.0;
    SamplerConfig sc;
    sc.lambda = 5;
    sc.batch_size = 8;
    sc.seed = 7;
    const TrainResult result = train(train_corpus, tc, sc, recovery.encoder);

    Corpus heldout_corpus;
    heldout_corpus.qa_pairs = heldout;
    recovery.reference = embed_corpus(recovery.encoder, train_corpus);
    recovery.heldout = embed_corpus(recovery.encoder, heldout_corpus);

    const KnnMetrics knn = knn_evaluate(recovery.reference, recovery.heldout, 5);
    ProbeConfig pc;
    pc.learning_rate = 2e-2;
    pc.batch_size = 64;
    pc.epochs = 20;
    pc.seed = 7;
    const auto probe = linear_probe(recovery.reference, recovery.heldout, pc, {1});
    const double elapsed = seconds_since(start);
    recovery.trained = true;
    recovery.value_accuracy = knn.accuracy;

    std::ostringstream out;
    out << "loss " << result.history.front().loss << " -> "
        << result.history.back().loss << ", kNN " << knn.accuracy << ", probe "
        << probe.at(1) << ", " << elapsed << "s";
    d = out.str();
    return result.history.back().loss < result.history.front().loss &&
           knn.accuracy >= 0.80 && probe.at(1) >= 0.80 && elapsed < 120.0;
  });

  criterion(4, "non-value control collapses to chance with gap >= 0.50",
            [](std::string& d) {
    if (!recovery.trained) {
      d = "recovery run did not complete";
      return false;
    }
    SyntheticSpec spec;
    spec.value_id_count = 8;
    spec.qa_per_value = 40;
    spec.seed = 505;
    spec.shared_vocabulary = true;
    spec.tag = CorpusTag::Nonvalue;
    const Corpus control = make_synthetic_corpus(spec);
    Encoder& encoder = recovery.encoder;
    const std::vector<EvalItem> nonvalue = embed_corpus(encoder, control);
    const ControlReport report =
        control_eval(nonvalue, recovery.heldout, recovery.reference, 5);
    std::ostringstream out;
    out << "nonvalue " << report.nonvalue_metrics.accuracy << " vs chance 0.125"
        << ", gap " << report.gap;
    d = out.str();
    return std::abs(report.nonvalue_metrics.accuracy - 0.125) <= 0.05 &&
           report.gap >= 0.50;
  });

  criterion(5, "baseline scores are exact for 128 labels", [](std::string& d) {
    const BaselineScores s = baseline_scores(128, {1, 5, 10});
    std::ostringstream out;
    out << s.random_accuracy << " / " << s.majority_at_k.at(5) << " / "
        << s.majority_at_k.at(10);
    d = out.str();
    return s.random_accuracy == 0.0078125 &&
           s.majority_at_k.at(1) == 0.0078125 &&
           s.majority_at_k.at(5) == 0.0390625 &&
           s.majority_at_k.at(10) == 0.078125;
  });

  criterion(6, "kNN and macro-F1 match independent reference implementations",
            [](std::string& d) {
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 10 + static_cast<int>(rng() % 91);
      const auto reference = random_items(n, 6, 5, rng);
      const auto queries = random_items(20, 6, 5, rng);
      for (int k : {1, 3, std::min(50, n)}) {
        std::vector<ValueID> truth, predicted;
        for (const auto& q : queries) {
          const ValueID got = knn_classify(reference, q.embedding, k);
          if (got != brute_force_knn(reference, q.embedding, k)) {
            d = "prediction mismatch at trial " + std::to_string(trial);
            return false;
          }
          truth.push_back(q.label);
          predicted.push_back(got);
        }
        const KnnMetrics m = knn_evaluate(reference, queries, k);
        if (std::abs(m.macro_f1 - confusion_macro_f1(truth, predicted)) >
            1e-12) {
          d = "macro-F1 mismatch at trial " + std::to_string(trial);
          return false;
        }
      }
    }
    d = "50 instances, k in {1,3,min(50,N)}";
    return true;
  });

  criterion(7, "loss and MI bound stay inside the analytic range",
            [](std::string& d) {
    std::mt19937_64 rng(707);
    for (int trial = 0; trial < 100; ++trial) {
      const int b = 1 + static_cast<int>(rng() % 16);
      const int dim = 2 + static_cast<int>(rng() % 15);
      const double tau = std::vector<double>{0.05, 0.5, 1.0}[rng() % 3];
      const auto z1 = random_unit_batch(b, dim, rng);
      const auto z2 = random_unit_batch(b, dim, rng);
      const double loss = info_nce_loss(z1, z2, tau);
      const double cap = std::log(static_cast<double>(b)) + 2.0 / tau;
      if (!(loss >= -1e-12 && loss <= cap + 1e-9)) {
        d = "loss out of range at trial " + std::to_string(trial);
        return false;
      }
      if (mi_lower_bound(loss, b) > std::log(static_cast<double>(b)) + 1e-12) {
        d = "bound above log B at trial " + std::to_string(trial);
        return false;
      }
    }
    // Analytic endpoints: B=1 gives L=0 (bound log 1); an all-identical batch
    // gives L = log B exactly (bound 0).
    const double l1 = info_nce_loss({{{1.0, 0.0}}}, {{{0.0, 1.0}}}, 0.05);
    std::vector<Embedding> same(4, Embedding{{1.0, 0.0}});
    const double l4 = info_nce_loss(same, same, 0.7);
    d = "100 batches plus endpoints";
    return l1 == 0.0 && mi_lower_bound(l1, 1) == 0.0 &&
           std::abs(l4 - std::log(4.0)) < 1e-12 &&
           std::abs(mi_lower_bound(l4, 4)) < 1e-12;
  });

  criterion(8, "scripted corpus build has exact counts and reproduces bytewise",
            [](std::string& d) {
    std::vector<ReferenceValue> registry{
        {"acc.honesty", "Honesty", SourceTaxonomy::Other},
        {"acc.loyalty", "Loyalty", SourceTaxonomy::Other},
        {"acc.fairness", "Fairness", SourceTaxonomy::Other}};
    const Roster roster{{"alpha", {"eng", "fra"}}, {"beta", {"eng"}}};
    const int questions_per_value = 2, paraphrases = 4;

    auto build = [&](const std::string& path, RequestLog& log) {
      ScriptedGenClient generator(11, questions_per_value, paraphrases,
                                  "generator");
      ScriptedClientFactory factory(11);
      IdentityTranslator translator;
      Corpus corpus;
      corpus.registry = registry;
      corpus.roster = roster;
      for (const auto& value : registry) {
        auto questions =
            generate_questions(value, generator, questions_per_value, &log);
        auto expanded =
            paraphrase_and_expand(questions, generator, paraphrases, &log);
        corpus.questions.insert(corpus.questions.end(), expanded.begin(),
                                expanded.end());
      }
      CollectOptions options;
      options.log = &log;
      CollectResult got =
          collect_qa(corpus.questions, roster, factory, translator, options);
      corpus.qa_pairs = std::move(got.qa_pairs);
      save_corpus(corpus, path);
      return corpus;
    };

    RequestLog log_a, log_b;
    const Corpus a = build("acc_corpus_a.jsonl", log_a);
    build("acc_corpus_b.jsonl", log_b);

    const std::size_t want_questions = 3 * 2 * (1 + paraphrases);  // 30
    const std::size_t want_qa = want_questions * (2 + 1);          // 90
    const bool counts_ok =
        a.questions.size() == want_questions && a.qa_pairs.size() == want_qa;
    const bool bytes_ok =
        read_file("acc_corpus_a.jsonl") == read_file("acc_corpus_b.jsonl") &&
        read_file("acc_corpus_a.jsonl.meta.json") ==
            read_file("acc_corpus_b.jsonl.meta.json");

    // The templates must appear verbatim in the request log, with only their
    // placeholders substituted.
    std::string joined;
    for (const auto& p : log_a.prompts) joined += p + "\n";
    const std::string scenario =
        prompts::fill(prompts::kScenarioTemplate, "{VALUE}", "Honesty");
    const bool templates_ok =
        joined.find(scenario) != std::string::npos &&
        joined.find("Given a premise about \"") != std::string::npos &&
        joined.find("premise.'") != std::string::npos &&
        joined.find("Write 4 different paraphrased questions separated by a "
                    "newline from the following question: \"") !=
            std::string::npos;

    std::remove("acc_corpus_a.jsonl");
    std::remove("acc_corpus_a.jsonl.meta.json");
    std::remove("acc_corpus_b.jsonl");
    std::remove("acc_corpus_b.jsonl.meta.json");

    std::ostringstream out;
    out << a.questions.size() << " questions, " << a.qa_pairs.size()
        << " qa pairs, bytes " << (bytes_ok ? "equal" : "differ");
    d = out.str();
    return counts_ok && bytes_ok && templates_ok;
  });

  criterion(9, "transfer trajectory is strictly monotone with exact endpoints",
            [](std::string& d) {
    const ValueID subject{"subject", "eng"}, source{"src", "eng"},
        target{"dst", "eng"};
    std::vector<EvalItem> bank{{{{0.0, 0.0}}, source, CorpusTag::Custom},
                               {{{3.0, 4.0}}, target, CorpusTag::Custom}};
    std::vector<std::vector<EvalItem>> checkpoints;
    const int steps = 5;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      checkpoints.push_back({{{{3.0 * t, 4.0 * t}}, subject, CorpusTag::Custom}});
    }
    const auto traj =
        transfer_trajectory(checkpoints, subject, source, target, bank);
    if (traj.size() != checkpoints.size()) return false;
    if (traj.front().d_source != 0.0 || traj.front().d_target != 5.0 ||
        traj.back().d_source != 5.0 || traj.back().d_target != 0.0) {
      d = "endpoints not exact";
      return false;
    }
    for (std::size_t i = 1; i < traj.size(); ++i)
      if (!(traj[i].d_source > traj[i - 1].d_source &&
            traj[i].d_target < traj[i - 1].d_target)) {
        d = "not strictly monotone at step " + std::to_string(i);
        return false;
      }
    d = "6 checkpoints, (0,0)->(3,4) = 5";
    return true;
  });

  criterion(10, "persistence round-trips bitwise and refuses bad versions",
            [](std::string& d) {
    EncoderConfig cfg;
    cfg.feature_dim = 128;
    cfg.hidden_dim = 32;
    cfg.embed_dim = 16;
    Encoder encoder(cfg);
    encoder.init_parameters(99);
    save_checkpoint(encoder, "acc_ckpt_a.uvar");
    Encoder loaded = load_checkpoint("acc_ckpt_a.uvar");
    save_checkpoint(loaded, "acc_ckpt_b.uvar");
    const bool ckpt_ok =
        read_file("acc_ckpt_a.uvar") == read_file("acc_ckpt_b.uvar");

    EmbeddingStore store;
    store.dim = 4;
    std::mt19937_64 rng(1);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    for (int i = 0; i < 10; ++i) {
      std::vector<float> row(4);
      for (float& x : row) x = dist(rng);
      store.rows.push_back(row);
      store.metadata.push_back({"qa" + std::to_string(i),
                                {"llm", "eng"},
                                CorpusTag::Train});
    }
    store_save(store, "acc_store_a.uvem");
    store_save(store_load("acc_store_a.uvem"), "acc_store_b.uvem");
    const bool store_ok =
        read_file("acc_store_a.uvem") == read_file("acc_store_b.uvem") &&
        read_file("acc_store_a.uvem.meta.json") ==
            read_file("acc_store_b.uvem.meta.json");

    bool refused_ckpt = false, refused_store = false;
    {
      std::string bytes = read_file("acc_ckpt_a.uvar");
      bytes[4] = 77;
      std::ofstream("acc_ckpt_a.uvar", std::ios::binary) << bytes;
      try {
        load_checkpoint("acc_ckpt_a.uvar");
      } catch (const FormatError&) {
        refused_ckpt = true;
      }
      bytes = read_file("acc_store_a.uvem");
      bytes[4] = 77;
      std::ofstream("acc_store_a.uvem", std::ios::binary) << bytes;
      try {
        store_load("acc_store_a.uvem");
      } catch (const FormatError&) {
        refused_store = true;
      }
    }
    for (const char* f : {"acc_ckpt_a.uvar", "acc_ckpt_b.uvar",
                          "acc_store_a.uvem", "acc_store_a.uvem.meta.json",
                          "acc_store_b.uvem", "acc_store_b.uvem.meta.json"})
      std::remove(f);
    std::ostringstream out;
    out << "checkpoint " << (ckpt_ok ? "exact" : "differs") << ", store "
        << (store_ok ? "exact" : "differs");
    d = out.str();
    return ckpt_ok && store_ok && refused_ckpt && refused_store;
  });

  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED")
            << " (" << (10 - failures) << "/10)\n";
  return failures == 0 ? 0 : 1;
}
