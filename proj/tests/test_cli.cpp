#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = UNIVAR_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > cli_stdout.txt 2>&1";
  const int status = std::system(cmd.c_str());
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_config(const std::string& path, const std::string& dir) {
  std::ofstream out(path);
  out << "[corpus]\n"
         "questions_per_value = 2\n"
         "paraphrases = 2\n"
         "[sampler]\n"
         "lambda = 2\n"
         "[trainer]\n"
         "batch_size = 2\n"
         "max_steps = 8\n"
         "warmup_steps = 4\n"
         "checkpoint_every = 4\n"
         "[encoder]\n"
         "feature_dim = 512\n"
         "hidden_dim = 32\n"
         "embed_dim = 16\n"
         "[probe]\n"
         "epochs = 2\n"
         "batch_size = 64\n"
         "[eval]\n"
         "k = 3\n"
         "[roster]\n"
         "alpha = \"eng,fra\"\n"
         "beta = \"eng\"\n"
         "[paths]\n"
         "registry = \""
      << std::string(UNIVAR_SOURCE_DIR) << "/data/reference_values.json\"\n"
      << "corpus = \"" << dir << "/corpus.jsonl\"\n"
      << "checkpoint = \"" << dir << "/model.uvar\"\n"
      << "store = \"" << dir << "/embeddings.uvem\"\n"
      << "report = \"" << dir << "/report.json\"\n"
      << "map = \"" << dir << "/map.csv\"\n";
}

}  // namespace

TEST_CASE("selfcheck passes") { CHECK(run("selfcheck") == 0); }

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("no-such-subcommand") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("domain errors exit with code 1") {
  fs::create_directories("cli_err");
  std::ofstream("cli_err/bad.toml") << "[clients]\ntype = \"openai\"\n";
  CHECK(run("build-corpus --config cli_err/bad.toml") == 1);
  fs::remove_all("cli_err");
}

TEST_CASE("full pipeline runs and is byte-reproducible") {
  fs::remove_all("cli_run_a");
  fs::remove_all("cli_run_b");
  fs::create_directories("cli_run_a");
  fs::create_directories("cli_run_b");
  write_config("cli_run_a/run.toml", "cli_run_a");
  write_config("cli_run_b/run.toml", "cli_run_b");

  REQUIRE(run("build-corpus --config cli_run_a/run.toml --seed 9") == 0);
  REQUIRE(run("build-corpus --config cli_run_b/run.toml --seed 9") == 0);
  CHECK(read_file("cli_run_a/corpus.jsonl") ==
        read_file("cli_run_b/corpus.jsonl"));
  CHECK(read_file("cli_run_a/corpus.jsonl.requests.log") ==
        read_file("cli_run_b/corpus.jsonl.requests.log"));
  CHECK(!read_file("cli_run_a/corpus.jsonl").empty());

  // Logged prompts carry the template text with only the value filled in.
  const std::string log = read_file("cli_run_a/corpus.jsonl.requests.log");
  CHECK(log.find("Create 50 scenarios highlighting") != std::string::npos);
  CHECK(log.find("Given a premise about \"") != std::string::npos);
  CHECK(log.find("Write 4 different paraphrased questions") !=
        std::string::npos);

  REQUIRE(run("train --config cli_run_a/run.toml --seed 9") == 0);
  REQUIRE(run("train --config cli_run_b/run.toml --seed 9") == 0);
  CHECK(read_file("cli_run_a/model.uvar") == read_file("cli_run_b/model.uvar"));
  CHECK(!read_file("cli_run_a/model.uvar").empty());

  REQUIRE(run("embed --config cli_run_a/run.toml --seed 9") == 0);
  REQUIRE(run("embed --config cli_run_b/run.toml --seed 9") == 0);
  CHECK(read_file("cli_run_a/embeddings.uvem") ==
        read_file("cli_run_b/embeddings.uvem"));

  REQUIRE(run("eval --config cli_run_a/run.toml --seed 9") == 0);
  const std::string report = read_file("cli_run_a/report.json");
  CHECK(report.find("\"knn\"") != std::string::npos);
  CHECK(report.find("macro_f1") != std::string::npos);
  CHECK(report.find("balanced_average") != std::string::npos);

  REQUIRE(run("map --config cli_run_a/run.toml --seed 9") == 0);
  CHECK(!read_file("cli_run_a/map.csv").empty());
  CHECK(!read_file("cli_run_a/map.csv.meta.json").empty());

  // Manifests accompany every artifact.
  CHECK(read_file("cli_run_a/corpus.jsonl.manifest.json").find("config_digest") !=
        std::string::npos);
  CHECK(read_file("cli_run_a/model.uvar.manifest.json").find("seed") !=
        std::string::npos);

  fs::remove_all("cli_run_a");
  fs::remove_all("cli_run_b");
  fs::remove("cli_stdout.txt");
}

TEST_CASE("different seeds give different checkpoints") {
  fs::remove_all("cli_seed");
  fs::create_directories("cli_seed");
  write_config("cli_seed/run.toml", "cli_seed");
  REQUIRE(run("build-corpus --config cli_seed/run.toml --seed 1") == 0);
  REQUIRE(run("train --config cli_seed/run.toml --seed 1 --out cli_seed/a.uvar") == 0);
  REQUIRE(run("train --config cli_seed/run.toml --seed 2 --out cli_seed/b.uvar") == 0);
  CHECK(read_file("cli_seed/a.uvar") != read_file("cli_seed/b.uvar"));
  fs::remove_all("cli_seed");
  fs::remove("cli_stdout.txt");
}
