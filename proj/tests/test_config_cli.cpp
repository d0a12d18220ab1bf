#include "rgan/config.hpp"
#include "rgan/csv.hpp"
#include "rgan/plot.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace rgan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("rgan_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RGAN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

// Keeps CLI runs quick.
const std::string kSmall =
    "--batch-size 8 --latent-dim 4 --set models.generator_hidden=[8] "
    "--set models.discriminator_hidden=[8] --set experiment.checkpoint_iters=[1] "
    "--set experiment.checkpoint_samples=4 --set analysis.eval_samples=8";

}  // namespace

TEST_CASE("empty document gives defaults") {
  const auto cfg = parse_config(nlohmann::json::object());
  CHECK(cfg.experiment.variant == Variant::gan4);
  CHECK(cfg.experiment.iterations == 10000);
  CHECK(cfg.convergence.window == 500);
  CHECK(cfg.seeds.size() == 10);
}

TEST_CASE("unknown keys and bad types are rejected") {
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"experiment": {"iterashuns": 5}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"extra": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"experiment": {"iterations": "many"}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"experiment": {"variant": "gan9"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"loss": {"formulation": "paper_literal"}})")),
                  ConfigError);
}

TEST_CASE("custom graphs and overrides") {
  auto doc = nlohmann::json::parse(R"({"experiment": {"variant": "custom", "graph": {"k": 3, "edges": [[0, 2]]}}})");
  auto cfg = parse_config(doc);
  CHECK(cfg.experiment.coupling() == CouplingGraph(3, {{0, 2}}));

  apply_override(doc, "experiment.iterations", "12");
  apply_override(doc, "loss.hinge_convention", "lead_penalty");
  apply_override(doc, "analysis.window", "7");
  cfg = parse_config(doc);
  CHECK(cfg.experiment.iterations == 12);
  CHECK(cfg.experiment.loss.hinge_convention == HingeConvention::lead_penalty);
  CHECK(cfg.convergence.window == 7);

  CHECK(parse_config(to_json(cfg)).experiment.coupling() == cfg.experiment.coupling());
  CHECK(to_json(parse_config(to_json(cfg))) == to_json(cfg));
}

TEST_CASE("missing or malformed config file") {
  CHECK_THROWS_AS(load_config_document("/nonexistent/rgan.json"), ConfigError);
  const auto dir = scratch("bad_json");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config_document(dir / "bad.json"), ConfigError);
}

TEST_CASE("cli: config errors exit with status 2") {
  CHECK(cli("run --config /nonexistent/rgan.json") == 2);
  CHECK(cli("run --variant gan7") == 2);
  CHECK(cli("run --set experiment.bogus=1") == 2);
}

TEST_CASE("cli: run writes a trace with one row per iteration") {
  const auto dir = scratch("run");
  REQUIRE(cli("run --variant gan4 --iterations 10 --seed 3 --out-dir " + dir.string() + " " + kSmall) == 0);
  const auto trace = read_numeric_csv(dir / "gan4_seed3_trace.csv");
  CHECK(trace.header == std::vector<std::string>{"iteration", "loss_d", "loss_g0", "loss_g1"});
  CHECK(trace.rows.size() == 10);
  CHECK(fs::exists(dir / "gan4_seed3_iter1_gen1.csv"));
  CHECK(fs::exists(dir / "gan4_seed3_report.csv"));
  CHECK(fs::exists(dir / "gan4_seed3_loss.svg"));
}

TEST_CASE("cli: flags override the config file") {
  const auto dir = scratch("precedence");
  std::ofstream(dir / "cfg.json") << R"({"experiment": {"seed": 5, "variant": "gan2", "iterations": 4}})";
  REQUIRE(cli("run -c " + (dir / "cfg.json").string() + " --seed 9 --no-plots --out-dir " + dir.string() +
              " " + kSmall) == 0);
  CHECK(fs::exists(dir / "gan2_seed9_trace.csv"));
  CHECK_FALSE(fs::exists(dir / "gan2_seed5_trace.csv"));
  CHECK_FALSE(fs::exists(dir / "gan2_seed9_loss.svg"));
}

TEST_CASE("cli: bench covers every variant and seed") {
  const auto dir = scratch("bench");
  REQUIRE(cli("bench --iterations 6 --seeds 0,1,2 --no-plots --out-dir " + dir.string() + " " + kSmall) == 0);
  std::size_t traces = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().string().ends_with("_trace.csv")) ++traces;
  }
  CHECK(traces == 12);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("variant,seed,net,convergence_iter,target,improvement_pct", 0) == 0);
  CHECK(summary.find("gan1,median,D,") != std::string::npos);
  CHECK(fs::exists(dir / "summary.txt"));
}

TEST_CASE("cli: plot draws one series per network") {
  const auto dir = scratch("plot");
  REQUIRE(cli("run --variant gan4 --iterations 5 --no-plots --out-dir " + dir.string() + " " + kSmall) == 0);
  REQUIRE(cli("plot " + (dir / "gan4_seed0_trace.csv").string() + " --out-dir " + dir.string()) == 0);
  const auto svg = slurp(dir / "gan4_seed0_loss.svg");
  CHECK(count(svg, "<polyline class=\"series\"") == 3);
  CHECK(svg.find("data-label=\"D\"") != std::string::npos);
  CHECK(svg.find("data-label=\"G1\"") != std::string::npos);
  CHECK(svg.find("stroke=\"" + std::string(series_color(0))) != std::string::npos);
}

TEST_CASE("empty traces are not plotted") {
  const auto dir = scratch("empty");
  CHECK_THROWS_AS(render_loss_svg(LossTrace(2), "empty"), std::invalid_argument);
  std::ofstream(dir / "empty_trace.csv") << "iteration,loss_d,loss_g0\n";
  CHECK(cli("plot " + (dir / "empty_trace.csv").string() + " --out-dir " + dir.string()) != 0);
  CHECK_FALSE(fs::exists(dir / "empty_loss.svg"));
}
