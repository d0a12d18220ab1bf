// racing_gan: run single experiments, the four-variant benchmark, and loss
// plots.
//
//   racing_gan run   --config cfg.json [--variant gan4] [--seed 7] ...
//   racing_gan bench --config cfg.json [--seeds 0,1,2] ...
//   racing_gan plot  out/gan4_seed0_trace.csv [...] [--out-dir plots]
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 numerical failure during training.

#include "rgan/config.hpp"
#include "rgan/experiment.hpp"
#include "rgan/plot.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::string> variant;
  std::optional<std::string> iterations;
  std::optional<std::string> out_dir;
  std::optional<std::string> formulation;
  std::optional<std::string> hinge_convention;
  std::optional<std::string> batch_size;
  std::optional<std::string> optimizer;
  std::optional<std::string> lr_d;
  std::optional<std::string> lr_g;
  std::optional<std::string> latent_dim;
  bool no_plots = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config,-c", o.config, "JSON configuration file");
  cmd->add_option("--variant", o.variant, "gan1 | gan2 | gan3 | gan4 | custom");
  cmd->add_option("--iterations", o.iterations, "Training iterations");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--formulation", o.formulation, "standard_bce | paper_literal");
  cmd->add_option("--hinge-convention", o.hinge_convention, "lag_penalty | lead_penalty");
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--optimizer", o.optimizer, "sgd | adam");
  cmd->add_option("--lr-d", o.lr_d, "Discriminator learning rate");
  cmd->add_option("--lr-g", o.lr_g, "Generator learning rate");
  cmd->add_option("--latent-dim", o.latent_dim);
  cmd->add_flag("--no-plots", o.no_plots, "Skip SVG loss plots");
  cmd->add_option("--set", o.sets, "Override any config key: section.key=value")->take_all();
}

// Flags beat the config file; --set entries are applied last.
nlohmann::json build_document(const CommonOptions& o) {
  nlohmann::json doc = o.config ? rgan::load_config_document(*o.config) : nlohmann::json::object();
  auto set = [&](const std::optional<std::string>& v, std::string_view key) {
    if (v) rgan::apply_override(doc, key, *v);
  };
  auto set_text = [&](const std::optional<std::string>& v, std::string_view key) {
    if (v) rgan::apply_override(doc, key, nlohmann::json(*v).dump());
  };
  set_text(o.variant, "experiment.variant");
  set(o.iterations, "experiment.iterations");
  set_text(o.out_dir, "output.out_dir");
  set_text(o.formulation, "loss.formulation");
  set_text(o.hinge_convention, "loss.hinge_convention");
  set(o.batch_size, "experiment.batch_size");
  set_text(o.optimizer, "experiment.optimizer");
  set(o.lr_d, "experiment.lr_d");
  set(o.lr_g, "experiment.lr_g");
  set(o.latent_dim, "experiment.latent_dim");
  if (o.no_plots) rgan::apply_override(doc, "output.plots", "false");
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw rgan::ConfigError(fmt::format("--set '{}' needs key=value", s));
    rgan::apply_override(doc, s.substr(0, eq), s.substr(eq + 1));
  }
  return doc;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      seeds.push_back(v);
    } catch (const std::exception&) {
      throw rgan::ConfigError(fmt::format("bad seed '{}' in --seeds", item));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

int cmd_run(const CommonOptions& o, const std::optional<std::string>& seed) {
  rgan::RunConfig cfg;
  try {
    auto doc = build_document(o);
    if (seed) rgan::apply_override(doc, "experiment.seed", *seed);
    cfg = rgan::parse_config(doc);
  } catch (const rgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto art = rgan::execute_run(cfg, cfg.experiment);
    rgan::write_run_outputs(cfg, cfg.experiment, art);
    const auto& out = art.outcome;
    std::cout << rgan::render_report_csv(out);
    for (std::size_t i = 0; i < out.containment.size(); ++i) {
      std::cout << fmt::format("G{}: containment {:.4f}, diversity {:.4f}\n", i,
                               out.containment[i], out.diversity[i]);
    }
    if (out.tracking) std::cout << fmt::format("tracking distance {:.6f}\n", *out.tracking);
  } catch (const rgan::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_bench(const CommonOptions& o, const std::optional<std::string>& seeds) {
  rgan::RunConfig cfg;
  try {
    auto doc = build_document(o);
    if (seeds) doc["bench"]["seeds"] = parse_seed_list(*seeds);
    cfg = rgan::parse_config(doc);
    if (cfg.seeds.empty()) throw rgan::ConfigError("'bench.seeds' must not be empty");
  } catch (const rgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto summary = rgan::run_benchmark(cfg, rgan::worker_count_from_env(), true);
    std::cout << rgan::render_tables(summary);
    bool all_ok = true;
    for (const auto& r : summary.runs) {
      if (!r.ok) {
        all_ok = false;
        std::cerr << rgan::run_stem(r.variant, r.seed) << " failed: " << r.error << '\n';
      }
    }
    return all_ok ? kExitOk : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_plot(const std::vector<std::string>& traces, const std::optional<std::string>& out_dir) {
  int status = kExitOk;
  for (const auto& path_text : traces) {
    const std::filesystem::path path(path_text);
    try {
      const auto trace = rgan::LossTrace::read_csv(path);
      auto stem = path.stem().string();
      const std::string suffix = "_trace";
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
      const auto dir = out_dir ? std::filesystem::path(*out_dir) : path.parent_path();
      if (!dir.empty()) std::filesystem::create_directories(dir);
      const auto target = dir / (stem + "_loss.svg");
      rgan::write_loss_svg(target, trace, stem);
      std::cout << target.string() << '\n';
    } catch (const std::exception& e) {
      std::cerr << "plot error: " << e.what() << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-generator GAN training with hinge-coupled generator losses"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::optional<std::string> seed;
  auto* run = app.add_subcommand("run", "Train and analyze one (variant, seed)");
  add_common(run, run_opts);
  run->add_option("--seed", seed, "Seed (overrides the config file)");

  CommonOptions bench_opts;
  std::optional<std::string> seeds;
  auto* bench = app.add_subcommand("bench", "Run every variant over every seed");
  add_common(bench, bench_opts);
  bench->add_option("--seeds", seeds, "Comma-separated seed list");

  std::vector<std::string> traces;
  std::optional<std::string> plot_dir;
  auto* plot = app.add_subcommand("plot", "Render SVG loss curves from trace CSVs");
  plot->add_option("traces", traces, "Trace CSV files")->required();
  plot->add_option("--out-dir", plot_dir, "Directory for the SVG files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(run_opts, seed);
  if (*bench) return cmd_bench(bench_opts, seeds);
  return cmd_plot(traces, plot_dir);
}
