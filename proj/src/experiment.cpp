#include "rgan/experiment.hpp"

#include "rgan/plot.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace rgan {

std::string run_stem(Variant variant, std::uint64_t seed) {
  return fmt::format("{}_seed{}", to_string(variant), seed);
}

RunArtifacts execute_run(const RunConfig& config, const ExperimentSpec& spec) {
  RunArtifacts art{train(spec), {}};
  RunOutcome& out = art.outcome;
  out.variant = spec.variant;
  out.seed = spec.seed;

  const auto& trace = art.result.trace;
  const auto& conv = config.convergence;
  if (trace.size() >= conv.window + conv.smooth) {
    out.report = analyze_trace(trace, spec.loss.formulation, conv);
  } else {
    // Too short to decide; targets are still reported.
    out.report.settings = conv;
    const auto k = trace.generator_count();
    const double d_target = conv.discriminator_target
                                ? *conv.discriminator_target
                                : equilibrium_target(Role::discriminator, k, spec.loss.formulation);
    const double g_target = conv.generator_target
                                ? *conv.generator_target
                                : equilibrium_target(Role::generator, k, spec.loss.formulation);
    out.report.nets.push_back({"D", std::nullopt, d_target});
    for (std::size_t i = 0; i < k; ++i) {
      out.report.nets.push_back({fmt::format("G{}", i), std::nullopt, g_target});
    }
  }

  if (trace.generator_count() == 2 && config.burn_in < trace.size()) {
    out.tracking =
        tracking_distance(trace.generator_column(0), trace.generator_column(1), config.burn_in);
  }

  const auto samples = sample_generators(spec, art.result.state, config.eval_samples);
  const double tol = config.containment_tol_frac * spec.band.height();
  for (const auto& s : samples) {
    out.containment.push_back(containment_rate(s, spec.band, tol));
    out.diversity.push_back(s.size() >= 2 ? diversity_metric(s, spec.band) : 0.0);
  }
  out.ok = true;
  return art;
}

void write_run_outputs(const RunConfig& config, const ExperimentSpec& spec,
                       const RunArtifacts& artifacts) {
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  const auto stem = run_stem(spec.variant, spec.seed);
  artifacts.result.trace.write_csv(dir / (stem + "_trace.csv"));
  write_checkpoints(dir, spec, artifacts.result.checkpoints);
  {
    std::ofstream report(dir / (stem + "_report.csv"));
    if (!report) throw std::runtime_error(fmt::format("cannot write report in '{}'", dir.string()));
    report << render_report_csv(artifacts.outcome);
  }
  if (config.plots) {
    write_loss_svg(dir / (stem + "_loss.svg"), artifacts.result.trace, stem);
  }
}

BenchmarkSummary run_benchmark(const RunConfig& config, std::size_t workers, bool write_outputs) {
  struct Job {
    ExperimentSpec spec;
    RunOutcome outcome;
  };
  std::vector<Job> jobs;
  for (auto variant : config.variants) {
    for (auto seed : config.seeds) {
      Job job{config.experiment, {}};
      job.spec.variant = variant;
      job.spec.graph.reset();
      job.spec.seed = seed;
      job.outcome.variant = variant;
      job.outcome.seed = seed;
      jobs.push_back(std::move(job));
    }
  }
  if (write_outputs) std::filesystem::create_directories(config.out_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        auto art = execute_run(config, job.spec);
        if (write_outputs) write_run_outputs(config, job.spec, art);
        job.outcome = std::move(art.outcome);
      } catch (const std::exception& e) {
        job.outcome.ok = false;
        job.outcome.error = e.what();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<RunOutcome> outcomes;
  for (auto& job : jobs) outcomes.push_back(std::move(job.outcome));
  auto summary = summarize(std::move(outcomes));

  if (write_outputs) {
    std::ofstream csv(config.out_dir / "summary.csv");
    csv << render_summary_csv(summary);
    std::ofstream txt(config.out_dir / "summary.txt");
    txt << render_tables(summary);
    txt << "\nFinal samples (containment / diversity per generator)\n";
    for (const auto& r : summary.runs) {
      txt << fmt::format("{:<14}", run_stem(r.variant, r.seed));
      if (!r.ok) {
        txt << "failed: " << r.error << '\n';
        continue;
      }
      for (std::size_t i = 0; i < r.containment.size(); ++i) {
        txt << fmt::format("  G{} {:.3f} / {:.3f}", i, r.containment[i], r.diversity[i]);
      }
      txt << '\n';
    }
  }
  return summary;
}

std::size_t worker_count_from_env() {
  if (const char* env = std::getenv("RGAN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace rgan
