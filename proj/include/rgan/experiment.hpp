#pragma once

// Single runs and the multi-seed benchmark over the four named variants, with
// all artifacts written under the configured output directory.

#include "rgan/analysis.hpp"
#include "rgan/config.hpp"
#include "rgan/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace rgan {

struct RunArtifacts {
  TrainResult result;
  RunOutcome outcome;
};

std::string run_stem(Variant variant, std::uint64_t seed);

/// Trains `spec`, analyzes the trace and evaluates final samples. Training
/// errors propagate as exceptions.
RunArtifacts execute_run(const RunConfig& config, const ExperimentSpec& spec);

/// Writes `<stem>_trace.csv`, checkpoint dumps, `<stem>_report.csv` and,
/// when plots are on, `<stem>_loss.svg` into config.out_dir.
void write_run_outputs(const RunConfig& config, const ExperimentSpec& spec,
                       const RunArtifacts& artifacts);

/// Runs every configured variant for every configured seed on `workers`
/// threads. Failed runs are recorded in the summary rather than thrown. When
/// `write_outputs` is set, per-run files plus summary.csv and summary.txt are
/// written to config.out_dir.
BenchmarkSummary run_benchmark(const RunConfig& config, std::size_t workers, bool write_outputs);

/// RGAN_WORKERS if set to a positive integer, otherwise hardware concurrency.
std::size_t worker_count_from_env();

}  // namespace rgan
