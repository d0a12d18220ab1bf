#pragma once

// Post-hoc analysis of loss traces: convergence to the analytic equilibrium
// loss, improvement over the single-generator baseline, loss tracking between
// generators and a sample diversity diagnostic.

#include "rgan/racing_losses.hpp"
#include "rgan/synthdata.hpp"
#include "rgan/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rgan {

enum class Role { discriminator, generator };

/// Loss value at the symmetric equilibrium D = 1/2 under standard_bce:
/// (k + 1) ln 2 for the discriminator and ln 2 for any generator. Throws
/// std::domain_error for paper_literal, which has no finite target.
double equilibrium_target(Role role, std::size_t k, Formulation formulation);

struct ConvergenceSettings {
  double band_frac = 0.01;
  std::size_t window = 500;
  std::size_t smooth = 50;
  /// Override the analytic targets; required under paper_literal.
  std::optional<double> discriminator_target;
  std::optional<double> generator_target;
};

/// Smallest index t such that the trailing `smooth`-point mean ending at
/// each of t, ..., t + window - 1 lies within band_frac * |target| of target.
/// Indices are 0-based offsets into `series`; t is at least smooth - 1.
std::optional<std::size_t> convergence_iteration(std::span<const double> series, double target,
                                                 double band_frac, std::size_t window,
                                                 std::size_t smooth);

struct NetConvergence {
  std::string net;  // "D", "G0", "G1", ...
  std::optional<std::size_t> iteration;
  double target = 0.0;
};

struct ConvergenceReport {
  std::vector<NetConvergence> nets;  // discriminator first, then generators
  ConvergenceSettings settings;

  const NetConvergence& discriminator() const { return nets.front(); }
  std::size_t generator_count() const { return nets.size() - 1; }
  const NetConvergence& generator(std::size_t i) const { return nets.at(i + 1); }
  /// Earliest generator convergence; absent if no generator converged.
  std::optional<std::size_t> best_generator() const;
};

ConvergenceReport analyze_trace(const LossTrace& trace, Formulation formulation,
                                const ConvergenceSettings& settings);

/// Mean |a(t) - b(t)| over t >= burn_in.
double tracking_distance(std::span<const double> a, std::span<const double> b,
                         std::size_t burn_in);

/// Standard deviation (population) of the interpolation coefficient recovered
/// from a least-squares fit of every sample, projected onto the segment
/// between the band's boundary coefficients.
double diversity_metric(std::span<const CurveSample> samples, const CurveBand& band);

/// Interpolation coefficient of a curve, clamped to [0, 1].
double recover_lambda(const Quadratic& q, const CurveBand& band);

/// Median where absent values sort above every present one. The result is
/// absent if a middle element is absent.
std::optional<double> median(std::vector<std::optional<double>> values);

/// Ordering with absent treated as +infinity.
bool less_converged(std::optional<double> a, std::optional<double> b);

/// (base - value) / base * 100, or absent if either operand is absent.
std::optional<double> improvement_pct(std::optional<double> base, std::optional<double> value);

/// Per-variant aggregate convergence iterations (medians over seeds).
struct VariantMedians {
  Variant variant = Variant::gan1;
  std::optional<double> discriminator;
  std::vector<std::optional<double>> generators;
  /// Median over seeds of each run's best generator.
  std::optional<double> best_generator;
  std::optional<double> tracking;
};

struct ImprovementRow {
  Variant variant = Variant::gan1;
  std::optional<double> discriminator_pct;
  std::optional<double> generator_pct;
};

/// D improvement compares discriminator medians; G improvement compares the
/// smallest of the variant's generator medians against the baseline's
/// generator. Throws if the baseline is missing.
std::vector<ImprovementRow> improvement_table(std::span<const VariantMedians> medians,
                                              Variant baseline = Variant::gan1);

struct RunOutcome {
  Variant variant = Variant::gan1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ConvergenceReport report;
  std::optional<double> tracking;            // k = 2 runs only
  std::vector<double> containment;           // per generator, final iteration
  std::vector<double> diversity;             // per generator, final iteration
  double best_containment() const;
};

struct BenchmarkSummary {
  std::vector<RunOutcome> runs;
  std::vector<VariantMedians> medians;
  std::vector<ImprovementRow> improvements;
};

/// Aggregates successful runs into medians and improvements. Variants with
/// no successful run are omitted from the medians.
BenchmarkSummary summarize(std::vector<RunOutcome> runs);

/// Two decimals, or "NA" when absent.
std::string format_pct(std::optional<double> pct);

/// Aligned text tables: median convergence iterations, then improvements.
std::string render_tables(const BenchmarkSummary& summary);

/// `variant,seed,net,convergence_iter,target,improvement_pct`, per run and
/// with seed "median" for the aggregates.
std::string render_summary_csv(const BenchmarkSummary& summary);

/// The same CSV for a single run, without improvements.
std::string render_report_csv(const RunOutcome& run);

}  // namespace rgan
