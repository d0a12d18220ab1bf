#include "rgan/analysis.hpp"

#include "rgan/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rgan {

double equilibrium_target(Role role, std::size_t k, Formulation formulation) {
  if (formulation != Formulation::standard_bce) {
    throw std::domain_error(
        "no analytic equilibrium target for the paper_literal formulation; supply one");
  }
  if (k == 0) throw std::invalid_argument("equilibrium_target: k must be positive");
  if (role == Role::discriminator) return static_cast<double>(k + 1) * std::numbers::ln2;
  return std::numbers::ln2;
}

std::optional<std::size_t> convergence_iteration(std::span<const double> series, double target,
                                                 double band_frac, std::size_t window,
                                                 std::size_t smooth) {
  if (window == 0 || smooth == 0) {
    throw std::invalid_argument("convergence_iteration: window and smooth must be positive");
  }
  if (window + smooth > series.size()) {
    throw std::invalid_argument(fmt::format(
        "convergence_iteration: window {} + smooth {} exceeds series length {}", window, smooth,
        series.size()));
  }
  const double half_width = band_frac * std::abs(target);
  if (!(half_width > 0.0)) {
    throw std::invalid_argument("convergence_iteration: degenerate band (zero target or width)");
  }

  // inside[t] for t >= smooth - 1: trailing mean ending at t is in the band.
  const std::size_t n = series.size();
  std::vector<char> inside(n, 0);
  for (std::size_t t = smooth - 1; t < n; ++t) {
    double sum = 0.0;
    for (std::size_t s = t + 1 - smooth; s <= t; ++s) sum += series[s];
    inside[t] = std::abs(sum / static_cast<double>(smooth) - target) <= half_width;
  }

  std::size_t run = 0;
  for (std::size_t t = smooth - 1; t < n; ++t) {
    run = inside[t] ? run + 1 : 0;
    if (run == window) return t + 1 - window;
  }
  return std::nullopt;
}

std::optional<std::size_t> ConvergenceReport::best_generator() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i < nets.size(); ++i) {
    const auto& it = nets[i].iteration;
    if (it && (!best || *it < *best)) best = it;
  }
  return best;
}

ConvergenceReport analyze_trace(const LossTrace& trace, Formulation formulation,
                                const ConvergenceSettings& settings) {
  const auto k = trace.generator_count();
  const double d_target = settings.discriminator_target
                              ? *settings.discriminator_target
                              : equilibrium_target(Role::discriminator, k, formulation);
  const double g_target = settings.generator_target
                              ? *settings.generator_target
                              : equilibrium_target(Role::generator, k, formulation);
  auto detect = [&](const std::vector<double>& column, double target) {
    return convergence_iteration(column, target, settings.band_frac, settings.window,
                                 settings.smooth);
  };
  ConvergenceReport report;
  report.settings = settings;
  report.nets.push_back({"D", detect(trace.discriminator_column(), d_target), d_target});
  for (std::size_t i = 0; i < k; ++i) {
    report.nets.push_back(
        {fmt::format("G{}", i), detect(trace.generator_column(i), g_target), g_target});
  }
  return report;
}

double tracking_distance(std::span<const double> a, std::span<const double> b,
                         std::size_t burn_in) {
  if (a.size() != b.size()) throw std::invalid_argument("tracking_distance: length mismatch");
  if (burn_in >= a.size()) throw std::invalid_argument("tracking_distance: burn-in too long");
  double sum = 0.0;
  for (std::size_t t = burn_in; t < a.size(); ++t) sum += std::abs(a[t] - b[t]);
  return sum / static_cast<double>(a.size() - burn_in);
}

double recover_lambda(const Quadratic& q, const CurveBand& band) {
  const Eigen::Vector3d lo = band.lower().coefficients();
  const Eigen::Vector3d dir = band.upper().coefficients() - lo;
  const double len2 = dir.squaredNorm();
  if (len2 == 0.0) throw std::invalid_argument("band boundaries coincide");
  return std::clamp((q.coefficients() - lo).dot(dir) / len2, 0.0, 1.0);
}

double diversity_metric(std::span<const CurveSample> samples, const CurveBand& band) {
  if (samples.size() < 2) throw std::invalid_argument("diversity_metric: need >= 2 samples");
  std::vector<double> lambdas;
  lambdas.reserve(samples.size());
  for (const auto& s : samples) lambdas.push_back(recover_lambda(fit_quadratic(s, band.grid()), band));
  double mean = 0.0;
  for (double l : lambdas) mean += l;
  mean /= static_cast<double>(lambdas.size());
  double var = 0.0;
  for (double l : lambdas) var += (l - mean) * (l - mean);
  return std::sqrt(var / static_cast<double>(lambdas.size()));
}

bool less_converged(std::optional<double> a, std::optional<double> b) {
  if (!a) return false;
  if (!b) return true;
  return *a < *b;
}

std::optional<double> median(std::vector<std::optional<double>> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end(), less_converged);
  const auto n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const auto& lo = values[n / 2 - 1];
  const auto& hi = values[n / 2];
  if (!lo || !hi) return std::nullopt;
  return 0.5 * (*lo + *hi);
}

std::optional<double> improvement_pct(std::optional<double> base, std::optional<double> value) {
  if (!base || !value) return std::nullopt;
  if (*base == 0.0) return std::nullopt;
  return (*base - *value) / *base * 100.0;
}

namespace {

std::optional<double> smallest(const std::vector<std::optional<double>>& values) {
  std::optional<double> best;
  for (const auto& v : values) {
    if (less_converged(v, best)) best = v;
  }
  return best;
}

std::optional<double> as_real(std::optional<std::size_t> v) {
  if (!v) return std::nullopt;
  return static_cast<double>(*v);
}

std::string format_opt(std::optional<double> v) { return v ? format_real(*v) : "NA"; }

}  // namespace

std::vector<ImprovementRow> improvement_table(std::span<const VariantMedians> medians,
                                              Variant baseline) {
  const auto base = std::find_if(medians.begin(), medians.end(),
                                 [&](const VariantMedians& m) { return m.variant == baseline; });
  if (base == medians.end()) {
    throw std::invalid_argument(
        fmt::format("improvement_table: no {} baseline", to_string(baseline)));
  }
  const auto base_g = smallest(base->generators);
  std::vector<ImprovementRow> rows;
  for (const auto& m : medians) {
    if (m.variant == baseline) continue;
    rows.push_back({m.variant, improvement_pct(base->discriminator, m.discriminator),
                    improvement_pct(base_g, smallest(m.generators))});
  }
  return rows;
}

double RunOutcome::best_containment() const {
  if (containment.empty()) return 0.0;
  return *std::max_element(containment.begin(), containment.end());
}

BenchmarkSummary summarize(std::vector<RunOutcome> runs) {
  BenchmarkSummary summary;
  std::stable_sort(runs.begin(), runs.end(), [](const RunOutcome& a, const RunOutcome& b) {
    if (a.variant != b.variant) return a.variant < b.variant;
    return a.seed < b.seed;
  });
  summary.runs = std::move(runs);

  std::vector<Variant> variants;
  for (const auto& r : summary.runs) {
    if (r.ok && std::find(variants.begin(), variants.end(), r.variant) == variants.end()) {
      variants.push_back(r.variant);
    }
  }
  for (auto v : variants) {
    VariantMedians m;
    m.variant = v;
    std::vector<std::optional<double>> d, best, tracking;
    std::vector<std::vector<std::optional<double>>> gens;
    for (const auto& r : summary.runs) {
      if (!r.ok || r.variant != v) continue;
      d.push_back(as_real(r.report.discriminator().iteration));
      best.push_back(as_real(r.report.best_generator()));
      if (r.tracking) tracking.push_back(r.tracking);
      const auto k = r.report.generator_count();
      if (gens.size() < k) gens.resize(k);
      for (std::size_t i = 0; i < k; ++i) gens[i].push_back(as_real(r.report.generator(i).iteration));
    }
    m.discriminator = median(d);
    m.best_generator = median(best);
    m.tracking = median(tracking);
    for (auto& g : gens) m.generators.push_back(median(g));
    summary.medians.push_back(std::move(m));
  }
  const bool has_baseline =
      std::any_of(summary.medians.begin(), summary.medians.end(),
                  [](const VariantMedians& m) { return m.variant == Variant::gan1; });
  if (has_baseline) summary.improvements = improvement_table(summary.medians);
  return summary;
}

std::string format_pct(std::optional<double> pct) {
  return pct ? fmt::format("{:.2f}", *pct) : "NA";
}

std::string render_tables(const BenchmarkSummary& summary) {
  std::ostringstream out;
  std::size_t max_k = 1;
  for (const auto& m : summary.medians) max_k = std::max(max_k, m.generators.size());

  out << "Median iterations to converge\n";
  out << fmt::format("{:<10}{:>10}", "variant", "D");
  for (std::size_t i = 0; i < max_k; ++i) out << fmt::format("{:>10}", fmt::format("G{}", i));
  out << fmt::format("{:>10}{:>12}\n", "G_best", "tracking");
  for (const auto& m : summary.medians) {
    out << fmt::format("{:<10}{:>10}", to_string(m.variant), format_opt(m.discriminator));
    for (std::size_t i = 0; i < max_k; ++i) {
      out << fmt::format("{:>10}", i < m.generators.size() ? format_opt(m.generators[i]) : "--");
    }
    out << fmt::format("{:>10}{:>12}\n", format_opt(m.best_generator),
                       m.tracking ? fmt::format("{:.4f}", *m.tracking) : "--");
  }
  if (!summary.improvements.empty()) {
    out << "\nImprovement over gan1 (%)\n";
    out << fmt::format("{:<10}{:>10}{:>10}\n", "variant", "D", "G");
    for (const auto& row : summary.improvements) {
      out << fmt::format("{:<10}{:>10}{:>10}\n", to_string(row.variant),
                         format_pct(row.discriminator_pct), format_pct(row.generator_pct));
    }
  }
  std::size_t failed = 0;
  for (const auto& r : summary.runs) failed += r.ok ? 0 : 1;
  if (failed > 0) out << fmt::format("\n{} run(s) failed\n", failed);
  return out.str();
}

namespace {

const RunOutcome* baseline_run(const BenchmarkSummary& summary, std::uint64_t seed) {
  for (const auto& r : summary.runs) {
    if (r.ok && r.variant == Variant::gan1 && r.seed == seed) return &r;
  }
  return nullptr;
}

void append_run_rows(std::ostringstream& out, const RunOutcome& r, const RunOutcome* base) {
  const auto prefix = fmt::format("{},{}", to_string(r.variant), r.seed);
  if (!r.ok) {
    out << prefix << ",error,NA,NA,\n";
    return;
  }
  const auto& d = r.report.discriminator();
  std::string d_pct;
  std::string g_pct;
  if (base != nullptr && r.variant != Variant::gan1) {
    d_pct = format_pct(improvement_pct(as_real(base->report.discriminator().iteration),
                                       as_real(d.iteration)));
    g_pct = format_pct(improvement_pct(as_real(base->report.best_generator()),
                                       as_real(r.report.best_generator())));
  }
  out << prefix << ",D," << format_opt(as_real(d.iteration)) << ',' << format_real(d.target) << ','
      << d_pct << '\n';
  for (std::size_t i = 0; i < r.report.generator_count(); ++i) {
    const auto& g = r.report.generator(i);
    out << prefix << ',' << g.net << ',' << format_opt(as_real(g.iteration)) << ','
        << format_real(g.target) << ",\n";
  }
  const double g_target = r.report.generator_count() > 0 ? r.report.generator(0).target : 0.0;
  out << prefix << ",G_best," << format_opt(as_real(r.report.best_generator())) << ','
      << format_real(g_target) << ',' << g_pct << '\n';
}

constexpr const char* kSummaryHeader = "variant,seed,net,convergence_iter,target,improvement_pct\n";

}  // namespace

std::string render_report_csv(const RunOutcome& run) {
  std::ostringstream out;
  out << kSummaryHeader;
  append_run_rows(out, run, nullptr);
  return out.str();
}

std::string render_summary_csv(const BenchmarkSummary& summary) {
  std::ostringstream out;
  out << kSummaryHeader;
  for (const auto& r : summary.runs) append_run_rows(out, r, baseline_run(summary, r.seed));

  for (const auto& m : summary.medians) {
    const RunOutcome* sample = nullptr;
    for (const auto& r : summary.runs) {
      if (r.ok && r.variant == m.variant) {
        sample = &r;
        break;
      }
    }
    const double d_target = sample->report.discriminator().target;
    const double g_target = sample->report.generator(0).target;
    const ImprovementRow* imp = nullptr;
    for (const auto& row : summary.improvements) {
      if (row.variant == m.variant) imp = &row;
    }
    const auto prefix = fmt::format("{},median", to_string(m.variant));
    out << prefix << ",D," << format_opt(m.discriminator) << ',' << format_real(d_target) << ','
        << (imp ? format_pct(imp->discriminator_pct) : "") << '\n';
    for (std::size_t i = 0; i < m.generators.size(); ++i) {
      out << prefix << ",G" << i << ',' << format_opt(m.generators[i]) << ','
          << format_real(g_target) << ",\n";
    }
    out << prefix << ",G_min," << format_opt(smallest(m.generators)) << ','
        << format_real(g_target) << ',' << (imp ? format_pct(imp->generator_pct) : "") << '\n';
    out << prefix << ",G_best," << format_opt(m.best_generator) << ',' << format_real(g_target)
        << ",\n";
  }
  return out.str();
}

}  // namespace rgan
