#include "rgan/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rgan;

namespace {

// Scans every start index and every window position directly.
std::optional<std::size_t> brute_force_convergence(const std::vector<double>& s, double target,
                                                   double band_frac, std::size_t window,
                                                   std::size_t smooth) {
  const double half = band_frac * std::abs(target);
  auto smoothed = [&](std::size_t t) {
    double sum = 0.0;
    for (std::size_t j = 0; j < smooth; ++j) sum += s[t - j];
    return sum / static_cast<double>(smooth);
  };
  for (std::size_t t = smooth - 1; t + window <= s.size(); ++t) {
    bool ok = true;
    for (std::size_t u = t; u < t + window && ok; ++u) ok = std::abs(smoothed(u) - target) <= half;
    if (ok) return t;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("equilibrium targets") {
  using std::numbers::ln2;
  for (std::size_t k : {1u, 2u, 4u}) {
    CHECK(std::abs(equilibrium_target(Role::discriminator, k, Formulation::standard_bce) -
                   static_cast<double>(k + 1) * ln2) < 1e-12);
    CHECK(std::abs(equilibrium_target(Role::generator, k, Formulation::standard_bce) - ln2) < 1e-12);
  }
  CHECK_THROWS_AS(equilibrium_target(Role::discriminator, 1, Formulation::paper_literal),
                  std::domain_error);
}

TEST_CASE("convergence_iteration examples") {
  const double target = 1.386;
  CHECK(convergence_iteration(std::vector<double>(600, target), target, 0.01, 500, 50) == 49u);
  CHECK(convergence_iteration(std::vector<double>(600, target), target, 0.01, 500, 1) == 0u);

  std::vector<double> step(700, target);
  for (std::size_t t = 0; t < 100; ++t) step[t] = target * 1.1;
  CHECK(convergence_iteration(step, target, 0.01, 500, 1) == 100u);
  CHECK(brute_force_convergence(step, target, 0.01, 500, 1) == 100u);

  std::vector<double> alternating(800);
  for (std::size_t t = 0; t < alternating.size(); ++t) alternating[t] = target * (t % 2 ? 1.05 : 0.95);
  CHECK_FALSE(convergence_iteration(alternating, target, 0.01, 500, 1).has_value());
  // Smoothing over an even length averages the alternation away.
  CHECK(convergence_iteration(alternating, target, 0.01, 500, 2).has_value());
}

TEST_CASE("convergence_iteration errors") {
  const std::vector<double> s(100, 1.0);
  CHECK_THROWS_AS(convergence_iteration(s, 1.0, 0.01, 90, 20), std::invalid_argument);
  CHECK_THROWS_AS(convergence_iteration(s, 0.0, 0.01, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(convergence_iteration(s, 1.0, 0.01, 0, 1), std::invalid_argument);
}

TEST_CASE("convergence_iteration agrees with a brute-force scan on random walks") {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> noise(0.0, 0.004);
  std::uniform_int_distribution<int> len(40, 160);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = len(rng);
    const std::size_t window = 1 + trial % 17;
    const std::size_t smooth = 1 + trial % 9;
    std::vector<double> s(n);
    double x = 1.08;
    for (auto& v : s) {
      x += noise(rng) - 0.1 * (x - 1.0) * 0.1;
      v = x;
    }
    for (double band : {0.005, 0.01, 0.03}) {
      INFO("trial " << trial << " band " << band);
      CHECK(convergence_iteration(s, 1.0, band, window, smooth) ==
            brute_force_convergence(s, 1.0, band, window, smooth));
    }
  }
}

TEST_CASE("widening the band never delays convergence") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(400);
    for (std::size_t t = 0; t < s.size(); ++t) s[t] = 2.0 + 0.5 * std::exp(-0.02 * t) + noise(rng);
    std::optional<std::size_t> previous;
    bool seen = false;
    for (double band : {0.005, 0.01, 0.02, 0.05, 0.1, 0.3}) {
      const auto it = convergence_iteration(s, 2.0, band, 50, 10);
      if (seen && previous) {
        REQUIRE(it.has_value());
        CHECK(*it <= *previous);
      }
      previous = it;
      seen = true;
    }
  }
}

TEST_CASE("analyze_trace reports every network") {
  LossTrace trace(2);
  const double ln2 = std::numbers::ln2;
  for (std::size_t t = 1; t <= 40; ++t) trace.append({t, 3 * ln2, {t > 10 ? ln2 : 2.0, 2.0}});
  ConvergenceSettings settings;
  settings.window = 20;
  settings.smooth = 1;
  const auto report = analyze_trace(trace, Formulation::standard_bce, settings);
  REQUIRE(report.nets.size() == 3);
  CHECK(report.discriminator().net == "D");
  CHECK(report.discriminator().iteration == 0u);
  CHECK(report.generator(0).iteration == 10u);
  CHECK_FALSE(report.generator(1).iteration.has_value());
  CHECK(report.best_generator() == 10u);

  CHECK_THROWS_AS(analyze_trace(trace, Formulation::paper_literal, settings), std::domain_error);
  settings.discriminator_target = 3 * ln2;
  settings.generator_target = 2.0;
  const auto custom = analyze_trace(trace, Formulation::paper_literal, settings);
  CHECK(custom.generator(1).iteration == 0u);
}

TEST_CASE("improvement arithmetic on reference iteration counts") {
  struct Row {
    double d, g0, g1, d_pct, g_pct;
  };
  const double base_d = 9348, base_g = 8107;
  for (auto r : {Row{8547, 4484, 5872, 8.57, 44.69}, Row{8969, 5364, 6910, 4.05, 33.83},
                 Row{7728, 6049, 4944, 17.33, 39.02}}) {
    CHECK(std::abs(*improvement_pct(base_d, r.d) - r.d_pct) <= 0.01);
    CHECK(std::abs(*improvement_pct(base_g, std::min(r.g0, r.g1)) - r.g_pct) <= 0.01);
  }
  CHECK_FALSE(improvement_pct(std::nullopt, 5.0).has_value());
  CHECK_FALSE(improvement_pct(5.0, std::nullopt).has_value());
  CHECK(format_pct(17.3289) == "17.33");
  CHECK(format_pct(std::nullopt) == "NA");
}

TEST_CASE("improvement_table uses the best generator median") {
  std::vector<VariantMedians> medians{
      {Variant::gan1, 9348, {8107}, 8107, std::nullopt},
      {Variant::gan4, 7728, {6049, 4944}, 4944, 0.1},
  };
  const auto rows = improvement_table(medians);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].variant == Variant::gan4);
  CHECK(format_pct(rows[0].discriminator_pct) == "17.33");
  CHECK(format_pct(rows[0].generator_pct) == "39.02");
  std::vector<VariantMedians> no_base{{Variant::gan2, 1, {1, 1}, 1, 0.0}};
  CHECK_THROWS_AS(improvement_table(no_base), std::invalid_argument);
}

TEST_CASE("median with absent values") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({1.0, std::nullopt, 2.0}) == 2.0);
  CHECK_FALSE(median({1.0, std::nullopt, std::nullopt}).has_value());
  CHECK_FALSE(median({1.0, 2.0, std::nullopt, std::nullopt}).has_value());
  CHECK_FALSE(median({}).has_value());
}

TEST_CASE("tracking distance") {
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(tracking_distance(a, a, 0) == 0.0);
  const std::vector<double> b{9, 2.5, 3.5, 4.5};
  CHECK(tracking_distance(a, b, 1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tracking_distance(a, b, 4), std::invalid_argument);
  CHECK_THROWS_AS(tracking_distance(a, std::vector<double>{1, 2}, 0), std::invalid_argument);
}

TEST_CASE("diversity metric") {
  const auto band = CurveBand::default_band();
  std::vector<CurveSample> same(10, curve_at(band, 0.3));
  CHECK(diversity_metric(same, band) < 1e-9);

  std::vector<CurveSample> ends{curve_at(band, 0.0), curve_at(band, 1.0)};
  CHECK(diversity_metric(ends, band) == doctest::Approx(0.5).epsilon(1e-9));

  // Uniform lambda has standard deviation 1/sqrt(12).
  std::mt19937_64 rng(123);
  const auto real = sample_real(band, 10000, rng);
  CHECK(std::abs(diversity_metric(real, band) - 1.0 / std::sqrt(12.0)) < 0.01);
}

TEST_CASE("summary aggregation and CSV") {
  auto outcome = [](Variant v, std::uint64_t seed, std::optional<std::size_t> d,
                    std::vector<std::optional<std::size_t>> gs) {
    RunOutcome run;
    run.variant = v;
    run.seed = seed;
    run.ok = true;
    run.report.nets.push_back({"D", d, 1.0});
    for (std::size_t i = 0; i < gs.size(); ++i) run.report.nets.push_back({"G" + std::to_string(i), gs[i], 0.5});
    run.containment.assign(gs.size(), 1.0);
    run.diversity.assign(gs.size(), 0.2);
    return run;
  };
  std::vector<RunOutcome> runs{
      outcome(Variant::gan4, 0, 50, {40, 30}), outcome(Variant::gan1, 1, 90, {std::nullopt}),
      outcome(Variant::gan1, 0, 100, {80}), outcome(Variant::gan4, 1, std::nullopt, {60, 70})};
  const auto summary = summarize(runs);
  CHECK(summary.runs.front().variant == Variant::gan1);
  CHECK(summary.runs.front().seed == 0);
  REQUIRE(summary.medians.size() == 2);
  CHECK(summary.medians[0].discriminator == 95.0);
  CHECK_FALSE(summary.medians[0].best_generator.has_value());
  CHECK_FALSE(summary.medians[1].discriminator.has_value());
  CHECK(summary.medians[1].best_generator == 45.0);

  const auto csv = render_summary_csv(summary);
  CHECK(csv.rfind("variant,seed,net,convergence_iter,target,improvement_pct\n", 0) == 0);
  CHECK(csv.find("gan4,0,D,50,1,50.00\n") != std::string::npos);
  CHECK(csv.find("gan1,median,D,95,1,\n") != std::string::npos);
  CHECK(render_summary_csv(summary) == csv);
  CHECK(render_tables(summary).find("gan4") != std::string::npos);
}
