#include "rgan/trainer.hpp"

#include "rgan/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rgan {

Variant parse_variant(std::string_view text) {
  if (text == "gan1") return Variant::gan1;
  if (text == "gan2") return Variant::gan2;
  if (text == "gan3") return Variant::gan3;
  if (text == "gan4") return Variant::gan4;
  if (text == "custom") return Variant::custom;
  throw std::invalid_argument(fmt::format("unknown variant '{}'", text));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::gan1: return "gan1";
    case Variant::gan2: return "gan2";
    case Variant::gan3: return "gan3";
    case Variant::gan4: return "gan4";
    case Variant::custom: return "custom";
  }
  return "?";
}

CouplingGraph build_variant(Variant variant) {
  switch (variant) {
    case Variant::gan1: return CouplingGraph(1);
    case Variant::gan2: return CouplingGraph(2);
    case Variant::gan3: return CouplingGraph(2, {{1, 0}});
    case Variant::gan4: return CouplingGraph(2, {{0, 1}, {1, 0}});
    case Variant::custom: break;
  }
  throw std::invalid_argument("custom variant requires an explicit coupling graph");
}

CouplingGraph ExperimentSpec::coupling() const {
  if (variant == Variant::custom) {
    if (!graph) throw std::invalid_argument("custom variant requires an explicit coupling graph");
    return *graph;
  }
  return build_variant(variant);
}

void ExperimentSpec::validate() const {
  const auto g = coupling();
  if (g.k() == 0) throw std::invalid_argument("need at least one generator");
  if (iterations == 0) throw std::invalid_argument("iterations must be at least 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (latent_dim == 0) throw std::invalid_argument("latent_dim must be positive");
  if (!(lr_d >= 0.0) || !(lr_g >= 0.0) || !std::isfinite(lr_d) || !std::isfinite(lr_g)) {
    throw std::invalid_argument("learning rates must be finite and non-negative");
  }
  for (auto h : generator_hidden) {
    if (h == 0) throw std::invalid_argument("generator hidden sizes must be positive");
  }
  for (auto h : discriminator_hidden) {
    if (h == 0) throw std::invalid_argument("discriminator hidden sizes must be positive");
  }
  for (auto t : checkpoint_iters) {
    if (t == 0) throw std::invalid_argument("checkpoint iterations are 1-based");
  }
  if (!checkpoint_iters.empty() && checkpoint_samples == 0) {
    throw std::invalid_argument("checkpoint_samples must be positive");
  }
}

std::mt19937_64 RngStreams::make(Stream stream, std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

TrainState initial_state(const ExperimentSpec& spec) {
  spec.validate();
  const RngStreams streams(spec.seed);
  const auto n = spec.band.size();
  auto d_rng = streams.make(RngStreams::Stream::disc_init);
  TrainState state{make_discriminator(discriminator_spec(n, spec.discriminator_hidden), d_rng),
                   {},
                   0};
  const auto k = spec.generator_count();
  for (std::size_t i = 0; i < k; ++i) {
    auto g_rng = streams.make(RngStreams::Stream::gen_init, i);
    state.generators.push_back(
        make_generator(generator_spec(spec.latent_dim, n, spec.generator_hidden), g_rng));
  }
  return state;
}

// ---------------------------------------------------------------------------
// LossTrace

void LossTrace::append(LossRecord record) {
  if (record.loss_g.size() != generators_) {
    throw std::invalid_argument(fmt::format("loss record has {} generator losses, expected {}",
                                            record.loss_g.size(), generators_));
  }
  if (!records_.empty() && record.iteration <= records_.back().iteration) {
    throw std::invalid_argument("loss record iterations must be strictly increasing");
  }
  records_.push_back(std::move(record));
}

std::vector<double> LossTrace::discriminator_column() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.loss_d);
  return out;
}

std::vector<double> LossTrace::generator_column(std::size_t i) const {
  if (i >= generators_) throw std::out_of_range(fmt::format("no generator {}", i));
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.loss_g[i]);
  return out;
}

void LossTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << "iteration,loss_d";
  for (std::size_t i = 0; i < generators_; ++i) out << ",loss_g" << i;
  out << '\n';
  for (const auto& r : records_) {
    out << r.iteration << ',' << format_real(r.loss_d);
    for (double g : r.loss_g) out << ',' << format_real(g);
    out << '\n';
  }
}

LossTrace LossTrace::read_csv(const std::filesystem::path& path) {
  const auto table = read_numeric_csv(path);
  const auto& h = table.header;
  if (h.size() < 3 || h[0] != "iteration" || h[1] != "loss_d") {
    throw std::runtime_error(fmt::format("'{}' is not a loss trace", path.string()));
  }
  for (std::size_t i = 2; i < h.size(); ++i) {
    if (h[i] != fmt::format("loss_g{}", i - 2)) {
      throw std::runtime_error(fmt::format("'{}': unexpected column '{}'", path.string(), h[i]));
    }
  }
  LossTrace trace(h.size() - 2);
  for (const auto& row : table.rows) {
    if (row[0] < 0 || row[0] != std::floor(row[0])) {
      throw std::runtime_error(fmt::format("'{}': bad iteration {}", path.string(), row[0]));
    }
    LossRecord rec{static_cast<std::size_t>(row[0]), row[1], {row.begin() + 2, row.end()}};
    try {
      trace.append(std::move(rec));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("'{}': {}", path.string(), e.what()));
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

double discriminator_step(const ExperimentSpec& spec, TrainState& state, const Matrix& real,
                          const std::vector<Matrix>& fakes) {
  Tape tape;
  Var d_real = discriminate(tape, state.discriminator, tape.constant(real));
  std::vector<Var> d_fakes;
  d_fakes.reserve(fakes.size());
  for (const auto& f : fakes) d_fakes.push_back(discriminate(tape, state.discriminator, tape.constant(f)));
  Var loss = discriminator_loss(tape, d_real, d_fakes, spec.loss.formulation);
  const double value = tape.scalar(loss);
  tape.backward(loss);
  optimizer_step(state.discriminator.net.params(), spec.optimizer, spec.lr_d);
  return value;
}

double generator_step(const ExperimentSpec& spec, const CouplingGraph& graph, TrainState& state,
                      std::size_t i, const Matrix& z) {
  Tape tape;
  Var z_var = tape.constant(z);
  Var own = discriminate(tape, state.discriminator, generate(tape, state.generators[i], z_var),
                         /*trainable=*/false);
  // Slots of generators that i does not compete with are never read.
  std::vector<Var> scores(graph.k(), own);
  for (auto j : graph.opponents(i)) {
    scores[j] = tape.constant(
        discriminate_values(state.discriminator, generate_values(state.generators[j], z)));
  }
  Var loss = generator_loss(tape, i, scores, graph, spec.loss);
  const double value = tape.scalar(loss);
  tape.backward(loss);
  optimizer_step(state.generators[i].net.params(), spec.optimizer, spec.lr_g);
  return value;
}

}  // namespace

TrainResult train(const ExperimentSpec& spec) {
  spec.validate();
  const auto graph = spec.coupling();
  const auto k = graph.k();
  const RngStreams streams(spec.seed);

  TrainResult result{initial_state(spec), LossTrace(k), {}};
  TrainState& state = result.state;

  auto data_rng = streams.make(RngStreams::Stream::data);
  auto gen_latent_rng = streams.make(RngStreams::Stream::gen_latent);
  std::vector<std::mt19937_64> disc_latent_rng;
  std::vector<std::mt19937_64> checkpoint_rng;
  for (std::size_t i = 0; i < k; ++i) {
    disc_latent_rng.push_back(streams.make(RngStreams::Stream::disc_latent, i));
    checkpoint_rng.push_back(streams.make(RngStreams::Stream::checkpoint, i));
  }

  std::vector<std::size_t> checkpoints = spec.checkpoint_iters;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  for (std::size_t t = 1; t <= spec.iterations; ++t) {
    std::string network = "discriminator";
    try {
      const Matrix real = sample_real_matrix(spec.band, spec.batch_size, data_rng);
      std::vector<Matrix> fakes;
      fakes.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        fakes.push_back(generate_values(
            state.generators[i], sample_latent(spec.latent_dim, spec.batch_size, disc_latent_rng[i])));
      }
      LossRecord record{t, discriminator_step(spec, state, real, fakes), {}};

      const Matrix z = sample_latent(spec.latent_dim, spec.batch_size, gen_latent_rng);
      for (std::size_t i = 0; i < k; ++i) {
        network = fmt::format("generator {}", i);
        record.loss_g.push_back(generator_step(spec, graph, state, i, z));
      }
      result.trace.append(std::move(record));
    } catch (const NumericalError& e) {
      throw TrainingError(fmt::format("{} seed {}: iteration {}, {}: {}", to_string(spec.variant),
                                      spec.seed, t, network, e.what()));
    }
    state.iteration = t;

    if (std::binary_search(checkpoints.begin(), checkpoints.end(), t)) {
      for (std::size_t i = 0; i < k; ++i) {
        const Matrix curves = generate_values(
            state.generators[i],
            sample_latent(spec.latent_dim, spec.checkpoint_samples, checkpoint_rng[i]));
        result.checkpoints.push_back({t, i, rows_as_samples(curves)});
      }
    }
  }
  return result;
}

std::string checkpoint_filename(Variant variant, std::uint64_t seed, std::size_t iteration,
                                std::size_t generator) {
  return fmt::format("{}_seed{}_iter{}_gen{}.csv", to_string(variant), seed, iteration, generator);
}

void write_checkpoints(const std::filesystem::path& dir, const ExperimentSpec& spec,
                       const std::vector<Checkpoint>& checkpoints) {
  for (const auto& c : checkpoints) {
    write_curve_csv(dir / checkpoint_filename(spec.variant, spec.seed, c.iteration, c.generator),
                    spec.band, c.curves);
  }
}

std::vector<std::vector<CurveSample>> sample_generators(const ExperimentSpec& spec,
                                                        const TrainState& state,
                                                        std::size_t count) {
  const RngStreams streams(spec.seed);
  std::vector<std::vector<CurveSample>> out;
  for (std::size_t i = 0; i < state.generators.size(); ++i) {
    auto rng = streams.make(RngStreams::Stream::evaluation, i);
    out.push_back(rows_as_samples(
        generate_values(state.generators[i], sample_latent(spec.latent_dim, count, rng))));
  }
  return out;
}

}  // namespace rgan
