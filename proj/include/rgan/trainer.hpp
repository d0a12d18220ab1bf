#pragma once

// Alternating adversarial training of one discriminator against k coupled
// generators.
//
// Per iteration: one discriminator step on a real batch plus one detached fake
// batch per generator, then one step per generator in index order. All
// generator steps in an iteration share one freshly drawn latent batch so the
// hinge compares D(G_i(z)) and D(G_j(z)) under the same z.
//
// Randomness is split into independent streams derived from the seed: real
// data, per-generator latents for the discriminator step, the shared
// generator-step latents, per-network initialization and per-generator
// checkpoint sampling. Adding a generator therefore leaves the draws seen by
// the existing ones untouched.

#include "rgan/diffcore.hpp"
#include "rgan/models.hpp"
#include "rgan/racing_losses.hpp"
#include "rgan/synthdata.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rgan {

enum class Variant { gan1, gan2, gan3, gan4, custom };

Variant parse_variant(std::string_view text);
std::string_view to_string(Variant v);
inline constexpr Variant kNamedVariants[] = {Variant::gan1, Variant::gan2, Variant::gan3,
                                             Variant::gan4};

/// gan1: one generator. gan2: two independent generators. gan3: generator 1
/// competes against generator 0 only. gan4: both compete with each other.
/// Throws for Variant::custom, which needs an explicit graph.
CouplingGraph build_variant(Variant variant);

struct ExperimentSpec {
  Variant variant = Variant::gan4;
  /// Required for Variant::custom, ignored otherwise.
  std::optional<CouplingGraph> graph;
  LossConfig loss;
  std::size_t iterations = 10000;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr_d = 1e-3;
  double lr_g = 1e-3;
  std::size_t latent_dim = 8;
  std::vector<std::size_t> generator_hidden{32, 32};
  std::vector<std::size_t> discriminator_hidden{32, 32};
  CurveBand band = CurveBand::default_band();
  std::uint64_t seed = 0;
  std::vector<std::size_t> checkpoint_iters{1, 2500, 8000};
  std::size_t checkpoint_samples = 64;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  CouplingGraph coupling() const;
  std::size_t generator_count() const { return coupling().k(); }
};

/// Independent random streams derived from one seed.
class RngStreams {
 public:
  enum class Stream : std::uint64_t {
    data = 1,
    disc_latent = 2,
    gen_latent = 3,
    disc_init = 4,
    gen_init = 5,
    checkpoint = 6,
    evaluation = 7,
  };

  explicit RngStreams(std::uint64_t seed) : seed_(seed) {}
  std::mt19937_64 make(Stream stream, std::uint64_t index = 0) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

struct TrainState {
  DiscriminatorNet discriminator;
  std::vector<GeneratorNet> generators;
  std::size_t iteration = 0;
};

/// Builds the initial networks for a spec from the init streams.
TrainState initial_state(const ExperimentSpec& spec);

struct LossRecord {
  std::size_t iteration = 0;
  double loss_d = 0.0;
  std::vector<double> loss_g;

  bool operator==(const LossRecord&) const = default;
};

class LossTrace {
 public:
  explicit LossTrace(std::size_t generators = 1) : generators_(generators) {}

  /// Iterations must be strictly increasing and loss_g sized to k.
  void append(LossRecord record);

  std::size_t generator_count() const { return generators_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<LossRecord>& records() const { return records_; }

  std::vector<double> discriminator_column() const;
  std::vector<double> generator_column(std::size_t i) const;

  /// `iteration,loss_d,loss_g0[,loss_g1,...]`
  void write_csv(const std::filesystem::path& path) const;
  static LossTrace read_csv(const std::filesystem::path& path);

  bool operator==(const LossTrace&) const = default;

 private:
  std::size_t generators_;
  std::vector<LossRecord> records_;
};

struct Checkpoint {
  std::size_t iteration = 0;
  std::size_t generator = 0;
  std::vector<CurveSample> curves;
};

struct TrainResult {
  TrainState state;
  LossTrace trace;
  std::vector<Checkpoint> checkpoints;
};

/// Raised when a loss or update becomes non-finite; the message names the
/// iteration and the network.
class TrainingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

TrainResult train(const ExperimentSpec& spec);

/// `{variant}_seed{seed}_iter{t}_gen{i}.csv`
std::string checkpoint_filename(Variant variant, std::uint64_t seed, std::size_t iteration,
                                std::size_t generator);
void write_checkpoints(const std::filesystem::path& dir, const ExperimentSpec& spec,
                       const std::vector<Checkpoint>& checkpoints);

/// Draws `count` curves from every generator using the evaluation streams.
std::vector<std::vector<CurveSample>> sample_generators(const ExperimentSpec& spec,
                                                        const TrainState& state,
                                                        std::size_t count);

}  // namespace rgan
