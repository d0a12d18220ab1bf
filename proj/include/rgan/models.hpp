#pragma once

#include "rgan/diffcore.hpp"

#include <cstddef>
#include <filesystem>
#include <random>
#include <string_view>
#include <vector>

namespace rgan {

enum class Activation { identity, tanh, relu, sigmoid };

Activation parse_activation(std::string_view text);
std::string_view to_string(Activation a);

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::tanh;
  Activation output_activation = Activation::identity;

  void validate() const;
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
};

/// Fully connected network; layer l computes act(x * W_l + b_l) with W_l of
/// shape fan_in x fan_out and b_l a 1 x fan_out row. Parameters are named
/// "w0", "b0", "w1", ...
class Mlp {
 public:
  /// Glorot-uniform weights, zero biases.
  static Mlp init(const MlpSpec& spec, std::mt19937_64& rng);
  static Mlp zeros(const MlpSpec& spec);

  /// Records the forward pass. With `trainable` false the parameters enter the
  /// tape as constants and receive no gradient.
  Var forward(Tape& tape, Var x, bool trainable) const;
  /// Forward pass without gradient tracking.
  Matrix evaluate(const Matrix& x) const;

  const MlpSpec& spec() const { return spec_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

 private:
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {}

  MlpSpec spec_;
  // Tapes bind parameters by pointer, so forward() needs mutable access even
  // though it never changes values.
  mutable ParameterSet params_;
};

struct GeneratorNet {
  Mlp net;

  std::size_t latent_dim() const { return net.spec().input_dim(); }
  std::size_t output_dim() const { return net.spec().output_dim(); }
};

struct DiscriminatorNet {
  Mlp net;

  std::size_t input_dim() const { return net.spec().input_dim(); }
};

/// latent -> hidden (tanh) ... -> curve_points (identity)
MlpSpec generator_spec(std::size_t latent_dim, std::size_t curve_points,
                       const std::vector<std::size_t>& hidden = {32, 32});
/// curve_points -> hidden (relu) ... -> 1 (sigmoid)
MlpSpec discriminator_spec(std::size_t curve_points, const std::vector<std::size_t>& hidden = {32, 32});

GeneratorNet make_generator(const MlpSpec& spec, std::mt19937_64& rng);
DiscriminatorNet make_discriminator(const MlpSpec& spec, std::mt19937_64& rng);

/// batch x latent_dim matrix of i.i.d. standard normals.
Matrix sample_latent(std::size_t latent_dim, std::size_t batch, std::mt19937_64& rng);

Var generate(Tape& tape, const GeneratorNet& g, Var z, bool trainable = true);
/// Scores are clamped to [kSafeLogEpsilon, 1 - kSafeLogEpsilon] so they stay
/// strictly inside (0, 1) even when the sigmoid saturates.
Var discriminate(Tape& tape, const DiscriminatorNet& d, Var x, bool trainable = true);

Matrix generate_values(const GeneratorNet& g, const Matrix& z);
Matrix discriminate_values(const DiscriminatorNet& d, const Matrix& x);

/// Flat `name,row,col,value` snapshot.
void write_parameter_csv(const std::filesystem::path& path, const ParameterSet& params);

}  // namespace rgan
