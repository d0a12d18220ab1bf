#include "rgan/models.hpp"

#include "rgan/csv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rgan {

Activation parse_activation(std::string_view text) {
  if (text == "identity") return Activation::identity;
  if (text == "tanh") return Activation::tanh;
  if (text == "relu") return Activation::relu;
  if (text == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument(fmt::format("unknown activation '{}'", text));
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("MLP needs at least 2 layer sizes");
  for (auto s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("MLP layer sizes must be positive");
  }
}

namespace {

Var activate(Tape& tape, Var x, Activation a) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::tanh: return tape.tanh(x);
    case Activation::relu: return tape.relu(x);
    case Activation::sigmoid: return tape.sigmoid(x);
  }
  return x;
}

}  // namespace

Mlp Mlp::zeros(const MlpSpec& spec) {
  spec.validate();
  Mlp m(spec);
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(spec.layer_sizes[l]);
    const auto out = static_cast<Eigen::Index>(spec.layer_sizes[l + 1]);
    m.params_.add(fmt::format("w{}", l), Matrix::Zero(in, out));
    m.params_.add(fmt::format("b{}", l), Matrix::Zero(1, out));
  }
  return m;
}

Mlp Mlp::init(const MlpSpec& spec, std::mt19937_64& rng) {
  Mlp m = zeros(spec);
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const double fan_in = static_cast<double>(spec.layer_sizes[l]);
    const double fan_out = static_cast<double>(spec.layer_sizes[l + 1]);
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    Matrix& w = m.params_[fmt::format("w{}", l)].value;
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return m;
}

Var Mlp::forward(Tape& tape, Var x, bool trainable) const {
  const auto layers = spec_.layer_sizes.size() - 1;
  if (static_cast<std::size_t>(tape.value(x).cols()) != spec_.input_dim()) {
    throw ShapeError(fmt::format("network expects {} input columns, got {}", spec_.input_dim(),
                                 tape.value(x).cols()));
  }
  auto bind = [&](Parameter& p) { return trainable ? tape.parameter(p) : tape.constant(p.value); };
  Var h = x;
  auto& items = params_.items();
  for (std::size_t l = 0; l < layers; ++l) {
    Var w = bind(items[2 * l]);
    Var b = bind(items[2 * l + 1]);
    h = tape.add(tape.matmul(h, w), b);
    h = activate(tape, h, l + 1 == layers ? spec_.output_activation : spec_.hidden_activation);
  }
  return h;
}

Matrix Mlp::evaluate(const Matrix& x) const {
  Tape tape;
  Var out = forward(tape, tape.constant(x), false);
  return tape.value(out);
}

MlpSpec generator_spec(std::size_t latent_dim, std::size_t curve_points,
                       const std::vector<std::size_t>& hidden) {
  MlpSpec spec;
  spec.layer_sizes.push_back(latent_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(curve_points);
  spec.hidden_activation = Activation::tanh;
  spec.output_activation = Activation::identity;
  return spec;
}

MlpSpec discriminator_spec(std::size_t curve_points, const std::vector<std::size_t>& hidden) {
  MlpSpec spec;
  spec.layer_sizes.push_back(curve_points);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(1);
  spec.hidden_activation = Activation::relu;
  spec.output_activation = Activation::sigmoid;
  return spec;
}

GeneratorNet make_generator(const MlpSpec& spec, std::mt19937_64& rng) {
  if (spec.output_activation != Activation::identity) {
    throw std::invalid_argument("generator output activation must be identity");
  }
  return {Mlp::init(spec, rng)};
}

DiscriminatorNet make_discriminator(const MlpSpec& spec, std::mt19937_64& rng) {
  if (spec.output_dim() != 1 || spec.output_activation != Activation::sigmoid) {
    throw std::invalid_argument("discriminator must end in a single sigmoid unit");
  }
  return {Mlp::init(spec, rng)};
}

Matrix sample_latent(std::size_t latent_dim, std::size_t batch, std::mt19937_64& rng) {
  if (latent_dim == 0 || batch == 0) {
    throw std::invalid_argument("sample_latent: latent dimension and batch must be positive");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(latent_dim));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = normal(rng);
  }
  return z;
}

Var generate(Tape& tape, const GeneratorNet& g, Var z, bool trainable) {
  return g.net.forward(tape, z, trainable);
}

Var discriminate(Tape& tape, const DiscriminatorNet& d, Var x, bool trainable) {
  Var p = d.net.forward(tape, x, trainable);
  return tape.clamp(p, kSafeLogEpsilon, 1.0 - kSafeLogEpsilon);
}

Matrix generate_values(const GeneratorNet& g, const Matrix& z) { return g.net.evaluate(z); }

Matrix discriminate_values(const DiscriminatorNet& d, const Matrix& x) {
  Tape tape;
  return tape.value(discriminate(tape, d, tape.constant(x), false));
}

void write_parameter_csv(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << "name,row,col,value\n";
  for (const auto& p : params.items()) {
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        out << p.name << ',' << r << ',' << c << ',' << format_real(p.value(r, c)) << '\n';
      }
    }
  }
}

}  // namespace rgan
