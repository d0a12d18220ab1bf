#pragma once

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records operations in execution order. Each recorded node owns its
// value and (if it requires a gradient) an accumulated gradient of the same
// shape. Parameters live outside the tape in a ParameterSet; binding a
// parameter onto a tape creates a leaf whose gradient is written back into
// the parameter when the tape is swept.

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rgan {

using Matrix = Eigen::MatrixXd;

/// Raised on shape mismatches and other contract violations.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation would produce NaN or Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSafeLogEpsilon = 1e-7;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool grad_ready = false;

  // Adam moments; sized lazily on the first Adam step.
  Matrix first_moment;
  Matrix second_moment;
};

class ParameterSet {
 public:
  Parameter& add(std::string name, Matrix value);

  Parameter& operator[](std::string_view name);
  const Parameter& operator[](std::string_view name) const;

  std::deque<Parameter>& items() { return params_; }
  const std::deque<Parameter>& items() const { return params_; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  std::size_t step_count = 0;

 private:
  // Tapes hold raw pointers into the deque; adding keeps them valid, copying
  // the set does not.
  std::deque<Parameter> params_;
};

/// Lightweight handle to a node recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Matrix value);
  /// Leaf that requires a gradient but is not tied to a parameter.
  Var variable(Matrix value);
  /// Leaf tied to `param`; backward() writes d(loss)/d(param) into param.grad.
  Var parameter(Parameter& param);

  Var matmul(Var a, Var b);
  /// a + b; b may be a 1 x cols row vector broadcast over a's rows.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// Elementwise product of equally shaped operands.
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  /// log(max(a, kSafeLogEpsilon)); gradient is zero where the clamp is active.
  Var safe_log(Var a);
  /// Clamp to [lo, hi]; gradient passes through only strictly inside the range.
  Var clamp(Var a, double lo, double hi);
  /// Mean over all entries; 1 x 1 result.
  Var mean(Var a);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  double scalar(Var v) const;
  bool requires_grad(Var v) const;

  /// Reverse sweep from a 1 x 1 loss. A tape can be swept once.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::vector<std::size_t> inputs;
    // Accumulates this node's grad into the grads of its inputs.
    std::function<void(Tape&, const Node&)> backward;
  };

  const Node& node(Var v) const;
  Var record(Matrix value, std::vector<std::size_t> inputs,
             std::function<void(Tape&, const Node&)> backward,
             std::string_view op);
  void accumulate(std::size_t id, const Matrix& delta);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

enum class OptimizerKind { sgd, adam };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies one update to every parameter in `params` and zeroes the grads.
/// Throws if any parameter has no populated gradient.
void optimizer_step(ParameterSet& params, OptimizerKind kind, double lr,
                    const AdamConfig& adam = {});

OptimizerKind parse_optimizer(std::string_view text);
std::string_view to_string(OptimizerKind kind);

}  // namespace rgan
