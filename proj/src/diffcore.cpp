#include "rgan/diffcore.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rgan {

namespace {

std::string shape_of(const Matrix& m) {
  return fmt::format("({}, {})", m.rows(), m.cols());
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::add(std::string name, Matrix value) {
  for (const auto& p : params_) {
    if (p.name == name) {
      throw std::invalid_argument(fmt::format("duplicate parameter name '{}'", name));
    }
  }
  if (!value.allFinite()) {
    throw NumericalError(fmt::format("parameter '{}' has non-finite entries", name));
  }
  Parameter p;
  p.name = std::move(name);
  p.grad = Matrix::Zero(value.rows(), value.cols());
  p.value = std::move(value);
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParameterSet::operator[](std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range(fmt::format("no parameter named '{}'", name));
}

const Parameter& ParameterSet::operator[](std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range(fmt::format("no parameter named '{}'", name));
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) {
    p.grad.setZero(p.value.rows(), p.value.cols());
    p.grad_ready = false;
  }
}

// ---------------------------------------------------------------------------
// Tape

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) {
    throw std::out_of_range("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

Var Tape::record(Matrix value, std::vector<std::size_t> inputs,
                 std::function<void(Tape&, const Node&)> backward,
                 std::string_view op) {
  if (consumed_) {
    throw std::logic_error("cannot record on a tape that has been swept");
  }
  if (!value.allFinite()) {
    throw NumericalError(fmt::format("{} produced a non-finite value", op));
  }
  Node n;
  n.value = std::move(value);
  for (auto id : inputs) {
    n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
  }
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Matrix& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
  } else {
    n.grad += delta;
  }
}

Var Tape::constant(Matrix value) {
  return record(std::move(value), {}, nullptr, "constant");
}

Var Tape::variable(Matrix value) {
  Var v = record(std::move(value), {}, nullptr, "variable");
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Tape::parameter(Parameter& param) {
  Var v = variable(param.value);
  nodes_[v.id].param = &param;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.cols() != bv.rows()) {
    throw ShapeError(fmt::format("matmul: {} x {}", shape_of(av), shape_of(bv)));
  }
  return record(av * bv, {a.id, b.id},
                [](Tape& t, const Node& out) {
                  const Node& x = t.nodes_[out.inputs[0]];
                  const Node& w = t.nodes_[out.inputs[1]];
                  if (x.requires_grad) t.accumulate(out.inputs[0], out.grad * w.value.transpose());
                  if (w.requires_grad) t.accumulate(out.inputs[1], x.value.transpose() * out.grad);
                },
                "matmul");
}

Var Tape::add(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    return record(av + bv, {a.id, b.id},
                  [](Tape& t, const Node& out) {
                    t.accumulate(out.inputs[0], out.grad);
                    t.accumulate(out.inputs[1], out.grad);
                  },
                  "add");
  }
  if (bv.rows() == 1 && av.cols() == bv.cols()) {
    Matrix v = av.rowwise() + bv.row(0);
    return record(std::move(v), {a.id, b.id},
                  [](Tape& t, const Node& out) {
                    t.accumulate(out.inputs[0], out.grad);
                    t.accumulate(out.inputs[1], out.grad.colwise().sum());
                  },
                  "add");
  }
  throw ShapeError(fmt::format("add: {} + {}", shape_of(av), shape_of(bv)));
}

Var Tape::sub(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw ShapeError(fmt::format("sub: {} - {}", shape_of(av), shape_of(bv)));
  }
  return record(av - bv, {a.id, b.id},
                [](Tape& t, const Node& out) {
                  t.accumulate(out.inputs[0], out.grad);
                  t.accumulate(out.inputs[1], -out.grad);
                },
                "sub");
}

Var Tape::mul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw ShapeError(fmt::format("mul: {} * {}", shape_of(av), shape_of(bv)));
  }
  return record(av.cwiseProduct(bv), {a.id, b.id},
                [](Tape& t, const Node& out) {
                  const Matrix& x = t.nodes_[out.inputs[0]].value;
                  const Matrix& y = t.nodes_[out.inputs[1]].value;
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(y));
                  t.accumulate(out.inputs[1], out.grad.cwiseProduct(x));
                },
                "mul");
}

Var Tape::scale(Var a, double factor) {
  return record(node(a).value * factor, {a.id},
                [factor](Tape& t, const Node& out) {
                  t.accumulate(out.inputs[0], out.grad * factor);
                },
                "scale");
}

Var Tape::add_scalar(Var a, double offset) {
  return record(node(a).value.array() + offset, {a.id},
                [](Tape& t, const Node& out) { t.accumulate(out.inputs[0], out.grad); },
                "add_scalar");
}

Var Tape::tanh(Var a) {
  return record(node(a).value.array().tanh().matrix(), {a.id},
                [](Tape& t, const Node& out) {
                  Matrix d = (1.0 - out.value.array().square()).matrix();
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(d));
                },
                "tanh");
}

Var Tape::sigmoid(Var a) {
  return record(node(a).value.unaryExpr(&stable_sigmoid), {a.id},
                [](Tape& t, const Node& out) {
                  Matrix d = (out.value.array() * (1.0 - out.value.array())).matrix();
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(d));
                },
                "sigmoid");
}

Var Tape::relu(Var a) {
  return record(node(a).value.cwiseMax(0.0), {a.id},
                [](Tape& t, const Node& out) {
                  const Matrix& x = t.nodes_[out.inputs[0]].value;
                  // Subgradient 0 at exactly 0.
                  Matrix mask = (x.array() > 0.0).cast<double>().matrix();
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(mask));
                },
                "relu");
}

Var Tape::safe_log(Var a) {
  Matrix v = node(a).value.cwiseMax(kSafeLogEpsilon).array().log().matrix();
  return record(std::move(v), {a.id},
                [](Tape& t, const Node& out) {
                  const Matrix& x = t.nodes_[out.inputs[0]].value;
                  Matrix d = x.unaryExpr([](double xi) {
                    return xi > kSafeLogEpsilon ? 1.0 / xi : 0.0;
                  });
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(d));
                },
                "safe_log");
}

Var Tape::clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must not exceed hi");
  Matrix v = node(a).value.cwiseMax(lo).cwiseMin(hi);
  return record(std::move(v), {a.id},
                [lo, hi](Tape& t, const Node& out) {
                  const Matrix& x = t.nodes_[out.inputs[0]].value;
                  Matrix mask = x.unaryExpr([lo, hi](double xi) {
                    return (xi > lo && xi < hi) ? 1.0 : 0.0;
                  });
                  t.accumulate(out.inputs[0], out.grad.cwiseProduct(mask));
                },
                "clamp");
}

Var Tape::mean(Var a) {
  const Matrix& av = node(a).value;
  if (av.size() == 0) throw ShapeError("mean of an empty matrix");
  Matrix v(1, 1);
  v(0, 0) = av.mean();
  return record(std::move(v), {a.id},
                [](Tape& t, const Node& out) {
                  const Matrix& x = t.nodes_[out.inputs[0]].value;
                  const double g = out.grad(0, 0) / static_cast<double>(x.size());
                  t.accumulate(out.inputs[0], Matrix::Constant(x.rows(), x.cols(), g));
                },
                "mean");
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.requires_grad) {
    throw std::logic_error("grad requested for a node that does not require one");
  }
  return n.grad;
}

double Tape::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1) {
    throw ShapeError(fmt::format("expected a scalar, got {}", shape_of(m)));
  }
  return m(0, 0);
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var loss) {
  if (consumed_) throw std::logic_error("tape has already been swept");
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ShapeError(fmt::format("backward needs a scalar loss, got {}", shape_of(root.value)));
  }
  consumed_ = true;

  for (auto& n : nodes_) {
    if (n.requires_grad) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  if (nodes_[loss.id].requires_grad) nodes_[loss.id].grad(0, 0) = 1.0;

  // Nodes after the loss cannot influence it.
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.backward) n.backward(*this, n);
  }

  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    n.param->grad.setZero(n.value.rows(), n.value.cols());
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    if (!n.grad.allFinite()) {
      throw NumericalError(fmt::format("non-finite gradient for '{}'", n.param->name));
    }
    n.param->grad += n.grad;
    n.param->grad_ready = true;
  }
}

// ---------------------------------------------------------------------------
// Optimizers

void optimizer_step(ParameterSet& params, OptimizerKind kind, double lr, const AdamConfig& adam) {
  for (const auto& p : params.items()) {
    if (!p.grad_ready) {
      throw std::logic_error(fmt::format("optimizer step without gradient for '{}'", p.name));
    }
  }
  ++params.step_count;
  const auto t = static_cast<double>(params.step_count);
  for (auto& p : params.items()) {
    switch (kind) {
      case OptimizerKind::sgd:
        p.value -= lr * p.grad;
        break;
      case OptimizerKind::adam: {
        if (p.first_moment.size() == 0) {
          p.first_moment = Matrix::Zero(p.value.rows(), p.value.cols());
          p.second_moment = Matrix::Zero(p.value.rows(), p.value.cols());
        }
        p.first_moment = adam.beta1 * p.first_moment + (1.0 - adam.beta1) * p.grad;
        p.second_moment =
            adam.beta2 * p.second_moment + (1.0 - adam.beta2) * p.grad.cwiseProduct(p.grad);
        const double c1 = 1.0 - std::pow(adam.beta1, t);
        const double c2 = 1.0 - std::pow(adam.beta2, t);
        p.value.array() -= lr * (p.first_moment.array() / c1) /
                           ((p.second_moment.array() / c2).sqrt() + adam.epsilon);
        break;
      }
    }
    if (!p.value.allFinite()) {
      throw NumericalError(fmt::format("optimizer produced non-finite values in '{}'", p.name));
    }
  }
  params.zero_grad();
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adam") return OptimizerKind::adam;
  throw std::invalid_argument(fmt::format("unknown optimizer '{}'", text));
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

}  // namespace rgan
