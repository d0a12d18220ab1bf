#pragma once

// Central finite-difference oracle. Only evaluates the loss; it never touches
// the tape's backward rules.

#include "rgan/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace rgan::testing {

inline constexpr double kFiniteDiffStep = 1e-5;

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// derivative is zero from dividing by rounding noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

/// Central differences of `loss` with respect to every entry of `target`.
inline Matrix numeric_gradient(Matrix& target, const std::function<double()>& loss,
                               double step = kFiniteDiffStep) {
  Matrix grad(target.rows(), target.cols());
  for (Eigen::Index r = 0; r < target.rows(); ++r) {
    for (Eigen::Index c = 0; c < target.cols(); ++c) {
      const double orig = target(r, c);
      target(r, c) = orig + step;
      const double up = loss();
      target(r, c) = orig - step;
      const double down = loss();
      target(r, c) = orig;
      grad(r, c) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

inline double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic.data()[i], numeric.data()[i]));
  }
  return worst;
}

/// Runs `build_loss` on a fresh tape, sweeps it, and compares every parameter
/// gradient against central differences. Returns the worst relative error.
inline double check_parameter_gradients(ParameterSet& params,
                                        const std::function<Var(Tape&)>& build_loss) {
  {
    Tape tape;
    tape.backward(build_loss(tape));
  }
  std::vector<Matrix> analytic;
  for (const auto& p : params.items()) analytic.push_back(p.grad);

  auto loss_value = [&] {
    Tape tape;
    return tape.scalar(build_loss(tape));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix numeric = numeric_gradient(params.items()[i].value, loss_value);
    worst = std::max(worst, max_relative_error(analytic[i], numeric));
  }
  params.zero_grad();
  return worst;
}

}  // namespace rgan::testing
