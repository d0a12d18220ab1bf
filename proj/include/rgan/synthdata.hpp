#pragma once

// Real-data distribution for the curve experiment: quadratics lying between
// two fixed boundary quadratics, represented by their y-values on a shared
// x grid.

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace rgan {

using Vector = Eigen::VectorXd;

/// y = a x^2 + b x + c
struct Quadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  Eigen::Vector3d coefficients() const { return {a, b, c}; }
  static Quadratic from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

struct CurveSample {
  Vector y;
};

class CurveBand {
 public:
  /// Throws std::invalid_argument unless the grid is strictly increasing with
  /// at least three points and upper >= lower at every grid point.
  CurveBand(Quadratic lower, Quadratic upper, Vector grid);

  /// lower = x^2, upper = x^2 + 1 on 16 equally spaced points in [-1, 1].
  static CurveBand default_band();
  static Vector linspace(double lo, double hi, std::size_t n);

  const Quadratic& lower() const { return lower_; }
  const Quadratic& upper() const { return upper_; }
  const Vector& grid() const { return grid_; }
  std::size_t size() const { return static_cast<std::size_t>(grid_.size()); }

  Vector lower_values() const;
  Vector upper_values() const;
  /// Largest vertical gap between the boundaries over the grid.
  double height() const;

  /// Coefficients of (1 - lambda) * lower + lambda * upper.
  Quadratic interpolate(double lambda) const;

 private:
  Quadratic lower_;
  Quadratic upper_;
  Vector grid_;
};

Vector evaluate_quadratic(const Quadratic& q, const Vector& xs);

/// Draws `count` curves with lambda ~ U(0, 1) i.i.d.
std::vector<CurveSample> sample_real(const CurveBand& band, std::size_t count, std::mt19937_64& rng);

/// The real-data batch as a count x N matrix, one curve per row.
Eigen::MatrixXd sample_real_matrix(const CurveBand& band, std::size_t count, std::mt19937_64& rng);

/// Curve for a fixed interpolation coefficient.
CurveSample curve_at(const CurveBand& band, double lambda);

/// Fraction of samples with lower - tol <= y <= upper + tol at every grid point.
double containment_rate(std::span<const CurveSample> samples, const CurveBand& band, double tol);

/// Least-squares quadratic through (grid_i, y_i). Throws on a rank-deficient
/// design (fewer than three distinct x values).
Quadratic fit_quadratic(const CurveSample& sample, const Vector& grid);

/// Rows of a batch x N matrix as curve samples.
std::vector<CurveSample> rows_as_samples(const Eigen::MatrixXd& batch);

/// Writes `x,y_lower,y_upper,y_sample_0,...` with one row per grid point.
void write_curve_csv(const std::filesystem::path& path, const CurveBand& band,
                     std::span<const CurveSample> samples);

}  // namespace rgan
