#include "rgan/synthdata.hpp"

#include "rgan/csv.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace rgan {

CurveBand::CurveBand(Quadratic lower, Quadratic upper, Vector grid)
    : lower_(lower), upper_(upper), grid_(std::move(grid)) {
  if (!lower_.coefficients().allFinite() || !upper_.coefficients().allFinite()) {
    throw std::invalid_argument("band coefficients must be finite");
  }
  if (grid_.size() < 3) {
    throw std::invalid_argument("band grid needs at least 3 points");
  }
  if (!grid_.allFinite()) throw std::invalid_argument("band grid must be finite");
  for (Eigen::Index i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) {
      throw std::invalid_argument("band grid must be strictly increasing");
    }
  }
  const Vector lo = lower_values();
  const Vector hi = upper_values();
  for (Eigen::Index i = 0; i < grid_.size(); ++i) {
    if (hi[i] < lo[i]) {
      throw std::invalid_argument(
          fmt::format("band boundaries cross at x = {}", grid_[i]));
    }
  }
}

CurveBand CurveBand::default_band() {
  return CurveBand({1.0, 0.0, 0.0}, {1.0, 0.0, 1.0}, linspace(-1.0, 1.0, 16));
}

Vector CurveBand::linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least 2 points");
  return Vector::LinSpaced(static_cast<Eigen::Index>(n), lo, hi);
}

Vector CurveBand::lower_values() const { return evaluate_quadratic(lower_, grid_); }
Vector CurveBand::upper_values() const { return evaluate_quadratic(upper_, grid_); }

double CurveBand::height() const { return (upper_values() - lower_values()).maxCoeff(); }

Quadratic CurveBand::interpolate(double lambda) const {
  return Quadratic::from((1.0 - lambda) * lower_.coefficients() +
                         lambda * upper_.coefficients());
}

Vector evaluate_quadratic(const Quadratic& q, const Vector& xs) {
  if (!xs.allFinite()) throw std::invalid_argument("evaluate_quadratic: non-finite x");
  return (q.a * xs.array().square() + q.b * xs.array() + q.c).matrix();
}

CurveSample curve_at(const CurveBand& band, double lambda) {
  return {evaluate_quadratic(band.interpolate(lambda), band.grid())};
}

std::vector<CurveSample> sample_real(const CurveBand& band, std::size_t count,
                                     std::mt19937_64& rng) {
  if (count == 0) throw std::invalid_argument("sample_real: count must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CurveSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(curve_at(band, unit(rng)));
  return out;
}

Eigen::MatrixXd sample_real_matrix(const CurveBand& band, std::size_t count,
                                   std::mt19937_64& rng) {
  const auto samples = sample_real(band, count, rng);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(band.size()));
  for (std::size_t i = 0; i < count; ++i) {
    m.row(static_cast<Eigen::Index>(i)) = samples[i].y.transpose();
  }
  return m;
}

double containment_rate(std::span<const CurveSample> samples, const CurveBand& band, double tol) {
  if (samples.empty()) throw std::invalid_argument("containment_rate: no samples");
  const Vector lo = band.lower_values().array() - tol;
  const Vector hi = band.upper_values().array() + tol;
  std::size_t inside = 0;
  for (const auto& s : samples) {
    if (s.y.size() != lo.size()) {
      throw std::invalid_argument("containment_rate: sample not aligned to band grid");
    }
    if ((s.y.array() >= lo.array()).all() && (s.y.array() <= hi.array()).all()) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples.size());
}

Quadratic fit_quadratic(const CurveSample& sample, const Vector& grid) {
  if (grid.size() < 3 || sample.y.size() != grid.size()) {
    throw std::invalid_argument("fit_quadratic: need >= 3 aligned points");
  }
  Eigen::MatrixXd design(grid.size(), 3);
  design.col(0) = grid.array().square().matrix();
  design.col(1) = grid;
  design.col(2).setOnes();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) {
    throw std::invalid_argument("fit_quadratic: degenerate design (repeated grid values)");
  }
  const Eigen::Vector3d coef = qr.solve(sample.y);
  return Quadratic::from(coef);
}

std::vector<CurveSample> rows_as_samples(const Eigen::MatrixXd& batch) {
  std::vector<CurveSample> out;
  out.reserve(static_cast<std::size_t>(batch.rows()));
  for (Eigen::Index r = 0; r < batch.rows(); ++r) out.push_back({batch.row(r).transpose()});
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const CurveBand& band,
                     std::span<const CurveSample> samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << "x,y_lower,y_upper";
  for (std::size_t i = 0; i < samples.size(); ++i) out << ",y_sample_" << i;
  out << '\n';
  const Vector lo = band.lower_values();
  const Vector hi = band.upper_values();
  for (Eigen::Index r = 0; r < band.grid().size(); ++r) {
    out << format_real(band.grid()[r]) << ',' << format_real(lo[r]) << ',' << format_real(hi[r]);
    for (const auto& s : samples) out << ',' << format_real(s.y[r]);
    out << '\n';
  }
}

}  // namespace rgan
