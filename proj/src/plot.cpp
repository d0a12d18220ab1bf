#include "rgan/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rgan {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 140.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

// Keeps files small for long traces; min and max of every bucket survive.
constexpr std::size_t kMaxBuckets = 1500;

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string_view series_color(std::size_t column) {
  static constexpr std::array<std::string_view, 6> palette{"red",    "green",  "blue",
                                                           "orange", "purple", "brown"};
  return palette[column % palette.size()];
}

std::string render_loss_svg(const LossTrace& trace, std::string_view title) {
  if (trace.empty()) throw std::invalid_argument("cannot plot an empty loss trace");

  std::vector<std::vector<double>> columns{trace.discriminator_column()};
  std::vector<std::string> labels{"D"};
  for (std::size_t i = 0; i < trace.generator_count(); ++i) {
    columns.push_back(trace.generator_column(i));
    labels.push_back(fmt::format("G{}", i));
  }
  const auto& recs = trace.records();
  const double x_lo = static_cast<double>(recs.front().iteration);
  const double x_hi = std::max(x_lo + 1.0, static_cast<double>(recs.back().iteration));
  double y_lo = columns[0][0];
  double y_hi = y_lo;
  for (const auto& col : columns) {
    const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
    y_lo = std::min(y_lo, *mn);
    y_hi = std::max(y_hi, *mx);
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
                     kLeft, escape_xml(title));
  svg << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
      kTop, plot_w, plot_h);

  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = x_lo + (x_hi - x_lo) * tick / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * tick / 4.0;
    svg << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"middle\">{:.0f}</text>\n",
        px(fx), kHeight - kBottom + 16, fx);
    svg << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"end\">{:.3f}</text>\n",
        kLeft - 6, py(fy) + 4, fy);
  }
  svg << fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">iteration</text>\n",
      kLeft + plot_w / 2, kHeight - 12);
  svg << fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
      "transform=\"rotate(-90 16 {:.1f})\" text-anchor=\"middle\">loss</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2);

  const std::size_t n = recs.size();
  const std::size_t bucket = std::max<std::size_t>(1, (n + kMaxBuckets - 1) / kMaxBuckets);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    svg << fmt::format("<polyline class=\"series\" data-label=\"{}\" fill=\"none\" stroke=\"{}\" "
                       "stroke-width=\"1\" points=\"",
                       labels[c], series_color(c));
    for (std::size_t start = 0; start < n; start += bucket) {
      const std::size_t end = std::min(n, start + bucket);
      std::size_t lo = start;
      std::size_t hi = start;
      for (std::size_t t = start; t < end; ++t) {
        if (col[t] < col[lo]) lo = t;
        if (col[t] > col[hi]) hi = t;
      }
      for (std::size_t t : {std::min(lo, hi), std::max(lo, hi)}) {
        svg << fmt::format("{:.2f},{:.2f} ", px(static_cast<double>(recs[t].iteration)), py(col[t]));
        if (lo == hi) break;
      }
    }
    svg << "\"/>\n";
    const double ly = kTop + 16 + 18.0 * static_cast<double>(c);
    svg << fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        kWidth - kRight + 12, ly, kWidth - kRight + 36, ly, series_color(c));
    svg << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        kWidth - kRight + 42, ly + 4, labels[c]);
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_loss_svg(const std::filesystem::path& path, const LossTrace& trace,
                    std::string_view title) {
  const std::string svg = render_loss_svg(trace, title);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << svg;
}

}  // namespace rgan
