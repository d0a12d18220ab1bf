#pragma once

#include "rgan/trainer.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace rgan {

/// Stroke colour for a trace column: discriminator red, generator 0 green,
/// generator 1 blue, then a fixed palette.
std::string_view series_color(std::size_t column);

/// Iteration-vs-loss line chart with one polyline per network. Throws
/// std::invalid_argument on an empty trace.
std::string render_loss_svg(const LossTrace& trace, std::string_view title);

void write_loss_svg(const std::filesystem::path& path, const LossTrace& trace,
                    std::string_view title);

}  // namespace rgan
