#pragma once

// Run configuration: the complete experiment spec plus analysis, output and
// benchmark settings, stored as a JSON document of nested objects.
//
//   {
//     "experiment": {"variant": "gan4", "iterations": 10000, "batch_size": 64,
//                    "optimizer": "adam", "lr_d": 0.001, "lr_g": 0.001,
//                    "latent_dim": 8, "seed": 0,
//                    "checkpoint_iters": [1, 2500, 8000], "checkpoint_samples": 64,
//                    "graph": {"k": 2, "edges": [[1, 0]]}},
//     "loss":     {"formulation": "standard_bce", "hinge_convention": "lag_penalty"},
//     "band":     {"lower": [1, 0, 0], "upper": [1, 0, 1], "grid_points": 16,
//                  "x_min": -1, "x_max": 1},
//     "models":   {"generator_hidden": [32, 32], "discriminator_hidden": [32, 32]},
//     "analysis": {"band_frac": 0.01, "window": 500, "smooth": 50, "burn_in": 1000,
//                  "eval_samples": 256, "containment_tol_frac": 0.02,
//                  "discriminator_target": null, "generator_target": null},
//     "output":   {"out_dir": "out", "plots": true},
//     "bench":    {"seeds": [0, 1, 2], "variants": ["gan1", "gan2", "gan3", "gan4"]}
//   }
//
// Every key is optional and falls back to the defaults above; unknown keys
// are rejected. "graph" is only read for the custom variant.

#include "rgan/analysis.hpp"
#include "rgan/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace rgan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ExperimentSpec experiment;
  ConvergenceSettings convergence;
  std::size_t burn_in = 1000;
  std::size_t eval_samples = 256;
  double containment_tol_frac = 0.02;
  std::filesystem::path out_dir = "out";
  bool plots = true;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Variant> variants{Variant::gan1, Variant::gan2, Variant::gan3, Variant::gan4};
};

/// Parses and validates. Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads a JSON file. Throws ConfigError naming the path when it is missing or
/// malformed.
nlohmann::json load_config_document(const std::filesystem::path& path);

/// Sets `dotted.key` in `doc` to `value`, parsed as JSON when possible and as
/// a string otherwise. Intermediate objects are created as needed.
void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);

/// Fully populated document describing `config`.
nlohmann::json to_json(const RunConfig& config);

}  // namespace rgan
