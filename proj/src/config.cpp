#include "rgan/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

namespace rgan {

using nlohmann::json;

namespace {

// Reads one object section, rejecting keys outside `allowed`.
class Section {
 public:
  Section(const json& doc, std::string path, std::initializer_list<std::string_view> allowed)
      : path_(std::move(path)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path_));
    obj_ = &doc;
    const std::set<std::string_view> keys(allowed);
    for (const auto& [key, _] : doc.items()) {
      if (!keys.contains(key)) throw ConfigError(fmt::format("unknown key '{}.{}'", path_, key));
    }
  }

  const json* find(std::string_view key) const {
    if (obj_ == nullptr) return nullptr;
    const auto it = obj_->find(key);
    if (it == obj_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string name(std::string_view key) const { return fmt::format("{}.{}", path_, key); }

  template <typename T>
  void read(std::string_view key, T& out) const {
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_integer() && !v->is_number_unsigned()) throw ConfigError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("'{}' has the wrong type", name(key)));
    }
  }

  template <typename T>
  void read_list(std::string_view key, std::vector<T>& out) const {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_array()) throw ConfigError(fmt::format("'{}' must be a list", name(key)));
    std::vector<T> items;
    for (const auto& e : *v) {
      const bool ok = std::is_floating_point_v<T> ? e.is_number() : e.is_number_unsigned();
      if (!ok) throw ConfigError(fmt::format("'{}' has an element of the wrong type", name(key)));
      items.push_back(e.get<T>());
    }
    out = std::move(items);
  }

  template <typename F>
  auto read_enum(std::string_view key, F parse, decltype(parse("")) fallback) const {
    std::string text;
    read(key, text);
    if (text.empty()) return fallback;
    try {
      return parse(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("'{}': {}", name(key), e.what()));
    }
  }

 private:
  std::string path_;
  const json* obj_ = nullptr;
};

const json& child(const json& doc, std::string_view key) {
  static const json null_value;
  if (!doc.is_object()) return null_value;
  const auto it = doc.find(key);
  return it == doc.end() ? null_value : *it;
}

Quadratic read_quadratic(const Section& s, std::string_view key, Quadratic fallback) {
  std::vector<double> c;
  s.read_list(key, c);
  if (c.empty()) return fallback;
  if (c.size() != 3) throw ConfigError(fmt::format("'{}' needs 3 coefficients", s.name(key)));
  return {c[0], c[1], c[2]};
}

std::optional<double> read_optional_real(const Section& s, std::string_view key) {
  if (s.find(key) == nullptr) return std::nullopt;
  double v = 0.0;
  s.read(key, v);
  return v;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object() && !doc.is_null()) throw ConfigError("configuration must be a JSON object");
  {
    Section root(doc, "", {"experiment", "loss", "band", "models", "analysis", "output", "bench"});
  }
  RunConfig cfg;
  ExperimentSpec& ex = cfg.experiment;

  const Section exp(child(doc, "experiment"), "experiment",
                    {"variant", "graph", "iterations", "batch_size", "optimizer", "lr_d", "lr_g",
                     "latent_dim", "seed", "checkpoint_iters", "checkpoint_samples"});
  ex.variant = exp.read_enum("variant", parse_variant, ex.variant);
  exp.read("iterations", ex.iterations);
  exp.read("batch_size", ex.batch_size);
  ex.optimizer = exp.read_enum("optimizer", parse_optimizer, ex.optimizer);
  exp.read("lr_d", ex.lr_d);
  exp.read("lr_g", ex.lr_g);
  exp.read("latent_dim", ex.latent_dim);
  exp.read("seed", ex.seed);
  exp.read_list("checkpoint_iters", ex.checkpoint_iters);
  exp.read("checkpoint_samples", ex.checkpoint_samples);
  if (const json* g = exp.find("graph")) {
    const Section graph(*g, "experiment.graph", {"k", "edges"});
    std::size_t k = 0;
    graph.read("k", k);
    CouplingGraph built(k);
    if (const json* edges = graph.find("edges")) {
      if (!edges->is_array()) throw ConfigError("'experiment.graph.edges' must be a list");
      for (const auto& e : *edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
            !e[1].is_number_unsigned()) {
          throw ConfigError("'experiment.graph.edges' entries must be [from, to] pairs");
        }
        try {
          built.add_edge(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        } catch (const std::invalid_argument& err) {
          throw ConfigError(fmt::format("'experiment.graph': {}", err.what()));
        }
      }
    }
    if (ex.variant == Variant::custom) ex.graph = std::move(built);
  }

  const Section loss(child(doc, "loss"), "loss", {"formulation", "hinge_convention"});
  ex.loss.formulation = loss.read_enum("formulation", parse_formulation, ex.loss.formulation);
  ex.loss.hinge_convention =
      loss.read_enum("hinge_convention", parse_hinge_convention, ex.loss.hinge_convention);

  const Section band(child(doc, "band"), "band", {"lower", "upper", "grid_points", "x_min", "x_max"});
  {
    const auto def = CurveBand::default_band();
    const Quadratic lower = read_quadratic(band, "lower", def.lower());
    const Quadratic upper = read_quadratic(band, "upper", def.upper());
    std::size_t points = def.size();
    double x_min = def.grid()[0];
    double x_max = def.grid()[def.grid().size() - 1];
    band.read("grid_points", points);
    band.read("x_min", x_min);
    band.read("x_max", x_max);
    try {
      ex.band = CurveBand(lower, upper, CurveBand::linspace(x_min, x_max, points));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("'band': {}", e.what()));
    }
  }

  const Section models(child(doc, "models"), "models", {"generator_hidden", "discriminator_hidden"});
  models.read_list("generator_hidden", ex.generator_hidden);
  models.read_list("discriminator_hidden", ex.discriminator_hidden);

  const Section analysis(child(doc, "analysis"), "analysis",
                         {"band_frac", "window", "smooth", "burn_in", "eval_samples",
                          "containment_tol_frac", "discriminator_target", "generator_target"});
  analysis.read("band_frac", cfg.convergence.band_frac);
  analysis.read("window", cfg.convergence.window);
  analysis.read("smooth", cfg.convergence.smooth);
  analysis.read("burn_in", cfg.burn_in);
  analysis.read("eval_samples", cfg.eval_samples);
  analysis.read("containment_tol_frac", cfg.containment_tol_frac);
  cfg.convergence.discriminator_target = read_optional_real(analysis, "discriminator_target");
  cfg.convergence.generator_target = read_optional_real(analysis, "generator_target");

  const Section output(child(doc, "output"), "output", {"out_dir", "plots"});
  std::string out_dir = cfg.out_dir.string();
  output.read("out_dir", out_dir);
  cfg.out_dir = out_dir;
  output.read("plots", cfg.plots);

  const Section bench(child(doc, "bench"), "bench", {"seeds", "variants"});
  bench.read_list("seeds", cfg.seeds);
  if (const json* vs = bench.find("variants")) {
    if (!vs->is_array()) throw ConfigError("'bench.variants' must be a list");
    cfg.variants.clear();
    for (const auto& v : *vs) {
      if (!v.is_string()) throw ConfigError("'bench.variants' entries must be strings");
      try {
        const auto parsed = parse_variant(v.get<std::string>());
        if (parsed == Variant::custom) throw std::invalid_argument("custom is not benchable");
        cfg.variants.push_back(parsed);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("'bench.variants': {}", e.what()));
      }
    }
  }

  // Cross-field validation.
  try {
    ex.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("'experiment': {}", e.what()));
  }
  if (!(cfg.convergence.band_frac > 0.0)) throw ConfigError("'analysis.band_frac' must be positive");
  if (cfg.convergence.window == 0 || cfg.convergence.smooth == 0) {
    throw ConfigError("'analysis.window' and 'analysis.smooth' must be positive");
  }
  if (cfg.eval_samples == 0) throw ConfigError("'analysis.eval_samples' must be positive");
  if (!(cfg.containment_tol_frac >= 0.0)) {
    throw ConfigError("'analysis.containment_tol_frac' must be non-negative");
  }
  if (ex.loss.formulation == Formulation::paper_literal &&
      (!cfg.convergence.discriminator_target || !cfg.convergence.generator_target)) {
    throw ConfigError(
        "paper_literal has no analytic equilibrium; set analysis.discriminator_target and "
        "analysis.generator_target");
  }
  if (cfg.out_dir.empty()) throw ConfigError("'output.out_dir' must not be empty");
  return cfg;
}

json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed config file '{}': {}", path.string(), e.what()));
  }
}

void apply_override(json& doc, std::string_view dotted_key, std::string_view value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  if (doc.is_null()) doc = json::object();
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string key(dotted_key.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (key.empty()) throw ConfigError(fmt::format("malformed override key '{}'", dotted_key));
    if (!node->is_object()) {
      throw ConfigError(fmt::format("override '{}' descends into a non-object", dotted_key));
    }
    if (dot == std::string_view::npos) {
      json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
      (*node)[key] = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json to_json(const RunConfig& cfg) {
  const auto& ex = cfg.experiment;
  json doc;
  auto& e = doc["experiment"];
  e["variant"] = std::string(to_string(ex.variant));
  e["iterations"] = ex.iterations;
  e["batch_size"] = ex.batch_size;
  e["optimizer"] = std::string(to_string(ex.optimizer));
  e["lr_d"] = ex.lr_d;
  e["lr_g"] = ex.lr_g;
  e["latent_dim"] = ex.latent_dim;
  e["seed"] = ex.seed;
  e["checkpoint_iters"] = ex.checkpoint_iters;
  e["checkpoint_samples"] = ex.checkpoint_samples;
  if (ex.variant == Variant::custom && ex.graph) {
    json edges = json::array();
    for (const auto& [from, to] : ex.graph->edges()) edges.push_back({from, to});
    e["graph"] = {{"k", ex.graph->k()}, {"edges", edges}};
  }
  doc["loss"] = {{"formulation", std::string(to_string(ex.loss.formulation))},
                 {"hinge_convention", std::string(to_string(ex.loss.hinge_convention))}};
  const auto& lo = ex.band.lower();
  const auto& hi = ex.band.upper();
  doc["band"] = {{"lower", {lo.a, lo.b, lo.c}},
                 {"upper", {hi.a, hi.b, hi.c}},
                 {"grid_points", ex.band.size()},
                 {"x_min", ex.band.grid()[0]},
                 {"x_max", ex.band.grid()[ex.band.grid().size() - 1]}};
  doc["models"] = {{"generator_hidden", ex.generator_hidden},
                   {"discriminator_hidden", ex.discriminator_hidden}};
  auto& a = doc["analysis"];
  a["band_frac"] = cfg.convergence.band_frac;
  a["window"] = cfg.convergence.window;
  a["smooth"] = cfg.convergence.smooth;
  a["burn_in"] = cfg.burn_in;
  a["eval_samples"] = cfg.eval_samples;
  a["containment_tol_frac"] = cfg.containment_tol_frac;
  a["discriminator_target"] =
      cfg.convergence.discriminator_target ? json(*cfg.convergence.discriminator_target) : json();
  a["generator_target"] =
      cfg.convergence.generator_target ? json(*cfg.convergence.generator_target) : json();
  doc["output"] = {{"out_dir", cfg.out_dir.string()}, {"plots", cfg.plots}};
  json variants = json::array();
  for (auto v : cfg.variants) variants.push_back(std::string(to_string(v)));
  doc["bench"] = {{"seeds", cfg.seeds}, {"variants", variants}};
  return doc;
}

}  // namespace rgan
