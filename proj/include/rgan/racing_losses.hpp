#pragma once

// Discriminator and generator objectives for one discriminator shared by k
// generators, with hinge coupling between generators along the edges of a
// directed coupling graph.
//
// Scores are discriminator outputs, batch x 1 tape variables strictly inside
// (0, 1). All losses are minimization forms.

#include "rgan/diffcore.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rgan {

enum class Formulation {
  /// -mean log D(x) - sum_n mean log(1 - D(G_n(z)))
  standard_bce,
  /// -mean log D(x) - sum_n mean [1 - log D(G_n(z))], as printed.
  paper_literal,
};

enum class HingeConvention {
  /// Edge (i, j) charges i with max(0, D(G_j) - D(G_i)): the trailing
  /// generator is pushed up.
  lag_penalty,
  /// Edge (i, j) charges i with max(0, D(G_i) - D(G_j)): the leading
  /// generator is pushed down.
  lead_penalty,
};

Formulation parse_formulation(std::string_view text);
std::string_view to_string(Formulation f);
HingeConvention parse_hinge_convention(std::string_view text);
std::string_view to_string(HingeConvention h);

struct LossConfig {
  Formulation formulation = Formulation::standard_bce;
  HingeConvention hinge_convention = HingeConvention::lag_penalty;
};

/// Directed competition edges among k generators. Edge (i, j) adds to
/// generator i's loss a hinge comparing its scores against generator j's.
class CouplingGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  CouplingGraph() = default;
  explicit CouplingGraph(std::size_t k) : k_(k) {}
  CouplingGraph(std::size_t k, std::vector<Edge> edges);

  static CouplingGraph fully_connected(std::size_t k);

  /// Throws on self-edges or out-of-range indices. Duplicates are ignored.
  void add_edge(std::size_t from, std::size_t to);

  std::size_t k() const { return k_; }
  /// Sorted, duplicate-free.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Opponents j of generator i, ascending.
  std::vector<std::size_t> opponents(std::size_t i) const;

  bool operator==(const CouplingGraph&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<Edge> edges_;
};

/// max(0, a - b)
double hinge(double a, double b);
/// Elementwise max(0, a - b); subgradient 0 at ties.
Var hinge(Tape& tape, Var a, Var b);

/// Mean hinge charged to the generator scoring `own` against `rival`. The
/// rival scores are copied in as a constant.
Var coupling_term(Tape& tape, Var own, Var rival, HingeConvention convention);

/// `d_fakes` holds one score batch per generator. Gradients reach whatever the
/// score variables depend on; pass generator outputs as constants for a
/// discriminator step.
Var discriminator_loss(Tape& tape, Var d_real, std::span<const Var> d_fakes,
                       Formulation formulation);

/// Loss of generator `i`: -mean log d_fakes[i] plus one hinge mean per
/// outgoing edge of i. Opponent scores enter as constants.
Var generator_loss(Tape& tape, std::size_t i, std::span<const Var> d_fakes,
                   const CouplingGraph& graph, const LossConfig& config);

}  // namespace rgan
