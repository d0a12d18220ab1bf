#include "rgan/racing_losses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace rgan {

Formulation parse_formulation(std::string_view text) {
  if (text == "standard_bce") return Formulation::standard_bce;
  if (text == "paper_literal") return Formulation::paper_literal;
  throw std::invalid_argument(fmt::format("unknown formulation '{}'", text));
}

std::string_view to_string(Formulation f) {
  return f == Formulation::standard_bce ? "standard_bce" : "paper_literal";
}

HingeConvention parse_hinge_convention(std::string_view text) {
  if (text == "lag_penalty") return HingeConvention::lag_penalty;
  if (text == "lead_penalty") return HingeConvention::lead_penalty;
  throw std::invalid_argument(fmt::format("unknown hinge convention '{}'", text));
}

std::string_view to_string(HingeConvention h) {
  return h == HingeConvention::lag_penalty ? "lag_penalty" : "lead_penalty";
}

CouplingGraph::CouplingGraph(std::size_t k, std::vector<Edge> edges) : k_(k) {
  for (const auto& [from, to] : edges) add_edge(from, to);
}

CouplingGraph CouplingGraph::fully_connected(std::size_t k) {
  CouplingGraph g(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) g.add_edge(i, j);
    }
  }
  return g;
}

void CouplingGraph::add_edge(std::size_t from, std::size_t to) {
  if (from == to) throw std::invalid_argument(fmt::format("self-edge on generator {}", from));
  if (from >= k_ || to >= k_) {
    throw std::invalid_argument(
        fmt::format("edge ({}, {}) out of range for {} generators", from, to, k_));
  }
  const Edge e{from, to};
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) edges_.insert(it, e);
}

std::vector<std::size_t> CouplingGraph::opponents(std::size_t i) const {
  std::vector<std::size_t> out;
  for (const auto& [from, to] : edges_) {
    if (from == i) out.push_back(to);
  }
  return out;
}

double hinge(double a, double b) { return std::max(0.0, a - b); }

Var hinge(Tape& tape, Var a, Var b) { return tape.relu(tape.sub(a, b)); }

Var coupling_term(Tape& tape, Var own, Var rival, HingeConvention convention) {
  Var r = tape.constant(tape.value(rival));
  return tape.mean(convention == HingeConvention::lag_penalty ? hinge(tape, r, own)
                                                              : hinge(tape, own, r));
}

namespace {

void check_scores(const Tape& tape, Var scores, std::string_view what) {
  const Matrix& v = tape.value(scores);
  if (v.size() == 0 || v.cols() != 1) {
    throw ShapeError(fmt::format("{}: expected a non-empty batch x 1 score column", what));
  }
  if (!((v.array() > 0.0).all() && (v.array() < 1.0).all())) {
    throw std::domain_error(fmt::format("{}: scores must lie strictly inside (0, 1)", what));
  }
}

}  // namespace

Var discriminator_loss(Tape& tape, Var d_real, std::span<const Var> d_fakes,
                       Formulation formulation) {
  if (d_fakes.empty()) throw std::invalid_argument("discriminator_loss: need at least one generator");
  check_scores(tape, d_real, "real scores");
  for (auto f : d_fakes) check_scores(tape, f, "fake scores");

  Var loss = tape.scale(tape.mean(tape.safe_log(d_real)), -1.0);
  for (auto f : d_fakes) {
    Var term;
    switch (formulation) {
      case Formulation::standard_bce:
        // log(1 - D)
        term = tape.mean(tape.safe_log(tape.add_scalar(tape.scale(f, -1.0), 1.0)));
        break;
      case Formulation::paper_literal:
        // 1 - log D
        term = tape.add_scalar(tape.scale(tape.mean(tape.safe_log(f)), -1.0), 1.0);
        break;
    }
    loss = tape.sub(loss, term);
  }
  return loss;
}

Var generator_loss(Tape& tape, std::size_t i, std::span<const Var> d_fakes,
                   const CouplingGraph& graph, const LossConfig& config) {
  if (d_fakes.size() != graph.k()) {
    throw std::invalid_argument(fmt::format("generator_loss: {} score batches for {} generators",
                                            d_fakes.size(), graph.k()));
  }
  if (i >= graph.k()) {
    throw std::out_of_range(fmt::format("generator index {} out of range", i));
  }
  check_scores(tape, d_fakes[i], "own scores");

  Var own = d_fakes[i];
  Var loss = tape.scale(tape.mean(tape.safe_log(own)), -1.0);
  for (auto j : graph.opponents(i)) {
    check_scores(tape, d_fakes[j], "opponent scores");
    if (tape.value(d_fakes[j]).rows() != tape.value(own).rows()) {
      throw ShapeError("generator_loss: opponent batch size differs");
    }
    loss = tape.add(loss, coupling_term(tape, own, d_fakes[j], config.hinge_convention));
  }
  return loss;
}

}  // namespace rgan
