#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "detdag/graph.hpp"
#include "detdag/stats.hpp"

namespace detdag {

class SimulationError : public DagError {
 public:
  using DagError::DagError;
};

class RatioDenominatorNearZero : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class InvalidParams : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

using stats::DegenerateColumn;

/// Simulation parameters layered over the graph's own attributes.
///
/// Resolution per probabilistic node: explicit entry here, then the node's
/// mean/sd attributes, then the defaults (mean 0, sd 1; mean 10, sd 1 for the
/// positive support of ratio denominators, product factors and power bases).
/// Per probabilistic arc: entry here, then the arc's coef, then `default_coef`.
struct SimParams {
  std::map<NodeId, double> mean;
  std::map<NodeId, double> sd;
  std::map<std::pair<NodeId, NodeId>, double> coef;
  double default_coef = 0.5;
  std::size_t groups = 50;
};

struct ResolvedParams {
  std::vector<double> mean;  // per node, declaration order
  std::vector<double> sd;
  std::vector<std::map<std::size_t, double>> coef;  // child -> (parent -> coef)
  std::vector<bool> group;                          // simulated as group labels 1..G
  std::size_t groups = 50;

  std::string digest() const;
};

ResolvedParams resolve_params(const Dag& dag, const SimParams& params);

/// One column per node, one row per unit.
struct Dataset {
  std::size_t n = 0;
  std::vector<NodeId> names;
  Eigen::MatrixXd columns;
  std::uint64_t seed = 0;
  std::string provenance;

  std::size_t column_index(std::string_view id) const;
  auto column(std::string_view id) const { return columns.col(static_cast<Eigen::Index>(column_index(id))); }
  Eigen::MatrixXd gather(const NodeSet& ids) const;
};

/// Linear-Gaussian structural equations in topological order, deterministic
/// nodes evaluated exactly. Each node draws from its own stream
/// (mt19937_64 seeded with splitmix64(seed ^ node_index)), so the result does
/// not depend on evaluation order or thread count.
Dataset simulate(const Dag& dag, const SimParams& params, std::size_t n, std::uint64_t seed);

void write_csv(std::ostream& out, const Dataset& ds);

double partial_correlation(const Dataset& ds, const NodeId& x, const NodeId& y, const NodeSet& given);

struct IndependenceVerdict {
  bool independent = true;
  double r = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

// Fisher z test of the partial correlation at level alpha.
IndependenceVerdict independence_verdict(const Dataset& ds, const NodeId& x, const NodeId& y,
                                         const NodeSet& given, double alpha);

struct TripleCheck {
  NodeId x;
  NodeId y;
  NodeSet given;
  bool separated = false;
  IndependenceVerdict verdict;
  bool agrees() const noexcept { return separated == verdict.independent; }
};

struct VerificationReport {
  // Agreement matrix over the strictly checked (linear) triples.
  std::size_t separated_independent = 0;
  std::size_t separated_dependent = 0;
  std::size_t connected_independent = 0;
  std::size_t connected_dependent = 0;

  std::size_t skipped_degenerate = 0;  // x or y determined by Z
  std::size_t skipped_numerical = 0;   // regression left no residual variance
  std::size_t nonlinear_checked = 0;   // informational only
  std::size_t nonlinear_agreeing = 0;

  std::vector<TripleCheck> disagreements;

  std::size_t checked() const noexcept {
    return separated_independent + separated_dependent + connected_independent + connected_dependent;
  }
  std::size_t agreeing() const noexcept { return separated_independent + connected_dependent; }
  double agreement() const noexcept { return checked() ? double(agreeing()) / double(checked()) : 1.0; }
  bool full_agreement() const noexcept { return agreeing() == checked(); }
};

/// Compares D-separation with the simulated data over every (x, y, Z), |Z| <= 2.
/// Triples touching a nonlinear deterministic node are reported informationally.
VerificationReport verify_dseps(const Dag& dag, const SimParams& params, std::size_t n,
                                std::uint64_t seed, double alpha, std::size_t max_given = 2);

/// For each base component p of `composite`: 1 - Var(composite | p held at its
/// mean) / Var(composite), using the same simulated draws for every p. Shares
/// are clamped to [0, 1] and are not normalised.
std::vector<std::pair<NodeId, double>> variance_decomposition(const Dag& dag, const SimParams& params,
                                                              const NodeId& composite, std::size_t n,
                                                              std::uint64_t seed);

}  // namespace detdag
