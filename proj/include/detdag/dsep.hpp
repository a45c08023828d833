#pragma once

#include <optional>
#include <string>
#include <vector>

#include "detdag/graph.hpp"

namespace detdag {

enum class StepRole { Endpoint, Chain, Fork, Collider };

std::string_view step_role_name(StepRole role) noexcept;

struct PathStep {
  NodeId node;
  StepRole role = StepRole::Endpoint;
  // Intermediate nodes of a witness are open; `via` names the conditioned
  // descendant that opens a collider when the collider itself is not conditioned.
  bool open = true;
  std::optional<NodeId> via;
};

struct PathEdge {
  NodeId from;
  NodeId to;
  EdgeKind kind = EdgeKind::Probabilistic;
};

struct Path {
  std::vector<PathStep> steps;
  std::vector<PathEdge> edges;  // edges[i] joins steps[i] and steps[i + 1]

  // e.g. "X1⇒X⇐X2"; deterministic arcs are drawn doubled.
  std::string to_string() const;
};

struct SeparationVerdict {
  bool separated = false;
  std::optional<Path> witness;  // present iff !separated
};

enum class Criterion { Classic, Deterministic };

// Smallest superset of `given` closed under forward determination (all form
// arguments known) and inverse determination of invertible forms.
NodeSet det_closure(const Dag& dag, const NodeSet& given);
NodeMask det_closure_mask(const Dag& dag, const NodeMask& given);

/// Plain d-separation; deterministic arcs count as ordinary directed edges.
/// Throws QueryError when x == y or x/y is conditioned on.
SeparationVerdict is_d_separated(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given);

/// D-separation: blocking and collider opening use det_closure(given).
/// Throws DegenerateQuery when x or y is determined by `given`.
SeparationVerdict is_D_separated(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given);

SeparationVerdict separation(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given,
                             Criterion criterion);

enum class SeparationOutcome { Separated, Connected, Degenerate };

// Three-way form of is_D_separated, without the witness.
SeparationOutcome D_separation_outcome(const Dag& dag, const NodeId& x, const NodeId& y,
                                       const NodeSet& given);

}  // namespace detdag
