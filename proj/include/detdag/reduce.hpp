#pragma once

#include "detdag/graph.hpp"

namespace detdag {

// The node's value is an argument of another deterministic definition, so its
// arcs cannot be moved to its parents.
class NotTransferable : public DagError {
 public:
  using DagError::DagError;
};

/// Deterministic node reduction, one node: every outgoing arc node -> c is
/// replaced by probabilistic arcs p -> c for each form argument p (merged with
/// existing arcs, coefficients dropped). The node keeps its definition and
/// becomes barren.
Dag transfer_and_barren(const Dag& dag, const NodeId& node);

/// Reduces and removes every deterministic node outside `keep`, outermost
/// definitions first. A deterministic node that a retained definition refers
/// to is retained as well. Probabilistic nodes are never removed.
Dag reduce_all(const Dag& dag, const NodeSet& keep);

}  // namespace detdag
