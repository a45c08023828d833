#pragma once

#include <string>

#include "detdag/graph.hpp"

namespace detdag {

/// Graphviz text in the deterministic-node notation: doubled outline on
/// deterministic nodes, doubled stroke on deterministic arcs, a dashed box
/// around each family whose members crystallise together, and shading on
/// `highlight`. Byte-stable for a given input.
std::string to_dot(const Dag& dag, const NodeSet& highlight = {});

}  // namespace detdag
