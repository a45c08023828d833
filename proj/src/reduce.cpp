#include "detdag/reduce.hpp"

#include <algorithm>
#include <ranges>

namespace detdag {

namespace {

bool feeds_definition(const Dag& dag, std::size_t node) {
  const NodeId& id = dag.node(node).id;
  for (std::size_t c : dag.children(node)) {
    const auto& form = dag.node(c).form;
    if (form && std::ranges::find(form->args, id) != form->args.end()) return true;
  }
  return false;
}

Dag without_node(const Dag& dag, std::size_t node) {
  const NodeId& id = dag.node(node).id;
  DagBuilder b(dag.name());
  for (const auto& n : dag.nodes()) {
    if (n.id != id) b.add_node(n);
  }
  for (const auto& e : dag.edges()) {
    if (e.from != id && e.to != id) b.add_edge(e);
  }
  return std::move(b).build();
}

}  // namespace

Dag transfer_and_barren(const Dag& dag, const NodeId& node) {
  std::size_t idx = dag.index_of(node);
  const NodeDef& def = dag.node(idx);
  if (!def.deterministic()) throw QueryError("'" + node + "' is not deterministic");
  if (feeds_definition(dag, idx)) {
    throw NotTransferable("'" + node + "' is an argument of another deterministic definition");
  }

  std::vector<EdgeDef> kept;
  std::vector<NodeId> targets;
  for (const auto& e : dag.edges()) {
    if (e.from == node) {
      targets.push_back(e.to);
    } else {
      kept.push_back(e);
    }
  }
  for (const auto& child : targets) {
    for (const auto& p : def.form->args) {
      bool present = std::ranges::any_of(kept, [&](const EdgeDef& e) { return e.from == p && e.to == child; });
      if (!present) kept.push_back({p, child, EdgeKind::Probabilistic, std::nullopt});
    }
  }

  DagBuilder b(dag.name());
  for (const auto& n : dag.nodes()) b.add_node(n);
  for (auto& e : kept) b.add_edge(std::move(e));
  return std::move(b).build();
}

Dag reduce_all(const Dag& dag, const NodeSet& keep) {
  NodeMask keep_mask = dag.mask_of(keep);
  NodeSet removable;
  const auto order = topological_order(dag);
  for (std::size_t i : order | std::views::reverse) {
    if (dag.node(i).deterministic() && !keep_mask[i]) removable.push_back(dag.node(i).id);
  }
  Dag current = dag;
  for (const auto& id : removable) {
    std::size_t idx = current.index_of(id);
    if (feeds_definition(current, idx)) continue;
    current = without_node(transfer_and_barren(current, id), current.index_of(id));
  }
  return current;
}

}  // namespace detdag
