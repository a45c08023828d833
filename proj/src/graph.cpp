#include "detdag/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <tuple>

namespace detdag {

FunctionalForm FunctionalForm::sum(std::vector<NodeId> terms) {
  return {FormKind::Sum, std::move(terms), 0.0};
}
FunctionalForm FunctionalForm::product(std::vector<NodeId> factors) {
  return {FormKind::Product, std::move(factors), 0.0};
}
FunctionalForm FunctionalForm::difference(NodeId minuend, NodeId subtrahend) {
  return {FormKind::Difference, {std::move(minuend), std::move(subtrahend)}, 0.0};
}
FunctionalForm FunctionalForm::ratio(NodeId numerator, NodeId denominator, double exponent) {
  return {FormKind::Ratio, {std::move(numerator), std::move(denominator)}, exponent};
}
FunctionalForm FunctionalForm::power(NodeId base, double exponent) {
  return {FormKind::Power, {std::move(base)}, exponent};
}
FunctionalForm FunctionalForm::scale(NodeId arg, double factor) {
  return {FormKind::Scale, {std::move(arg)}, factor};
}
FunctionalForm FunctionalForm::threshold(NodeId arg, double cutpoint) {
  return {FormKind::Threshold, {std::move(arg)}, cutpoint};
}
FunctionalForm FunctionalForm::agg_mean(NodeId arg, NodeId group) {
  return {FormKind::AggMean, {std::move(arg), std::move(group)}, 0.0};
}
FunctionalForm FunctionalForm::agg_prev(NodeId arg, double cutpoint, NodeId group) {
  return {FormKind::AggPrev, {std::move(arg), std::move(group)}, cutpoint};
}

bool FunctionalForm::invertible() const noexcept {
  switch (kind) {
    case FormKind::Sum:
    case FormKind::Difference:
    case FormKind::Scale:
    case FormKind::Product:  // nonzero support
      return true;
    case FormKind::Ratio:  // nonzero support; exponent 0 drops the denominator
    case FormKind::Power:  // positive support
      return constant != 0.0;
    case FormKind::Threshold:
    case FormKind::AggMean:
    case FormKind::AggPrev:
      return false;
  }
  return false;
}

bool FunctionalForm::linear() const noexcept {
  return kind == FormKind::Sum || kind == FormKind::Difference || kind == FormKind::Scale;
}

std::string_view form_keyword(FormKind kind) noexcept {
  switch (kind) {
    case FormKind::Sum: return "sum";
    case FormKind::Difference: return "diff";
    case FormKind::Ratio: return "ratio";
    case FormKind::Product: return "product";
    case FormKind::Power: return "power";
    case FormKind::Scale: return "scale";
    case FormKind::Threshold: return "threshold";
    case FormKind::AggMean: return "aggmean";
    case FormKind::AggPrev: return "aggprev";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Dag

bool Dag::contains(std::string_view id) const {
  return lookup_.find(std::string(id)) != lookup_.end();
}

std::size_t Dag::index_of(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) throw UnknownNode(std::string(id));
  return it->second;
}

const EdgeDef* Dag::find_edge(std::size_t from, std::size_t to) const {
  for (const auto& e : edges_) {
    if (e.from == nodes_[from].id && e.to == nodes_[to].id) return &e;
  }
  return nullptr;
}

NodeMask Dag::mask_of(std::span<const NodeId> ids) const {
  NodeMask mask(nodes_.size(), false);
  for (const auto& id : ids) mask[index_of(id)] = true;
  return mask;
}

NodeSet Dag::ids_of(const NodeMask& mask) const {
  NodeSet out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (mask[i]) out.push_back(nodes_[i].id);
  }
  return out;
}

void Dag::index() {
  lookup_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) lookup_.emplace(nodes_[i].id, i);
  parents_.assign(nodes_.size(), {});
  children_.assign(nodes_.size(), {});
  for (const auto& e : edges_) {
    auto f = lookup_.find(e.from);
    auto t = lookup_.find(e.to);
    if (f == lookup_.end() || t == lookup_.end()) continue;
    parents_[t->second].push_back(f->second);
    children_[f->second].push_back(t->second);
  }
  for (auto* adj : {&parents_, &children_}) {
    for (auto& list : *adj) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
}

namespace {

auto edge_key(const EdgeDef& e) { return std::tie(e.from, e.to, e.kind, e.coef); }

}  // namespace

bool operator==(const Dag& a, const Dag& b) {
  if (a.name_ != b.name_ || a.nodes_ != b.nodes_ || a.edges_.size() != b.edges_.size()) return false;
  auto sorted = [](std::vector<EdgeDef> edges) {
    std::sort(edges.begin(), edges.end(),
              [](const EdgeDef& l, const EdgeDef& r) { return edge_key(l) < edge_key(r); });
    return edges;
  };
  return sorted(a.edges_) == sorted(b.edges_);
}

// ---------------------------------------------------------------------------
// DagBuilder

DagBuilder& DagBuilder::add_node(NodeDef node) {
  dag_.nodes_.push_back(std::move(node));
  return *this;
}

DagBuilder& DagBuilder::probabilistic(NodeId id) {
  NodeDef node;
  node.id = std::move(id);
  return add_node(std::move(node));
}

DagBuilder& DagBuilder::define(NodeId id, FunctionalForm form) {
  for (const auto& arg : form.args) {
    dag_.edges_.push_back({arg, id, EdgeKind::Deterministic, std::nullopt});
  }
  NodeDef node;
  node.id = std::move(id);
  node.form = std::move(form);
  return add_node(std::move(node));
}

DagBuilder& DagBuilder::add_edge(EdgeDef edge) {
  dag_.edges_.push_back(std::move(edge));
  return *this;
}

DagBuilder& DagBuilder::edge(NodeId from, NodeId to, std::optional<double> coef) {
  return add_edge({std::move(from), std::move(to), EdgeKind::Probabilistic, coef});
}

NodeDef* DagBuilder::find(std::string_view id) {
  for (auto& n : dag_.nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

Dag DagBuilder::build() && {
  dag_.index();
  return std::move(dag_);
}

Dag DagBuilder::build() const& {
  Dag copy = dag_;
  copy.index();
  return copy;
}

// ---------------------------------------------------------------------------
// Validation

std::string_view violation_name(ViolationCode code) noexcept {
  switch (code) {
    case ViolationCode::Cycle: return "CycleViolation";
    case ViolationCode::DuplicateNode: return "DuplicateNodeViolation";
    case ViolationCode::DuplicateEdge: return "DuplicateEdgeViolation";
    case ViolationCode::UnknownEndpoint: return "UnknownEndpointViolation";
    case ViolationCode::InvalidForm: return "InvalidFormViolation";
    case ViolationCode::MissingDefinitionArc: return "MissingDefinitionArcViolation";
    case ViolationCode::DeterministicParent: return "DeterministicParentViolation";
    case ViolationCode::EdgeKindMismatch: return "EdgeKindMismatchViolation";
    case ViolationCode::TemporalOrder: return "TemporalOrderViolation";
    case ViolationCode::DeterministicNoise: return "DeterministicNoiseViolation";
    case ViolationCode::InvalidNoise: return "InvalidNoiseViolation";
  }
  return "Violation";
}

namespace {

std::size_t expected_arity(FormKind kind) {
  switch (kind) {
    case FormKind::Sum:
    case FormKind::Product: return 0;  // two or more
    case FormKind::Power:
    case FormKind::Scale:
    case FormKind::Threshold: return 1;
    default: return 2;
  }
}

void check_form(const Dag& dag, const NodeDef& node, std::vector<Violation>& out) {
  const auto& form = *node.form;
  auto fail = [&](std::string msg) {
    out.push_back({ViolationCode::InvalidForm, node.id + ": " + std::move(msg), {node.id}});
  };
  std::size_t arity = expected_arity(form.kind);
  if (arity == 0 ? form.args.size() < 2 : form.args.size() != arity) {
    fail(std::string(form_keyword(form.kind)) + " takes " +
         (arity == 0 ? std::string("two or more") : std::to_string(arity)) + " node arguments");
  }
  std::set<std::string> seen;
  for (const auto& arg : form.args) {
    if (!seen.insert(arg).second) fail("argument '" + arg + "' repeated");
    if (arg == node.id) fail("defined in terms of itself");
    if (!dag.contains(arg)) fail("argument '" + arg + "' is not a declared node");
  }
  if (!std::isfinite(form.constant)) fail("constant must be finite");
  if (form.kind == FormKind::Scale && form.constant == 0.0) fail("scale factor must be nonzero");
  if (const NodeId* group = form.group(); group && dag.contains(*group) &&
                                          dag.node(*group).deterministic()) {
    fail("group node '" + *group + "' must be probabilistic");
  }
}

bool is_form_argument(const NodeDef& node, std::string_view id) {
  if (!node.form) return false;
  const auto& args = node.form->args;
  return std::find(args.begin(), args.end(), id) != args.end();
}

// One cycle per strongly connected knot, found by DFS back edges.
void check_cycles(const Dag& dag, std::vector<Violation>& out) {
  const std::size_t n = dag.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    state[u] = 1;
    stack.push_back(u);
    for (std::size_t v : dag.children(u)) {
      if (state[v] == 1) {
        auto start = std::find(stack.begin(), stack.end(), v);
        std::vector<NodeId> cycle;
        for (auto it = start; it != stack.end(); ++it) cycle.push_back(dag.node(*it).id);
        cycle.push_back(dag.node(v).id);
        std::string msg = "directed cycle ";
        for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> " : "") + cycle[i];
        out.push_back({ViolationCode::Cycle, std::move(msg), std::move(cycle)});
      } else if (state[v] == 0) {
        visit(v);
      }
    }
    stack.pop_back();
    state[u] = 2;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 0) visit(i);
  }
}

}  // namespace

std::vector<Violation> validate(const Dag& dag) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& node : dag.nodes()) {
    if (!ids.insert(node.id).second) {
      out.push_back({ViolationCode::DuplicateNode, "node '" + node.id + "' declared twice", {node.id}});
    }
  }
  for (const auto& node : dag.nodes()) {
    if (node.deterministic()) {
      check_form(dag, node, out);
      if (node.mean || node.sd) {
        out.push_back({ViolationCode::DeterministicNoise,
                       node.id + ": deterministic nodes carry no noise parameters", {node.id}});
      }
    } else if (node.sd && !(*node.sd > 0.0 && std::isfinite(*node.sd))) {
      out.push_back({ViolationCode::InvalidNoise, node.id + ": sd must be positive", {node.id}});
    }
    if (node.mean && !std::isfinite(*node.mean)) {
      out.push_back({ViolationCode::InvalidNoise, node.id + ": mean must be finite", {node.id}});
    }
  }

  std::set<std::pair<std::string, std::string>> seen_edges;
  for (const auto& e : dag.edges()) {
    std::vector<NodeId> where{e.from, e.to};
    std::string name = e.from + " -> " + e.to;
    bool known = true;
    for (const auto* end : {&e.from, &e.to}) {
      if (!dag.contains(*end)) {
        out.push_back({ViolationCode::UnknownEndpoint, name + ": '" + *end + "' is not declared", where});
        known = false;
      }
    }
    if (!seen_edges.insert({e.from, e.to}).second) {
      out.push_back({ViolationCode::DuplicateEdge, name + " declared twice", where});
    }
    if (e.coef && !std::isfinite(*e.coef)) {
      out.push_back({ViolationCode::InvalidNoise, name + ": coef must be finite", where});
    }
    if (!known) continue;
    const NodeDef& child = dag.node(e.to);
    bool defining = is_form_argument(child, e.from);
    if (child.deterministic() && !defining) {
      out.push_back({ViolationCode::DeterministicParent,
                     name + ": '" + e.to + "' is deterministic and '" + e.from +
                         "' is not an argument of its form",
                     where});
    } else if (defining != (e.kind == EdgeKind::Deterministic)) {
      out.push_back({ViolationCode::EdgeKindMismatch,
                     name + (defining ? " is a definition arc but marked probabilistic"
                                      : " is marked deterministic but defines nothing"),
                     where});
    }
    const NodeDef& parent = dag.node(e.from);
    if (parent.time && child.time && *parent.time > *child.time) {
      out.push_back({ViolationCode::TemporalOrder,
                     name + ": cause crystallises after its effect", where});
    }
  }

  for (const auto& node : dag.nodes()) {
    if (!node.form) continue;
    for (const auto& arg : node.form->args) {
      if (!dag.contains(arg)) continue;
      bool found = std::any_of(dag.edges().begin(), dag.edges().end(),
                               [&](const EdgeDef& e) { return e.from == arg && e.to == node.id; });
      if (!found) {
        out.push_back({ViolationCode::MissingDefinitionArc,
                       node.id + ": no arc from form argument '" + arg + "'", {arg, node.id}});
      }
    }
  }

  check_cycles(dag, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structural queries

std::vector<std::size_t> topological_order(const Dag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = dag.parents(i).size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t v : dag.children(u)) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (order.size() != n) throw DagError("graph '" + dag.name() + "' has a directed cycle");
  return order;
}

namespace {

template <typename Next>
NodeMask reach(const Dag& dag, std::size_t start, Next next) {
  NodeMask seen(dag.size(), false);
  std::vector<std::size_t> frontier{start};
  while (!frontier.empty()) {
    std::size_t u = frontier.back();
    frontier.pop_back();
    for (std::size_t v : next(u)) {
      if (!seen[v]) {
        seen[v] = true;
        frontier.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

NodeMask ancestor_mask(const Dag& dag, std::size_t node) {
  return reach(dag, node, [&](std::size_t u) { return dag.parents(u); });
}

NodeMask descendant_mask(const Dag& dag, std::size_t node) {
  return reach(dag, node, [&](std::size_t u) { return dag.children(u); });
}

NodeSet ancestors(const Dag& dag, std::string_view node) {
  return dag.ids_of(ancestor_mask(dag, dag.index_of(node)));
}

NodeSet descendants(const Dag& dag, std::string_view node) {
  return dag.ids_of(descendant_mask(dag, dag.index_of(node)));
}

NodeMask definition_closure_mask(const Dag& dag, std::size_t node) {
  NodeMask seen(dag.size(), false);
  std::vector<std::size_t> frontier{node};
  while (!frontier.empty()) {
    const NodeDef& def = dag.node(frontier.back());
    frontier.pop_back();
    if (!def.form) continue;
    for (const auto& arg : def.form->args) {
      if (!dag.contains(arg)) continue;
      std::size_t a = dag.index_of(arg);
      if (!seen[a]) {
        seen[a] = true;
        frontier.push_back(a);
      }
    }
  }
  return seen;
}

NodeMask base_component_mask(const Dag& dag, std::size_t node) {
  NodeMask base(dag.size(), false);
  if (!dag.node(node).deterministic()) {
    base[node] = true;
    return base;
  }
  NodeMask reached = definition_closure_mask(dag, node);
  for (std::size_t i = 0; i < dag.size(); ++i) {
    base[i] = reached[i] && !dag.node(i).deterministic();
  }
  return base;
}

NodeSet base_components(const Dag& dag, std::string_view node) {
  return dag.ids_of(base_component_mask(dag, dag.index_of(node)));
}

}  // namespace detdag
