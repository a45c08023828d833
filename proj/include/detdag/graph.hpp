#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace detdag {

using NodeId = std::string;

// Set-valued results are vectors sorted by node declaration order.
using NodeSet = std::vector<NodeId>;

// One flag per node, indexed by declaration order.
using NodeMask = std::vector<bool>;

class DagError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownNode : public DagError {
 public:
  explicit UnknownNode(std::string id)
      : DagError("unknown node '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

// A query whose preconditions do not hold (x == y, x in the conditioning set, ...).
class QueryError : public DagError {
 public:
  using DagError::DagError;
};

// The query variable is a constant once the conditioning set is known.
class DegenerateQuery : public QueryError {
 public:
  DegenerateQuery(std::string variable, NodeSet closure)
      : QueryError("'" + variable + "' is functionally determined by the conditioning set"),
        variable_(std::move(variable)),
        closure_(std::move(closure)) {}
  const std::string& variable() const noexcept { return variable_; }
  const NodeSet& closure() const noexcept { return closure_; }

 private:
  std::string variable_;
  NodeSet closure_;
};

enum class FormKind { Sum, Difference, Ratio, Product, Power, Scale, Threshold, AggMean, AggPrev };

/// Algebraic recipe of a deterministic node.
///
/// `args` holds the node arguments in recipe order. For the aggregate forms the
/// last argument is the group node. `constant` carries the exponent (Power, and
/// the denominator exponent of Ratio), the factor (Scale) or the cutpoint
/// (Threshold, AggPrev).
struct FunctionalForm {
  FormKind kind = FormKind::Sum;
  std::vector<NodeId> args;
  double constant = 0.0;

  static FunctionalForm sum(std::vector<NodeId> terms);
  static FunctionalForm product(std::vector<NodeId> factors);
  static FunctionalForm difference(NodeId minuend, NodeId subtrahend);
  static FunctionalForm ratio(NodeId numerator, NodeId denominator, double exponent = 1.0);
  static FunctionalForm power(NodeId base, double exponent);
  static FunctionalForm scale(NodeId arg, double factor);
  static FunctionalForm threshold(NodeId arg, double cutpoint);
  static FunctionalForm agg_mean(NodeId arg, NodeId group);
  static FunctionalForm agg_prev(NodeId arg, double cutpoint, NodeId group);

  // Each argument can be recovered from the value and the other arguments.
  bool invertible() const noexcept;
  // Sum, Difference and Scale: the node is a linear combination of its arguments.
  bool linear() const noexcept;
  bool aggregate() const noexcept { return kind == FormKind::AggMean || kind == FormKind::AggPrev; }
  const NodeId* group() const noexcept { return aggregate() ? &args.back() : nullptr; }

  friend bool operator==(const FunctionalForm&, const FunctionalForm&) = default;
};

std::string_view form_keyword(FormKind kind) noexcept;

struct NodeDef {
  NodeId id;
  std::optional<std::string> label;
  std::optional<FunctionalForm> form;  // empty for probabilistic nodes
  std::optional<double> time;          // crystallisation time, arbitrary units
  std::optional<double> mean;          // exogenous noise parameters
  std::optional<double> sd;
  bool fixed = false;  // structurally fixed whole (e.g. hours in a day)

  bool deterministic() const noexcept { return form.has_value(); }
  friend bool operator==(const NodeDef&, const NodeDef&) = default;
};

enum class EdgeKind { Probabilistic, Deterministic };

struct EdgeDef {
  NodeId from;
  NodeId to;
  EdgeKind kind = EdgeKind::Probabilistic;
  std::optional<double> coef;

  friend bool operator==(const EdgeDef&, const EdgeDef&) = default;
};

/// Immutable node/edge graph. Built through DagBuilder; construction does not
/// validate, see validate().
class Dag {
 public:
  Dag() = default;

  const std::string& name() const noexcept { return name_; }
  std::span<const NodeDef> nodes() const noexcept { return nodes_; }
  std::span<const EdgeDef> edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws UnknownNode
  const NodeDef& node(std::string_view id) const { return nodes_[index_of(id)]; }
  const NodeDef& node(std::size_t index) const { return nodes_[index]; }

  // Adjacency over edges whose endpoints are both declared; deduplicated, sorted.
  std::span<const std::size_t> parents(std::size_t index) const { return parents_[index]; }
  std::span<const std::size_t> children(std::size_t index) const { return children_[index]; }
  const EdgeDef* find_edge(std::size_t from, std::size_t to) const;

  NodeMask mask_of(std::span<const NodeId> ids) const;  // throws UnknownNode
  NodeSet ids_of(const NodeMask& mask) const;

  // Structural equality: same name, same nodes in order, same edge multiset.
  friend bool operator==(const Dag& a, const Dag& b);

 private:
  friend class DagBuilder;
  void index();

  std::string name_;
  std::vector<NodeDef> nodes_;
  std::vector<EdgeDef> edges_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

class DagBuilder {
 public:
  explicit DagBuilder(std::string name) { dag_.name_ = std::move(name); }
  explicit DagBuilder(const Dag& from) : dag_(from) {}

  DagBuilder& add_node(NodeDef node);
  DagBuilder& probabilistic(NodeId id);
  // Declares a deterministic node and the arcs implied by its form.
  DagBuilder& define(NodeId id, FunctionalForm form);
  DagBuilder& add_edge(EdgeDef edge);
  DagBuilder& edge(NodeId from, NodeId to, std::optional<double> coef = std::nullopt);

  NodeDef* find(std::string_view id);
  std::vector<NodeDef>& nodes() { return dag_.nodes_; }
  std::vector<EdgeDef>& edges() { return dag_.edges_; }

  Dag build() &&;
  Dag build() const&;

 private:
  Dag dag_;
};

enum class ViolationCode {
  Cycle,
  DuplicateNode,
  DuplicateEdge,
  UnknownEndpoint,
  InvalidForm,
  MissingDefinitionArc,
  DeterministicParent,
  EdgeKindMismatch,
  TemporalOrder,
  DeterministicNoise,
  InvalidNoise,
};

std::string_view violation_name(ViolationCode code) noexcept;

struct Violation {
  ViolationCode code;
  std::string message;
  std::vector<NodeId> location;  // node ids; an edge is cited as {from, to}
};

std::vector<Violation> validate(const Dag& dag);

// Node indices in a topological order; ties broken by declaration order.
// Throws DagError on a cycle.
std::vector<std::size_t> topological_order(const Dag& dag);

NodeMask ancestor_mask(const Dag& dag, std::size_t node);
NodeMask descendant_mask(const Dag& dag, std::size_t node);
NodeSet ancestors(const Dag& dag, std::string_view node);
NodeSet descendants(const Dag& dag, std::string_view node);

// Probabilistic nodes reached by expanding deterministic definitions transitively.
NodeMask base_component_mask(const Dag& dag, std::size_t node);
NodeSet base_components(const Dag& dag, std::string_view node);

// Every node reached through definition arguments (deterministic intermediates included).
NodeMask definition_closure_mask(const Dag& dag, std::size_t node);

}  // namespace detdag
