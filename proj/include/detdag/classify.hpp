#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detdag/dsep.hpp"
#include "detdag/graph.hpp"

namespace detdag {

enum class WarningCode {
  ConsistencyRisk,
  VarianceDominance,
  TemporalSpread,
  RatioConflation,
  FixedWhole,
  Tautology,
  AggregatedParts,
  Positivity,
  NotIdentifiable,
  HomogeneityAssumed,
};

// Stable machine identifiers, e.g. "CONSISTENCY_RISK".
std::string_view warning_code(WarningCode code) noexcept;

struct Warning {
  WarningCode code;
  std::string text;
};

enum class TautologyRelation { SharedParent, SelfOrPart };

struct TautologyFinding {
  std::pair<NodeId, NodeId> pair;  // declaration order
  NodeSet shared_base;
  TautologyRelation relation;
  std::string explanation;
};

enum class EstimandKind { TotalEffect, RelativeEffect, CompositeSummaryEffect, ConflatedRatioEffect };

std::string_view estimand_kind_name(EstimandKind kind) noexcept;

struct EstimandReport {
  EstimandKind kind = EstimandKind::TotalEffect;
  NodeSet substituting;                // RelativeEffect
  std::optional<NodeId> whole;         // the whole the exposure is a part of
  NodeSet numerator_base;              // ConflatedRatioEffect
  NodeSet denominator_base;
  std::vector<Warning> warnings;

  // Backdoor diagnostics, computed on the graph without the exposure's outgoing arcs.
  std::vector<NodeSet> backdoor_sets;  // minimal valid sets
  bool identifiable = false;           // some valid set exists
  bool adjustment_valid = false;       // `adjust` itself closes every backdoor
  NodeSet adjustment_descendants;      // members of `adjust` that may not be used
  std::optional<Path> open_backdoor;   // witness when `adjust` leaves one open
};

enum class ConfounderKind { NotAConfounder, UncomplicatedConfounder, InconsistentConfounder, ConfounderMediatorConflict };
enum class ParentRelation { Confounder, Mediator, Unrelated };

std::string_view confounder_kind_name(ConfounderKind kind) noexcept;
std::string_view parent_relation_name(ParentRelation relation) noexcept;

struct ConfounderRole {
  ConfounderKind role = ConfounderKind::NotAConfounder;
  bool identifiable = true;
  std::vector<std::pair<NodeId, ParentRelation>> per_parent;  // base components in declaration order
  std::vector<Warning> warnings;
};

struct ClassifyOptions {
  std::size_t max_backdoor_size = 3;
  double heterogeneity_ratio = 2.0;  // max/min |coef| above which a confounder is inconsistent
  std::size_t variance_samples = 20000;
  std::uint64_t variance_seed = 1;
};

/// Pairs whose association is self-fulfilling: one is (part of) the other's
/// definition, or the two share a base component. At least one member is
/// deterministic.
std::vector<TautologyFinding> detect_tautologies(const Dag& dag);

/// What an exposure -> outcome analysis adjusting for `adjust` estimates.
/// Throws DegenerateQuery when the exposure or outcome is determined by `adjust`.
EstimandReport classify_estimand(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                 const NodeSet& adjust, const ClassifyOptions& options = {});

ConfounderRole classify_confounder(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                   const NodeId& candidate, const ClassifyOptions& options = {});

/// Minimal sets of size <= max_size that D-separate exposure and outcome once
/// the exposure's outgoing arcs are removed. Descendants of the exposure and of
/// its base components are excluded.
std::vector<NodeSet> enumerate_backdoor_sets(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                             std::size_t max_size);

std::vector<Warning> consistency_report(const Dag& dag, const NodeId& exposure,
                                        const ClassifyOptions& options = {});

// The graph with every arc leaving `node` removed (definitions are kept).
Dag prune_outgoing(const Dag& dag, const NodeId& node);

}  // namespace detdag
