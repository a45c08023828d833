#include "detdag/classify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "detdag/dsl.hpp"
#include "detdag/oracle.hpp"

namespace detdag {

std::string_view warning_code(WarningCode code) noexcept {
  switch (code) {
    case WarningCode::ConsistencyRisk: return "CONSISTENCY_RISK";
    case WarningCode::VarianceDominance: return "VARIANCE_DOMINANCE";
    case WarningCode::TemporalSpread: return "TEMPORAL_SPREAD";
    case WarningCode::RatioConflation: return "RATIO_CONFLATION";
    case WarningCode::FixedWhole: return "FIXED_WHOLE";
    case WarningCode::Tautology: return "TAUTOLOGY";
    case WarningCode::AggregatedParts: return "AGGREGATED_PARTS";
    case WarningCode::Positivity: return "POSITIVITY";
    case WarningCode::NotIdentifiable: return "NOT_IDENTIFIABLE";
    case WarningCode::HomogeneityAssumed: return "HOMOGENEITY_ASSUMED";
  }
  return "?";
}

std::string_view estimand_kind_name(EstimandKind kind) noexcept {
  switch (kind) {
    case EstimandKind::TotalEffect: return "TotalEffect";
    case EstimandKind::RelativeEffect: return "RelativeEffect";
    case EstimandKind::CompositeSummaryEffect: return "CompositeSummaryEffect";
    case EstimandKind::ConflatedRatioEffect: return "ConflatedRatioEffect";
  }
  return "?";
}

std::string_view confounder_kind_name(ConfounderKind kind) noexcept {
  switch (kind) {
    case ConfounderKind::NotAConfounder: return "NotAConfounder";
    case ConfounderKind::UncomplicatedConfounder: return "UncomplicatedConfounder";
    case ConfounderKind::InconsistentConfounder: return "InconsistentConfounder";
    case ConfounderKind::ConfounderMediatorConflict: return "ConfounderMediatorConflict";
  }
  return "?";
}

std::string_view parent_relation_name(ParentRelation relation) noexcept {
  switch (relation) {
    case ParentRelation::Confounder: return "Confounder";
    case ParentRelation::Mediator: return "Mediator";
    case ParentRelation::Unrelated: return "Unrelated";
  }
  return "?";
}

namespace {

std::string braces(const NodeSet& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ", " : "") + ids[i];
  return out + "}";
}

NodeMask intersect(const NodeMask& a, const NodeMask& b) {
  NodeMask out(a.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

bool any(const NodeMask& m) { return std::find(m.begin(), m.end(), true) != m.end(); }

std::size_t count(const NodeMask& m) { return std::size_t(std::count(m.begin(), m.end(), true)); }

// Can `from` reach `to` along directed edges without entering a node in `avoid`?
bool reaches_avoiding(const Dag& dag, std::size_t from, std::size_t to, const NodeMask& avoid) {
  NodeMask seen(dag.size(), false);
  std::vector<std::size_t> frontier{from};
  seen[from] = true;
  while (!frontier.empty()) {
    std::size_t u = frontier.back();
    frontier.pop_back();
    for (std::size_t v : dag.children(u)) {
      if (v == to) return true;
      if (seen[v] || avoid[v]) continue;
      seen[v] = true;
      frontier.push_back(v);
    }
  }
  return false;
}

// Sum-form nodes that list `node` as a part, in declaration order.
std::vector<std::size_t> wholes_of(const Dag& dag, std::size_t node) {
  std::vector<std::size_t> out;
  const NodeId& id = dag.node(node).id;
  for (std::size_t w = 0; w < dag.size(); ++w) {
    const auto& f = dag.node(w).form;
    if (f && f->kind == FormKind::Sum && std::find(f->args.begin(), f->args.end(), id) != f->args.end()) {
      out.push_back(w);
    }
  }
  return out;
}

// Descendants of the exposure and of every base component of it.
NodeMask backdoor_forbidden(const Dag& dag, std::size_t exposure) {
  NodeMask forbidden = descendant_mask(dag, exposure);
  NodeMask base = base_component_mask(dag, exposure);
  for (std::size_t p = 0; p < dag.size(); ++p) {
    if (!base[p] || p == exposure) continue;
    NodeMask desc = descendant_mask(dag, p);
    for (std::size_t i = 0; i < dag.size(); ++i) {
      if (desc[i]) forbidden[i] = true;
    }
  }
  return forbidden;
}

}  // namespace

Dag prune_outgoing(const Dag& dag, const NodeId& node) {
  dag.index_of(node);
  DagBuilder b(dag.name());
  for (const auto& n : dag.nodes()) b.add_node(n);
  for (const auto& e : dag.edges()) {
    if (e.from != node) b.add_edge(e);
  }
  return std::move(b).build();
}

std::vector<TautologyFinding> detect_tautologies(const Dag& dag) {
  std::vector<TautologyFinding> out;
  const std::size_t n = dag.size();
  std::vector<NodeMask> base(n);
  std::vector<NodeMask> defn(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = base_component_mask(dag, i);
    defn[i] = definition_closure_mask(dag, i);
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const NodeDef& a = dag.node(u);
      const NodeDef& b = dag.node(v);
      if (!a.deterministic() && !b.deterministic()) continue;
      NodeMask shared = intersect(base[u], base[v]);
      bool part = defn[u][v] || defn[v][u];
      if (!part && !any(shared)) continue;
      TautologyFinding f{{a.id, b.id}, dag.ids_of(shared),
                         part ? TautologyRelation::SelfOrPart : TautologyRelation::SharedParent, {}};
      if (part) {
        const NodeDef& whole = defn[u][v] ? a : b;
        const NodeDef& piece = defn[u][v] ? b : a;
        f.explanation = piece.id + " is part of the definition of " + whole.id +
                        ", so their association is self-fulfilling";
      } else {
        f.explanation = a.id + " and " + b.id + " share the parent component" +
                        (f.shared_base.size() > 1 ? "s " : " ") + braces(f.shared_base) +
                        ", so they share a tautological association";
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<NodeSet> enumerate_backdoor_sets(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                             std::size_t max_size) {
  std::size_t x = dag.index_of(exposure);
  std::size_t y = dag.index_of(outcome);
  if (x == y) throw QueryError("exposure and outcome must differ");
  NodeMask forbidden = backdoor_forbidden(dag, x);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (i != x && i != y && !forbidden[i]) candidates.push_back(i);
  }
  Dag pruned = prune_outgoing(dag, exposure);

  std::vector<std::vector<std::size_t>> found;
  std::vector<NodeSet> out;
  for (std::size_t size = 0; size <= std::min(max_size, candidates.size()); ++size) {
    std::vector<bool> pick(candidates.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
    do {
      std::vector<std::size_t> set;
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (pick[k]) set.push_back(candidates[k]);
      }
      bool has_valid_subset = std::any_of(found.begin(), found.end(), [&](const auto& f) {
        return std::includes(set.begin(), set.end(), f.begin(), f.end());
      });
      if (has_valid_subset) continue;
      NodeSet ids;
      for (std::size_t i : set) ids.push_back(dag.node(i).id);
      if (D_separation_outcome(pruned, exposure, outcome, ids) == SeparationOutcome::Separated) {
        found.push_back(set);
        out.push_back(std::move(ids));
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

std::vector<Warning> consistency_report(const Dag& dag, const NodeId& exposure, const ClassifyOptions& options) {
  std::size_t x = dag.index_of(exposure);
  const NodeDef& node = dag.node(x);
  NodeMask base = base_component_mask(dag, x);
  NodeSet parts = dag.ids_of(base);
  std::vector<Warning> out;
  if (!node.deterministic() || parts.size() < 2) return out;

  out.push_back({WarningCode::ConsistencyRisk,
                 "the same value of " + exposure + " can be obtained from many combinations of " +
                     braces(parts) + "; an effect of " + exposure +
                     " mixes several versions of treatment"});

  bool has_sim = std::any_of(parts.begin(), parts.end(), [&](const NodeId& p) {
    const NodeDef& d = dag.node(p);
    return d.mean || d.sd;
  });
  if (has_sim) {
    std::string text = "the summary effect of " + exposure +
                       " is distorted towards the components with the largest variance contribution";
    try {
      auto shares = variance_decomposition(dag, {}, exposure, options.variance_samples, options.variance_seed);
      auto top = std::max_element(shares.begin(), shares.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
      text += "; variance shares";
      for (std::size_t i = 0; i < shares.size(); ++i) {
        text += (i ? ", " : " ") + shares[i].first + "=" + format_number(std::round(shares[i].second * 1000) / 1000);
      }
      text += " (dominated by " + top->first + ")";
    } catch (const std::exception& e) {
      text += std::string("; could not be quantified: ") + e.what();
    }
    out.push_back({WarningCode::VarianceDominance, std::move(text)});
  }

  std::set<double> times;
  for (const auto& p : parts) {
    if (const auto& t = dag.node(p).time) times.insert(*t);
  }
  if (times.size() > 1) {
    out.push_back({WarningCode::TemporalSpread,
                   "the components of " + exposure +
                       " crystallise at different times; a variable may confound one component and "
                       "mediate another"});
  }
  if (parts.size() > 5) {
    out.push_back({WarningCode::Positivity, exposure + " has " + std::to_string(parts.size()) +
                                                " components; positivity violations become more likely"});
  }
  return out;
}

EstimandReport classify_estimand(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                 const NodeSet& adjust, const ClassifyOptions& options) {
  std::size_t x = dag.index_of(exposure);
  std::size_t y = dag.index_of(outcome);
  NodeMask given = dag.mask_of(adjust);
  if (x == y) throw QueryError("exposure and outcome must differ");
  if (given[x] || given[y]) throw QueryError("exposure and outcome may not be adjusted for");
  NodeMask closure = det_closure_mask(dag, given);
  for (std::size_t v : {x, y}) {
    if (closure[v]) throw DegenerateQuery(dag.node(v).id, dag.ids_of(closure));
  }

  EstimandReport report;
  const NodeDef& exp = dag.node(x);
  NodeMask exp_base = base_component_mask(dag, x);
  const auto& form = exp.form;
  bool ratio_conflated = false;
  if (form && form->kind == FormKind::Ratio) {
    NodeMask num = base_component_mask(dag, dag.index_of(form->args[0]));
    NodeMask den = base_component_mask(dag, dag.index_of(form->args[1]));
    if (any(intersect(num, den))) {
      ratio_conflated = true;
      report.kind = EstimandKind::ConflatedRatioEffect;
      report.numerator_base = dag.ids_of(num);
      report.denominator_base = dag.ids_of(den);
      report.warnings.push_back(
          {WarningCode::RatioConflation,
           exposure + " conflates the effects of its numerator components " + braces(report.numerator_base) +
               " with the inverse of the effects of its denominator components " +
               braces(report.denominator_base)});
    }
  }

  std::vector<std::size_t> wholes = wholes_of(dag, x);
  if (!ratio_conflated && !wholes.empty()) {
    auto conditioned = std::find_if(wholes.begin(), wholes.end(),
                                    [&](std::size_t w) { return closure[w] || dag.node(w).fixed; });
    std::size_t w = conditioned != wholes.end() ? *conditioned : wholes.front();
    const NodeDef& whole = dag.node(w);
    report.whole = whole.id;
    if (conditioned != wholes.end()) {
      report.kind = EstimandKind::RelativeEffect;
      for (const auto& part : whole.form->args) {
        std::size_t p = dag.index_of(part);
        if (p != x && !closure[p]) report.substituting.push_back(part);
      }
      if (whole.fixed && !closure[w]) {
        report.warnings.push_back({WarningCode::FixedWhole,
                                   whole.id + " is structurally fixed, so only relative effects of " +
                                       exposure + " exist; a total effect cannot be estimated"});
      }
    } else {
      report.kind = EstimandKind::TotalEffect;
    }
    if (whole.form->args.size() > 5) {
      report.warnings.push_back({WarningCode::Positivity,
                                 whole.id + " has " + std::to_string(whole.form->args.size()) +
                                     " parts; positivity violations become more likely"});
    }
    // An adjusted aggregate of the other parts ("remaining intake").
    for (const auto& a : adjust) {
      const auto& af = dag.node(a).form;
      if (!af || af->kind != FormKind::Sum) continue;
      for (std::size_t wi : wholes) {
        const auto& parts = dag.node(wi).form->args;
        bool inside = std::all_of(af->args.begin(), af->args.end(), [&](const NodeId& p) {
          return p != exposure && std::find(parts.begin(), parts.end(), p) != parts.end();
        });
        if (inside) {
          report.warnings.push_back({WarningCode::AggregatedParts,
                                     a + " aggregates other parts of " + dag.node(wi).id +
                                         "; residual confounding remains wherever their effects differ"});
          break;
        }
      }
    }
  } else if (!ratio_conflated && exp.deterministic() && count(exp_base) >= 2) {
    report.kind = EstimandKind::CompositeSummaryEffect;
    if (form->kind == FormKind::Ratio) {
      report.warnings.push_back({WarningCode::RatioConflation,
                                 exposure + " standardises by division; its effect is distorted by the inverse "
                                            "of the denominator " + form->args[1]});
    }
    auto more = consistency_report(dag, exposure, options);
    report.warnings.insert(report.warnings.end(), more.begin(), more.end());
  }

  NodeMask out_base = base_component_mask(dag, y);
  NodeMask shared = intersect(exp_base, out_base);
  if ((exp.deterministic() || dag.node(y).deterministic()) &&
      (any(shared) || definition_closure_mask(dag, x)[y] || definition_closure_mask(dag, y)[x])) {
    report.warnings.push_back({WarningCode::Tautology,
                               exposure + " and " + outcome + " share the components " +
                                   braces(dag.ids_of(shared)) + "; part of their association is tautological"});
  }

  report.backdoor_sets = enumerate_backdoor_sets(dag, exposure, outcome, options.max_backdoor_size);
  report.identifiable = !report.backdoor_sets.empty();
  if (!report.identifiable) {
    report.warnings.push_back({WarningCode::NotIdentifiable,
                               "no adjustment set of size <= " + std::to_string(options.max_backdoor_size) +
                                   " closes every backdoor path from " + exposure + " to " + outcome});
  }
  NodeMask forbidden = backdoor_forbidden(dag, x);
  for (const auto& a : adjust) {
    if (forbidden[dag.index_of(a)]) report.adjustment_descendants.push_back(a);
  }
  Dag pruned = prune_outgoing(dag, exposure);
  SeparationVerdict v = is_D_separated(pruned, exposure, outcome, adjust);
  report.open_backdoor = v.witness;
  report.adjustment_valid = v.separated && report.adjustment_descendants.empty();
  return report;
}

ConfounderRole classify_confounder(const Dag& dag, const NodeId& exposure, const NodeId& outcome,
                                   const NodeId& candidate, const ClassifyOptions& options) {
  std::size_t x = dag.index_of(exposure);
  std::size_t y = dag.index_of(outcome);
  std::size_t c = dag.index_of(candidate);
  if (x == y) throw QueryError("exposure and outcome must differ");
  if (c == x || c == y) throw QueryError("candidate must differ from exposure and outcome");

  ConfounderRole role;
  NodeMask base = base_component_mask(dag, x);
  NodeMask cand_anc = ancestor_mask(dag, c);
  NodeMask cand_desc_of(dag.size(), false);
  std::vector<double> coefs;
  std::size_t confounders = 0;
  std::size_t mediators = 0;
  std::size_t undeclared = 0;

  for (std::size_t p = 0; p < dag.size(); ++p) {
    if (!base[p]) continue;
    NodeMask avoid(dag.size(), false);
    avoid[p] = true;
    avoid[x] = true;
    bool causes_p = ancestor_mask(dag, p)[c];
    bool confounder = causes_p && reaches_avoiding(dag, c, y, avoid);
    bool mediator = cand_anc[p] && ancestor_mask(dag, y)[c];
    ParentRelation rel = confounder ? ParentRelation::Confounder
                         : mediator ? ParentRelation::Mediator
                                    : ParentRelation::Unrelated;
    role.per_parent.emplace_back(dag.node(p).id, rel);
    if (confounder) {
      ++confounders;
      const EdgeDef* e = dag.find_edge(c, p);
      if (e && e->coef) {
        coefs.push_back(std::abs(*e->coef));
      } else {
        ++undeclared;
      }
    }
    if (mediator) ++mediators;
  }

  std::size_t parents = role.per_parent.size();
  if (confounders == 0) {
    role.role = ConfounderKind::NotAConfounder;
  } else if (mediators > 0) {
    role.role = ConfounderKind::ConfounderMediatorConflict;
    role.identifiable = false;
    role.warnings.push_back({WarningCode::NotIdentifiable,
                             candidate + " confounds some components of " + exposure +
                                 " and mediates others; adjusting for it blocks part of the effect, "
                                 "not adjusting leaves confounding"});
  } else {
    bool heterogeneous = false;
    if (coefs.size() >= 2) {
      auto [lo, hi] = std::minmax_element(coefs.begin(), coefs.end());
      heterogeneous = *lo == 0.0 ? *hi > 0.0 : *hi / *lo > options.heterogeneity_ratio;
    }
    bool partial = confounders < parents;
    role.role = (heterogeneous || partial) ? ConfounderKind::InconsistentConfounder
                                           : ConfounderKind::UncomplicatedConfounder;
    if (role.role == ConfounderKind::UncomplicatedConfounder && parents > 1 && undeclared > 0) {
      role.warnings.push_back({WarningCode::HomogeneityAssumed,
                               "no coefficients declared on " + candidate +
                                   "'s arcs; a similar effect on every component is assumed"});
    }
  }
  return role;
}

}  // namespace detdag
