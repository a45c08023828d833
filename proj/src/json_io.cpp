#include "detdag/json_io.hpp"

#include <cmath>

namespace detdag {

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string_view edge_kind_name(EdgeKind kind) {
  return kind == EdgeKind::Deterministic ? "deterministic" : "probabilistic";
}

json triple(const TripleCheck& t) {
  return {{"x", t.x},
          {"y", t.y},
          {"given", t.given},
          {"separated", t.separated},
          {"independent", t.verdict.independent},
          {"r", number_or_null(t.verdict.r)},
          {"z", number_or_null(t.verdict.z)},
          {"p_value", number_or_null(t.verdict.p_value)}};
}

}  // namespace

json to_json(const Dag& dag) {
  json nodes = json::array();
  for (const auto& n : dag.nodes()) {
    json node = {{"id", n.id},
                 {"label", n.label ? json(*n.label) : json(nullptr)},
                 {"kind", n.deterministic() ? "deterministic" : "probabilistic"},
                 {"time", optional_number(n.time)},
                 {"mean", optional_number(n.mean)},
                 {"sd", optional_number(n.sd)},
                 {"fixed", n.fixed}};
    if (n.form) {
      node["form"] = {{"kind", form_keyword(n.form->kind)},
                      {"args", n.form->args},
                      {"constant", n.form->constant}};
      node["invertible"] = n.form->invertible();
    } else {
      node["form"] = nullptr;
    }
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& e : dag.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", edge_kind_name(e.kind)}, {"coef", optional_number(e.coef)}});
  }
  return {{"name", dag.name()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json to_json(const ParseError& error) {
  return {{"kind", error.kind == ParseError::Kind::Syntax ? "syntax" : "semantic"},
          {"line", error.line},
          {"column", error.column},
          {"message", error.message},
          {"snippet", error.snippet}};
}

json to_json(const Violation& violation) {
  return {{"code", violation_name(violation.code)}, {"message", violation.message}, {"location", violation.location}};
}

json to_json(const Path& path) {
  json steps = json::array();
  for (const auto& s : path.steps) {
    json step = {{"node", s.node}, {"role", step_role_name(s.role)}, {"open", s.open}};
    if (s.via) step["via"] = *s.via;
    steps.push_back(std::move(step));
  }
  json edges = json::array();
  for (const auto& e : path.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", edge_kind_name(e.kind)}});
  }
  return {{"steps", std::move(steps)}, {"edges", std::move(edges)}, {"text", path.to_string()}};
}

json to_json(const SeparationVerdict& verdict) {
  json out = {{"separated", verdict.separated}, {"outcome", verdict.separated ? "separated" : "connected"}};
  out["witness"] = verdict.witness ? to_json(*verdict.witness) : json(nullptr);
  return out;
}

json to_json(const Warning& warning) { return {{"code", warning_code(warning.code)}, {"text", warning.text}}; }

json to_json(const EstimandReport& report) {
  json out = {{"kind", estimand_kind_name(report.kind)}};
  out["substituting"] = report.substituting;
  out["whole"] = report.whole ? json(*report.whole) : json(nullptr);
  out["numerator_base"] = report.numerator_base;
  out["denominator_base"] = report.denominator_base;
  out["warnings"] = to_json(report.warnings);
  out["backdoor_sets"] = report.backdoor_sets;
  out["identifiable"] = report.identifiable;
  out["adjustment_valid"] = report.adjustment_valid;
  out["adjustment_descendants"] = report.adjustment_descendants;
  out["open_backdoor"] = report.open_backdoor ? to_json(*report.open_backdoor) : json(nullptr);
  return out;
}

json to_json(const ConfounderRole& role) {
  json per_parent = json::array();
  for (const auto& [p, rel] : role.per_parent) per_parent.push_back({{"parent", p}, {"relation", parent_relation_name(rel)}});
  return {{"role", confounder_kind_name(role.role)},
          {"identifiable", role.identifiable},
          {"per_parent", std::move(per_parent)},
          {"warnings", to_json(role.warnings)}};
}

json to_json(const TautologyFinding& finding) {
  return {{"pair", {finding.pair.first, finding.pair.second}},
          {"shared_base", finding.shared_base},
          {"relation", finding.relation == TautologyRelation::SelfOrPart ? "SelfOrPart" : "SharedParent"},
          {"explanation", finding.explanation}};
}

json to_json(const VerificationReport& report) {
  json disagreements = json::array();
  for (const auto& t : report.disagreements) disagreements.push_back(triple(t));
  return {{"checked", report.checked()},
          {"agreeing", report.agreeing()},
          {"agreement", report.agreement()},
          {"full_agreement", report.full_agreement()},
          {"matrix",
           {{"separated_independent", report.separated_independent},
            {"separated_dependent", report.separated_dependent},
            {"connected_independent", report.connected_independent},
            {"connected_dependent", report.connected_dependent}}},
          {"skipped_degenerate", report.skipped_degenerate},
          {"skipped_numerical", report.skipped_numerical},
          {"nonlinear_checked", report.nonlinear_checked},
          {"nonlinear_agreeing", report.nonlinear_agreeing},
          {"disagreements", std::move(disagreements)}};
}

}  // namespace detdag
