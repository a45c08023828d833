#include "detdag/dsep.hpp"

#include <algorithm>

namespace detdag {

std::string_view step_role_name(StepRole role) noexcept {
  switch (role) {
    case StepRole::Endpoint: return "endpoint";
    case StepRole::Chain: return "chain";
    case StepRole::Fork: return "fork";
    case StepRole::Collider: return "collider";
  }
  return "?";
}

std::string Path::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += steps[i].node;
    if (i >= edges.size()) continue;
    const PathEdge& e = edges[i];
    bool forward = e.from == steps[i].node;
    bool det = e.kind == EdgeKind::Deterministic;
    out += forward ? (det ? "⇒" : "→") : (det ? "⇐" : "←");
  }
  return out;
}

NodeMask det_closure_mask(const Dag& dag, const NodeMask& given) {
  NodeMask closed = given;
  std::vector<std::vector<std::size_t>> args(dag.size());
  for (std::size_t d = 0; d < dag.size(); ++d) {
    const auto& form = dag.node(d).form;
    if (!form) continue;
    for (const auto& a : form->args) args[d].push_back(dag.index_of(a));
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t d = 0; d < dag.size(); ++d) {
      const auto& form = dag.node(d).form;
      if (!form) continue;
      std::size_t unknown = 0;
      std::size_t missing = 0;
      for (std::size_t a : args[d]) {
        if (!closed[a]) {
          ++unknown;
          missing = a;
        }
      }
      if (!closed[d] && unknown == 0) {
        closed[d] = true;
        changed = true;
      } else if (closed[d] && unknown == 1 && form->invertible()) {
        closed[missing] = true;
        changed = true;
      }
    }
  }
  return closed;
}

NodeSet det_closure(const Dag& dag, const NodeSet& given) {
  return dag.ids_of(det_closure_mask(dag, dag.mask_of(given)));
}

namespace {

// Conditioning as seen by the path rules: a non-collider blocks when `block`
// holds it; a collider is open when `opens` holds it (itself or a descendant
// conditioned on).
struct Conditioning {
  NodeMask block;
  NodeMask opens;
};

Conditioning make_conditioning(const Dag& dag, NodeMask set) {
  NodeMask opens = set;
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (!set[i]) continue;
    NodeMask anc = ancestor_mask(dag, i);
    for (std::size_t j = 0; j < dag.size(); ++j) {
      if (anc[j]) opens[j] = true;
    }
  }
  return {std::move(set), std::move(opens)};
}

// Active-trail reachability from `start`. up[n]: the ball reached n from a
// child; down[n]: from a parent.
struct Reach {
  NodeMask up;
  NodeMask down;
};

Reach bayes_ball(const Dag& dag, std::size_t start, const Conditioning& cond) {
  const std::size_t n = dag.size();
  Reach r{NodeMask(n, false), NodeMask(n, false)};
  std::vector<std::pair<std::size_t, bool>> frontier{{start, true}};
  r.up[start] = true;
  auto push = [&](std::size_t v, bool from_child) {
    auto& seen = from_child ? r.up : r.down;
    if (!seen[v]) {
      seen[v] = true;
      frontier.emplace_back(v, from_child);
    }
  };
  while (!frontier.empty()) {
    auto [u, from_child] = frontier.back();
    frontier.pop_back();
    bool pass = !cond.block[u];
    if (from_child) {
      if (pass) {
        for (std::size_t p : dag.parents(u)) push(p, true);
        for (std::size_t c : dag.children(u)) push(c, false);
      }
    } else {
      if (pass) {
        for (std::size_t c : dag.children(u)) push(c, false);
      }
      if (cond.opens[u]) {
        for (std::size_t p : dag.parents(u)) push(p, true);
      }
    }
  }
  return r;
}

class WitnessSearch {
 public:
  WitnessSearch(const Dag& dag, std::size_t x, std::size_t y, const Conditioning& cond)
      : dag_(dag), x_(x), y_(y), cond_(cond), on_path_(dag.size(), false) {
    Reach from_y = bayes_ball(dag, y, cond);
    to_parents_.assign(dag.size(), false);
    to_children_.assign(dag.size(), false);
    for (std::size_t i = 0; i < dag.size(); ++i) {
      bool reached = from_y.up[i] || from_y.down[i];
      to_children_[i] = reached && !cond.block[i];
      to_parents_[i] = (from_y.up[i] && !cond.block[i]) || (from_y.down[i] && cond.opens[i]);
    }
    for (std::size_t i = 0; i < dag.size(); ++i) {
      auto& nb = neighbours_.emplace_back();
      nb.insert(nb.end(), dag.parents(i).begin(), dag.parents(i).end());
      nb.insert(nb.end(), dag.children(i).begin(), dag.children(i).end());
      std::sort(nb.begin(), nb.end());
    }
  }

  std::optional<std::vector<std::size_t>> run() {
    path_.push_back(x_);
    on_path_[x_] = true;
    if (extend(false)) return path_;
    return std::nullopt;
  }

 private:
  bool is_child(std::size_t u, std::size_t v) const {
    auto ch = dag_.children(u);
    return std::binary_search(ch.begin(), ch.end(), v);
  }

  // Depth-first over simple paths, neighbours in declaration order, so the first
  // hit is the lexicographically smallest active path.
  bool extend(bool arrived_into) {
    std::size_t cur = path_.back();
    for (std::size_t nb : neighbours_[cur]) {
      if (on_path_[nb]) continue;
      bool into_nb = is_child(cur, nb);
      if (cur != x_) {
        bool collider = arrived_into && !into_nb;
        bool open = collider ? cond_.opens[cur] : !cond_.block[cur];
        if (!open) continue;
      }
      if (nb == y_) {
        path_.push_back(nb);
        return true;
      }
      if (!(into_nb ? to_parents_[nb] : to_children_[nb])) continue;
      path_.push_back(nb);
      on_path_[nb] = true;
      if (extend(into_nb)) return true;
      on_path_[nb] = false;
      path_.pop_back();
    }
    return false;
  }

  const Dag& dag_;
  std::size_t x_;
  std::size_t y_;
  const Conditioning& cond_;
  NodeMask on_path_;
  NodeMask to_parents_;
  NodeMask to_children_;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::vector<std::size_t> path_;
};

Path describe_path(const Dag& dag, const std::vector<std::size_t>& nodes, const Conditioning& cond) {
  Path path;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    std::size_t a = nodes[i];
    std::size_t b = nodes[i + 1];
    const EdgeDef* e = dag.find_edge(a, b);
    if (!e) e = dag.find_edge(b, a);
    path.edges.push_back({e->from, e->to, e->kind});
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    PathStep step{dag.node(nodes[i]).id, StepRole::Endpoint, true, std::nullopt};
    if (i > 0 && i + 1 < nodes.size()) {
      bool in_left = path.edges[i - 1].to == step.node;
      bool in_right = path.edges[i].to == step.node;
      step.role = in_left && in_right     ? StepRole::Collider
                  : !in_left && !in_right ? StepRole::Fork
                                          : StepRole::Chain;
      if (step.role == StepRole::Collider && !cond.block[nodes[i]]) {
        NodeMask desc = descendant_mask(dag, nodes[i]);
        for (std::size_t d = 0; d < dag.size(); ++d) {
          if (desc[d] && cond.block[d]) {
            step.via = dag.node(d).id;
            break;
          }
        }
      }
    }
    path.steps.push_back(std::move(step));
  }
  return path;
}

struct Query {
  std::size_t x;
  std::size_t y;
  NodeMask given;
};

Query check_query(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given) {
  Query q{dag.index_of(x), dag.index_of(y), dag.mask_of(given)};
  if (q.x == q.y) throw QueryError("x and y must differ ('" + x + "')");
  for (const auto* v : {&x, &y}) {
    if (q.given[dag.index_of(*v)]) throw QueryError("'" + *v + "' is in the conditioning set");
  }
  return q;
}

SeparationVerdict verdict(const Dag& dag, const Query& q, const Conditioning& cond) {
  Reach r = bayes_ball(dag, q.x, cond);
  if (!r.up[q.y] && !r.down[q.y]) return {true, std::nullopt};
  auto nodes = WitnessSearch(dag, q.x, q.y, cond).run();
  if (!nodes) throw DagError("internal: active trail without a simple active path");
  return {false, describe_path(dag, *nodes, cond)};
}

void throw_if_degenerate(const Dag& dag, const Query& q, const NodeMask& closure) {
  for (std::size_t v : {q.x, q.y}) {
    if (closure[v]) throw DegenerateQuery(dag.node(v).id, dag.ids_of(closure));
  }
}

}  // namespace

SeparationVerdict is_d_separated(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given) {
  Query q = check_query(dag, x, y, given);
  return verdict(dag, q, make_conditioning(dag, q.given));
}

SeparationVerdict is_D_separated(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given) {
  Query q = check_query(dag, x, y, given);
  NodeMask closure = det_closure_mask(dag, q.given);
  throw_if_degenerate(dag, q, closure);
  return verdict(dag, q, make_conditioning(dag, std::move(closure)));
}

SeparationVerdict separation(const Dag& dag, const NodeId& x, const NodeId& y, const NodeSet& given,
                             Criterion criterion) {
  return criterion == Criterion::Classic ? is_d_separated(dag, x, y, given)
                                         : is_D_separated(dag, x, y, given);
}

SeparationOutcome D_separation_outcome(const Dag& dag, const NodeId& x, const NodeId& y,
                                       const NodeSet& given) {
  Query q = check_query(dag, x, y, given);
  NodeMask closure = det_closure_mask(dag, q.given);
  if (closure[q.x] || closure[q.y]) return SeparationOutcome::Degenerate;
  Reach r = bayes_ball(dag, q.x, make_conditioning(dag, std::move(closure)));
  return (r.up[q.y] || r.down[q.y]) ? SeparationOutcome::Connected : SeparationOutcome::Separated;
}

}  // namespace detdag
