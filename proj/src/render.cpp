#include "detdag/render.hpp"

#include <numeric>
#include <sstream>

namespace detdag {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

// Family = deterministic child plus its arguments. Concurrent when every member
// has the same time, or none has a time. Overlapping concurrent families merge.
std::vector<std::vector<std::size_t>> concurrent_families(const Dag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> boxed(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& form = dag.node(c).form;
    if (!form) continue;
    std::vector<std::size_t> members{c};
    for (const auto& a : form->args) members.push_back(dag.index_of(a));
    const auto& t0 = dag.node(c).time;
    bool concurrent = std::all_of(members.begin(), members.end(),
                                  [&](std::size_t m) { return dag.node(m).time == t0; });
    if (!concurrent) continue;
    for (std::size_t m : members) {
      boxed[m] = true;
      parent[find_root(parent, m)] = find_root(parent, c);
    }
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!boxed[i]) continue;
    std::size_t r = find_root(parent, i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return out;
}

}  // namespace

std::string to_dot(const Dag& dag, const NodeSet& highlight) {
  NodeMask shaded = dag.mask_of(highlight);
  std::ostringstream out;

  auto node_line = [&](std::size_t i, std::string_view indent) {
    const NodeDef& n = dag.node(i);
    std::vector<std::string> attrs;
    if (n.label) attrs.push_back("label=" + quote(*n.label));
    if (n.deterministic()) attrs.push_back("peripheries=2");
    if (shaded[i]) {
      attrs.push_back("style=filled");
      attrs.push_back("fillcolor=\"gray80\"");
    }
    out << indent << quote(n.id);
    for (std::size_t k = 0; k < attrs.size(); ++k) out << (k ? ", " : " [") << attrs[k];
    out << (attrs.empty() ? ";\n" : "];\n");
  };

  out << "digraph " << quote(dag.name()) << " {\n";
  out << "  rankdir=LR;\n";
  auto families = concurrent_families(dag);
  std::vector<bool> in_cluster(dag.size(), false);
  for (std::size_t k = 0; k < families.size(); ++k) {
    out << "  subgraph cluster_" << k << " {\n";
    out << "    style=dashed;\n";
    for (std::size_t i : families[k]) {
      in_cluster[i] = true;
      node_line(i, "    ");
    }
    out << "  }\n";
  }
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (!in_cluster[i]) node_line(i, "  ");
  }
  for (const auto& e : dag.edges()) {
    out << "  " << quote(e.from) << " -> " << quote(e.to);
    if (e.kind == EdgeKind::Deterministic) out << " [color=\"black:white:black\"]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace detdag
