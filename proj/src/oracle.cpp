#include "detdag/oracle.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "detdag/dsep.hpp"

namespace detdag {

namespace {

constexpr double kPositiveMean = 10.0;
constexpr double kDenominatorFloor = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Portable Gaussian stream: the standard distributions are implementation-defined.
class NodeStream {
 public:
  NodeStream(std::uint64_t seed, std::size_t node) : engine_(splitmix64(seed ^ node)) {}

  double uniform() { return (double(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double radius = std::sqrt(-2.0 * std::log(uniform()));
    double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc{} ? std::string(buf.data(), end) : std::string("nan");
}

std::vector<std::size_t> arg_indices(const Dag& dag, const FunctionalForm& form) {
  std::vector<std::size_t> out;
  for (const auto& a : form.args) out.push_back(dag.index_of(a));
  return out;
}

void evaluate_form(const Dag& dag, std::size_t node, Eigen::MatrixXd& cols) {
  const FunctionalForm& form = *dag.node(node).form;
  const NodeId& id = dag.node(node).id;
  auto args = arg_indices(dag, form);
  auto col = [&](std::size_t i) { return cols.col(static_cast<Eigen::Index>(args[i])); };
  auto out = cols.col(static_cast<Eigen::Index>(node));
  const Eigen::Index n = cols.rows();

  switch (form.kind) {
    case FormKind::Sum:
      out = col(0);
      for (std::size_t i = 1; i < args.size(); ++i) out += col(i);
      break;
    case FormKind::Product:
      out = col(0);
      for (std::size_t i = 1; i < args.size(); ++i) out.array() *= col(i).array();
      break;
    case FormKind::Difference:
      out = col(0) - col(1);
      break;
    case FormKind::Ratio: {
      auto den = col(1);
      for (Eigen::Index r = 0; r < n; ++r) {
        double d = form.constant == 1.0 ? den(r) : std::pow(den(r), form.constant);
        if (!(std::abs(d) >= kDenominatorFloor)) {
          throw RatioDenominatorNearZero("'" + id + "': denominator " + fmt(den(r)) + " at row " +
                                         std::to_string(r));
        }
        out(r) = col(0)(r) / d;
      }
      break;
    }
    case FormKind::Power: {
      auto base = col(0);
      bool integral = std::trunc(form.constant) == form.constant;
      for (Eigen::Index r = 0; r < n; ++r) {
        double b = base(r);
        if ((b < 0.0 && !integral) || (b == 0.0 && form.constant < 0.0)) {
          throw InvalidParams("'" + id + "': power undefined for base " + fmt(b));
        }
        out(r) = std::pow(b, form.constant);
      }
      break;
    }
    case FormKind::Scale:
      out = form.constant * col(0);
      break;
    case FormKind::Threshold:
      out = (col(0).array() >= form.constant).cast<double>();
      break;
    case FormKind::AggMean:
    case FormKind::AggPrev: {
      auto value = col(0);
      auto group = col(1);
      std::map<double, std::pair<double, double>> acc;  // label -> (sum, count)
      for (Eigen::Index r = 0; r < n; ++r) {
        double v = form.kind == FormKind::AggMean ? value(r) : double(value(r) >= form.constant);
        auto& slot = acc[group(r)];
        slot.first += v;
        slot.second += 1.0;
      }
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto& slot = acc[group(r)];
        out(r) = slot.first / slot.second;
      }
      break;
    }
  }
}

}  // namespace

std::string ResolvedParams::digest() const {
  std::string text = "G=" + std::to_string(groups);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    text += ";" + std::to_string(i) + ":" + fmt(mean[i]) + "," + fmt(sd[i]) + (group[i] ? "g" : "");
    for (const auto& [p, c] : coef[i]) text += "," + std::to_string(p) + "*" + fmt(c);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

ResolvedParams resolve_params(const Dag& dag, const SimParams& params) {
  const std::size_t n = dag.size();
  if (params.groups == 0) throw InvalidParams("groups must be positive");
  for (const auto* table : {&params.mean, &params.sd}) {
    for (const auto& [id, v] : *table) {
      if (dag.node(id).deterministic()) throw InvalidParams("'" + id + "' is deterministic; it has no noise");
    }
  }

  NodeMask positive(n, false);
  ResolvedParams out;
  out.groups = params.groups;
  out.group.assign(n, false);
  auto mark_positive = [&](const NodeId& id) {
    std::size_t i = dag.index_of(id);
    NodeMask base = base_component_mask(dag, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (base[j]) positive[j] = true;
    }
  };
  for (const auto& node : dag.nodes()) {
    if (!node.form) continue;
    const auto& f = *node.form;
    switch (f.kind) {
      case FormKind::Ratio: mark_positive(f.args.at(1)); break;
      case FormKind::Power: mark_positive(f.args.at(0)); break;
      case FormKind::Product:
        for (const auto& a : f.args) mark_positive(a);
        break;
      default: break;
    }
    if (const NodeId* g = f.group()) out.group[dag.index_of(*g)] = true;
  }

  out.mean.assign(n, 0.0);
  out.sd.assign(n, 0.0);
  out.coef.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const NodeDef& node = dag.node(i);
    if (node.deterministic()) continue;
    auto pick = [&](const std::map<NodeId, double>& table, const std::optional<double>& attr, double fallback) {
      if (auto it = table.find(node.id); it != table.end()) return it->second;
      return attr.value_or(fallback);
    };
    out.mean[i] = pick(params.mean, node.mean, positive[i] ? kPositiveMean : 0.0);
    out.sd[i] = pick(params.sd, node.sd, 1.0);
    if (!(out.sd[i] > 0.0) || !std::isfinite(out.sd[i]) || !std::isfinite(out.mean[i])) {
      throw InvalidParams("'" + node.id + "': sd must be positive and finite");
    }
  }
  for (const auto& e : dag.edges()) {
    if (e.kind == EdgeKind::Deterministic) continue;
    double c = e.coef.value_or(params.default_coef);
    if (auto it = params.coef.find({e.from, e.to}); it != params.coef.end()) c = it->second;
    out.coef[dag.index_of(e.to)][dag.index_of(e.from)] = c;
  }
  for (const auto& [edge, c] : params.coef) {
    std::size_t to = dag.index_of(edge.second);
    if (!out.coef[to].count(dag.index_of(edge.first))) {
      throw InvalidParams("no probabilistic arc " + edge.first + " -> " + edge.second);
    }
    if (!std::isfinite(c)) throw InvalidParams("coef must be finite");
  }
  return out;
}

std::size_t Dataset::column_index(std::string_view id) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == id) return i;
  }
  throw UnknownNode(std::string(id));
}

Eigen::MatrixXd Dataset::gather(const NodeSet& ids) const {
  Eigen::MatrixXd out(columns.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = column(ids[i]);
  return out;
}

Dataset simulate(const Dag& dag, const SimParams& params, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidParams("n must be at least 1");
  if (auto violations = validate(dag); !violations.empty()) {
    throw SimulationError("graph is not valid: " + violations.front().message);
  }
  ResolvedParams rp = resolve_params(dag, params);
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd cols(rows, static_cast<Eigen::Index>(dag.size()));

  for (std::size_t i : topological_order(dag)) {
    auto out = cols.col(static_cast<Eigen::Index>(i));
    if (rp.group[i]) {
      // Balanced labels 1..G in a seeded random order.
      NodeStream stream(seed, i);
      for (Eigen::Index r = 0; r < rows; ++r) out(r) = double(std::size_t(r) % rp.groups + 1);
      for (Eigen::Index r = rows - 1; r > 0; --r) {
        auto j = static_cast<Eigen::Index>(stream.below(std::uint64_t(r) + 1));
        std::swap(out(r), out(j));
      }
    } else if (!dag.node(i).deterministic()) {
      NodeStream stream(seed, i);
      for (Eigen::Index r = 0; r < rows; ++r) out(r) = rp.mean[i] + rp.sd[i] * stream.normal();
      for (const auto& [p, c] : rp.coef[i]) out += c * cols.col(static_cast<Eigen::Index>(p));
    } else {
      evaluate_form(dag, i, cols);
    }
  }

  Dataset ds;
  ds.n = n;
  for (const auto& node : dag.nodes()) ds.names.push_back(node.id);
  ds.columns = std::move(cols);
  ds.seed = seed;
  ds.provenance = dag.name() + "@" + rp.digest();
  return ds;
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t i = 0; i < ds.names.size(); ++i) out << (i ? "," : "") << ds.names[i];
  out << '\n';
  for (Eigen::Index r = 0; r < ds.columns.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.columns.cols(); ++c) out << (c ? "," : "") << fmt(ds.columns(r, c));
    out << '\n';
  }
}

double partial_correlation(const Dataset& ds, const NodeId& x, const NodeId& y, const NodeSet& given) {
  return stats::partial_correlation(ds.column(x), ds.column(y), ds.gather(given));
}

IndependenceVerdict independence_verdict(const Dataset& ds, const NodeId& x, const NodeId& y,
                                         const NodeSet& given, double alpha) {
  if (ds.n <= given.size() + 3) throw InvalidParams("too few samples for the Fisher z test");
  IndependenceVerdict v;
  v.r = partial_correlation(ds, x, y, given);
  v.z = stats::fisher_z(v.r, long(ds.n), long(given.size()));
  v.p_value = stats::two_sided_p(v.z);
  v.independent = v.p_value > alpha;
  return v;
}

VerificationReport verify_dseps(const Dag& dag, const SimParams& params, std::size_t n,
                                std::uint64_t seed, double alpha, std::size_t max_given) {
  Dataset ds = simulate(dag, params, n, seed);
  VerificationReport report;
  const std::size_t p = dag.size();
  auto nonlinear = [&](std::size_t i) {
    const auto& f = dag.node(i).form;
    return f && !f->linear();
  };

  for (std::size_t x = 0; x < p; ++x) {
    for (std::size_t y = x + 1; y < p; ++y) {
      std::vector<std::size_t> rest;
      for (std::size_t k = 0; k < p; ++k) {
        if (k != x && k != y) rest.push_back(k);
      }
      // Subsets of `rest` up to max_given, in increasing size then index order.
      std::vector<std::vector<std::size_t>> subsets{{}};
      for (std::size_t size = 1; size <= std::min(max_given, rest.size()); ++size) {
        std::vector<bool> pick(rest.size(), false);
        std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
        do {
          auto& s = subsets.emplace_back();
          for (std::size_t k = 0; k < rest.size(); ++k) {
            if (pick[k]) s.push_back(rest[k]);
          }
        } while (std::prev_permutation(pick.begin(), pick.end()));
      }
      for (const auto& z : subsets) {
        NodeSet given;
        bool touches_nonlinear = nonlinear(x) || nonlinear(y);
        for (std::size_t k : z) {
          given.push_back(dag.node(k).id);
          touches_nonlinear = touches_nonlinear || nonlinear(k);
        }
        TripleCheck check{dag.node(x).id, dag.node(y).id, given, false, {}};
        auto outcome = D_separation_outcome(dag, check.x, check.y, given);
        if (outcome == SeparationOutcome::Degenerate) {
          ++report.skipped_degenerate;
          continue;
        }
        check.separated = outcome == SeparationOutcome::Separated;
        try {
          check.verdict = independence_verdict(ds, check.x, check.y, given, alpha);
        } catch (const DegenerateColumn&) {
          ++report.skipped_numerical;
          continue;
        }
        if (touches_nonlinear) {
          ++report.nonlinear_checked;
          if (check.agrees()) ++report.nonlinear_agreeing;
          continue;
        }
        auto& cell = check.separated
                         ? (check.verdict.independent ? report.separated_independent : report.separated_dependent)
                         : (check.verdict.independent ? report.connected_independent : report.connected_dependent);
        ++cell;
        if (!check.agrees()) report.disagreements.push_back(std::move(check));
      }
    }
  }
  return report;
}

std::vector<std::pair<NodeId, double>> variance_decomposition(const Dag& dag, const SimParams& params,
                                                              const NodeId& composite, std::size_t n,
                                                              std::uint64_t seed) {
  std::size_t target = dag.index_of(composite);
  if (!dag.node(target).deterministic()) throw QueryError("'" + composite + "' is not deterministic");
  Dataset ds = simulate(dag, params, n, seed);
  const auto tcol = static_cast<Eigen::Index>(target);
  double total = stats::variance(ds.columns.col(tcol));
  if (!(total > 0.0)) throw DegenerateColumn("'" + composite + "' has no variance");

  NodeMask chain = definition_closure_mask(dag, target);
  chain[target] = true;
  std::vector<std::size_t> recompute;
  for (std::size_t i : topological_order(dag)) {
    if (chain[i] && dag.node(i).deterministic()) recompute.push_back(i);
  }

  std::vector<std::pair<NodeId, double>> shares;
  NodeMask base = base_component_mask(dag, target);
  for (std::size_t p = 0; p < dag.size(); ++p) {
    if (!base[p]) continue;
    Eigen::MatrixXd cols = ds.columns;
    const auto pc = static_cast<Eigen::Index>(p);
    cols.col(pc).setConstant(cols.col(pc).mean());
    for (std::size_t i : recompute) evaluate_form(dag, i, cols);
    double held = stats::variance(cols.col(tcol));
    shares.emplace_back(dag.node(p).id, std::clamp(1.0 - held / total, 0.0, 1.0));
  }
  return shares;
}

}  // namespace detdag
