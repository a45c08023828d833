#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "detdag/classify.hpp"
#include "detdag/dsl.hpp"
#include "detdag/json_io.hpp"
#include "detdag/reduce.hpp"
#include "detdag/render.hpp"
#include "detdag/service.hpp"

using namespace detdag;

namespace {

enum Exit { kOk = 0, kConnected = 1, kDegenerate = 2, kInput = 3, kUnknown = 4 };

std::uint64_t default_seed() {
  if (const char* env = std::getenv("DETDAG_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed DETDAG_SEED\n";
    }
  }
  return 42;
}

Dag load(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + file + "'");
  std::string source((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ParseResult r = parse(source);
  if (!r.ok()) {
    for (const auto& e : r.errors) std::cerr << e.format(file) << "\n";
    throw ParseFailure("parse failed", r.errors);
  }
  return std::move(*r.dag);
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal DAGs with deterministic variables"};
  app.require_subcommand(1);
  std::string file;
  std::string x, y, exposure, outcome, candidate, out_path, host = "127.0.0.1";
  NodeSet given, keep, adjust, highlight;
  bool classic = false;
  std::size_t n = 50000;
  std::uint64_t seed = default_seed();
  double alpha = 0.01;
  int port = 8080;

  auto* check = app.add_subcommand("check", "Validate a .dag file");
  auto* dsep = app.add_subcommand("dsep", "Separation query; exit 0 separated, 1 connected, 2 degenerate");
  auto* reduce = app.add_subcommand("reduce", "Remove deterministic nodes outside --keep");
  auto* classify = app.add_subcommand("classify", "What an exposure-outcome analysis estimates (JSON)");
  auto* tautologies = app.add_subcommand("tautologies", "Pairs with self-fulfilling associations (JSON)");
  auto* confounder = app.add_subcommand("confounder", "Role of a candidate confounder (JSON)");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the graph and write CSV");
  auto* verify = app.add_subcommand("verify", "Compare D-separation with simulated data; exit 0 iff all agree");
  auto* render = app.add_subcommand("render", "Graphviz DOT to stdout");
  auto* serve_cmd = app.add_subcommand("serve", "JSON service on /api/*");

  for (auto* sub : {check, dsep, reduce, classify, tautologies, confounder, simulate_cmd, verify, render}) {
    sub->add_option("file", file, ".dag source")->required();
  }
  dsep->add_option("--x", x)->required();
  dsep->add_option("--y", y)->required();
  dsep->add_option("--given", given)->delimiter(',');
  dsep->add_flag("--classic", classic, "plain d-separation, ignoring determinism");
  reduce->add_option("--keep", keep)->delimiter(',');
  for (auto* sub : {classify, confounder}) {
    sub->add_option("--exposure", exposure)->required();
    sub->add_option("--outcome", outcome)->required();
  }
  classify->add_option("--adjust", adjust)->delimiter(',');
  confounder->add_option("--candidate", candidate)->required();
  for (auto* sub : {simulate_cmd, verify}) {
    sub->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "defaults to $DETDAG_SEED, else 42");
  }
  simulate_cmd->add_option("--out", out_path, "CSV path (default stdout)");
  verify->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  render->add_option("--highlight", highlight)->delimiter(',');
  serve_cmd->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--seed", seed, "default seed for /api/simulate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      std::cerr << "listening on " << host << ":" << port << "\n";
      return serve(host, port, seed) ? kOk : kInput;
    }
    Dag dag = load(file);
    if (*check) {
      auto violations = validate(dag);
      std::cout << dag.name() << ": " << dag.size() << " nodes, " << dag.edges().size() << " edges, "
                << (violations.empty() ? "valid" : "invalid") << "\n";
      for (const auto& v : violations) std::cout << violation_name(v.code) << ": " << v.message << "\n";
      return violations.empty() ? kOk : 1;
    }
    if (*dsep) {
      try {
        auto verdict = separation(dag, x, y, given, classic ? Criterion::Classic : Criterion::Deterministic);
        if (verdict.separated) {
          std::cout << "separated\n";
          return kOk;
        }
        std::cout << "connected\n" << verdict.witness->to_string() << "\n";
        return kConnected;
      } catch (const DegenerateQuery& e) {
        std::cout << "degenerate\n";
        std::cerr << e.what() << "\n";
        return kDegenerate;
      }
    }
    if (*reduce) {
      std::cout << serialize(reduce_all(dag, keep));
      return kOk;
    }
    if (*classify) {
      try {
        print(to_json(classify_estimand(dag, exposure, outcome, adjust)));
      } catch (const DegenerateQuery& e) {
        std::cerr << e.what() << "\n";
        return kDegenerate;
      }
      return kOk;
    }
    if (*tautologies) {
      print(to_json(detect_tautologies(dag)));
      return kOk;
    }
    if (*confounder) {
      print(to_json(classify_confounder(dag, exposure, outcome, candidate)));
      return kOk;
    }
    if (*simulate_cmd) {
      Dataset ds = simulate(dag, {}, n, seed);
      if (out_path.empty()) {
        write_csv(std::cout, ds);
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        write_csv(out, ds);
      }
      return kOk;
    }
    if (*verify) {
      auto report = verify_dseps(dag, {}, n, seed, alpha);
      json j = to_json(report);
      j["n"] = n;
      j["seed"] = seed;
      j["alpha"] = alpha;
      print(j);
      return report.full_agreement() ? kOk : 1;
    }
    if (*render) {
      std::cout << to_dot(dag, highlight);
      return kOk;
    }
  } catch (const ParseFailure&) {
    return kInput;
  } catch (const UnknownNode& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnknown;
  } catch (const QueryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnknown;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
