#pragma once

#include "json.hpp"

#include "detdag/classify.hpp"
#include "detdag/dsep.hpp"
#include "detdag/dsl.hpp"
#include "detdag/graph.hpp"
#include "detdag/oracle.hpp"

// JSON views of the library types. Field names are lower_snake_case.
namespace detdag {

using json = nlohmann::ordered_json;

json to_json(const Dag& dag);
json to_json(const ParseError& error);
json to_json(const Violation& violation);
json to_json(const Path& path);
json to_json(const SeparationVerdict& verdict);
json to_json(const Warning& warning);
json to_json(const EstimandReport& report);
json to_json(const ConfounderRole& role);
json to_json(const TautologyFinding& finding);
json to_json(const VerificationReport& report);

template <typename T>
json to_json(const std::vector<T>& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

}  // namespace detdag
