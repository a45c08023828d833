#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detdag/graph.hpp"

namespace detdag {

struct ParseError {
  enum class Kind { Syntax, Semantic };

  Kind kind = Kind::Syntax;
  int line = 1;  // 1-based
  int column = 1;
  std::string message;
  std::string snippet;  // the offending source line

  std::string format(std::string_view source_name = {}) const;
};

struct ParseResult {
  std::optional<Dag> dag;
  std::vector<ParseError> errors;

  bool ok() const noexcept { return dag.has_value(); }
};

class ParseFailure : public std::runtime_error {
 public:
  ParseFailure(std::string what, std::vector<ParseError> errors)
      : std::runtime_error(std::move(what)), errors_(std::move(errors)) {}
  const std::vector<ParseError>& errors() const noexcept { return errors_; }

 private:
  std::vector<ParseError> errors_;
};

/// Parses the `.dag` description language.
///
///   dag "name" {
///     node B [label="Birthweight", mean=3500, sd=500]
///     M := threshold(B, 4000) [label="Macrosomia"]
///     B -> Y [coef=0.4]
///   }
///
/// Identifiers may be referenced before they are declared. On success the
/// returned graph passes validate(); otherwise every error carries a position.
ParseResult parse(std::string_view source);

// parse() that throws ParseFailure.
Dag parse_or_throw(std::string_view source);

// Reads and parses a file. Throws std::runtime_error when unreadable.
Dag load_dag_file(const std::filesystem::path& path);

/// Canonical text: nodes in declaration order, then probabilistic arcs, one
/// statement per line. parse(serialize(d)) == d for every valid d.
std::string serialize(const Dag& dag);

// Shortest round-tripping decimal without exponent.
std::string format_number(double value);

}  // namespace detdag
