#pragma once

#include <string>

#include "detdag/dsl.hpp"

namespace detdag::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(DETDAG_FIXTURE_DIR) + "/" + name + ".dag";
}

inline Dag fixture(const std::string& name) { return load_dag_file(fixture_path(name)); }

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig2c",
                                                 "fig3",  "fig4a", "fig5b", "fig5c", "fig5d"};
  return names;
}

}  // namespace detdag::testing
