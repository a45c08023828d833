#pragma once

#include <cstdint>
#include <string>

#include "detdag/json_io.hpp"

namespace detdag {

inline constexpr std::size_t kMaxRequestBytes = 256 * 1024;
inline constexpr std::size_t kMaxSimulateRows = 100000;

struct ApiResponse {
  int status = 200;
  json body;  // {ok, result} or {ok, errors}
};

/// One stateless request. `path` is e.g. "/api/dsep", `body` the raw JSON text.
/// `default_seed` is used by /api/simulate when the request carries none.
ApiResponse handle_request(std::string_view method, std::string_view path, std::string_view body,
                           std::uint64_t default_seed = 1);

// Blocks serving /api/* until the process is interrupted. Returns false if the
// socket could not be bound.
bool serve(const std::string& host, int port, std::uint64_t default_seed = 1);

}  // namespace detdag
