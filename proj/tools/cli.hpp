#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hsipnp::cli {

/// Runs the hsipnp command line. Returns the process exit code; failures are
/// reported on `err` as a one-line JSON object {"error": code, "message": text}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hsipnp::cli
