#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "phylonet/model.hpp"

namespace phylonet::cli {

inline constexpr const char* kToolName = "phylonet";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

/// Everything that determines a run's output. The worker count is kept out
/// of the emitted header since it does not change the output.
struct RunConfig {
  ModelParams params{1.0, 1.0, 1.0};
  std::uint64_t seed = 42;
  std::size_t samples = 100000;
  std::size_t n = 500;
  double tol = 1e-12;
  std::string format = "json";
  std::string out;
  unsigned workers = 0;
  std::string method = "tilted";
};

/// Runs one command line (without the program name). Output goes to `out`
/// unless --out is given; log lines and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phylonet::cli
