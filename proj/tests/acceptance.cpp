// Runs acceptance criteria 1..11 and prints one PASS/FAIL line per criterion.
// Usage: acceptance [id ...]; details of failed checks go to stderr.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "phylonet/verify.hpp"

int main(int argc, char** argv) {
  using namespace phylonet;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= verify::kCriteria; ++i) ids.push_back(i);

  McConfig mc;
  mc.seed = 20260101;
  bool all = true;
  for (int id : ids) {
    verify::Criterion c;
    try {
      c = verify::run_criterion(id, mc);
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %2d: exception: %s\n", id, e.what());
      all = false;
      continue;
    }
    std::printf("%s criterion %2d: %s (%zu checks, %.1f s)\n", c.passed() ? "PASS" : "FAIL", id,
                c.title.c_str(), c.checks.size(), c.seconds);
    for (const auto& ch : c.checks)
      (ch.passed ? std::cout : std::cerr) << "    " << (ch.passed ? "ok   " : "FAIL ") << ch.name
                                          << ": " << ch.summary << '\n';
    std::fflush(stdout);
    all = all && c.passed();
  }
  return all ? 0 : 1;
}
