// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all of them)

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "betaexp/selftest.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= betaexp::selftest::kCriteria; ++i) ids.push_back(i);
  int failed = 0;
  for (int id : ids) {
    const auto r = betaexp::selftest::run(id);
    std::cout << betaexp::selftest::format_line(r) << std::endl;
    failed += !r.passed;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
