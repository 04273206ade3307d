// Acceptance gate: runs the numbered criteria and prints one pass/fail line
// each.  Usage: acceptance [smoke|full] [id...]
#include "degenlab/acceptance.hpp"

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  using namespace degen;
  SuiteProfile profile = SuiteProfile::Full;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "smoke") == 0)
      profile = SuiteProfile::Smoke;
    else if (std::strcmp(argv[i], "full") == 0)
      profile = SuiteProfile::Full;
    else
      ids.push_back(std::atoi(argv[i]));
  }
  if (ids.empty())
    for (int id = 1; id <= 13; ++id) ids.push_back(id);

  int failures = 0;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, profile);
    std::printf("%s\n", format_line(r).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
