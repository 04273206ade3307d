#pragma once
// End-to-end acceptance checks: one numbered criterion per structural claim of
// the method (operator exactness, A2 oracle agreement, corona packing,
// quadratic-estimate constants and stability, functional-calculus algebra,
// Kato equivalence, Rellich identities, BVP oracle match, non-tangential
// equivalence, principal-part approximation, stopping-time geometry, and
// perturbation continuity of the trace maps).

#include <string>
#include <vector>

namespace degen {

enum class SuiteProfile { Smoke, Full };

struct CriterionResult {
  int id = 0;
  std::string name;
  double value = 0.0;  // headline measured quantity
  double bound = 0.0;  // threshold it is compared against
  bool pass = false;
  double elapsed_s = 0.0;
  std::string detail;  // free-form supporting numbers
};

// Run one criterion (ids 1..13). Smoke caps grid sizes at 128 and shrinks
// ensembles; Full runs the certified sizes. All tolerances are pinned here.
CriterionResult run_criterion(int id, SuiteProfile profile);

std::vector<CriterionResult> run_all(SuiteProfile profile);

// CSV rows {id, value, bound, pass}
std::string suite_csv(const std::vector<CriterionResult>& results);

// one human-readable line per criterion
std::string format_line(const CriterionResult& r);

}  // namespace degen
