#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vxs {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string details;
};

/// Runs one acceptance criterion (1..9).  `seed` feeds the randomized
/// criteria (property suite, synthetic restoration image).
CriterionResult run_criterion(int id, unsigned seed);

/// Runs all criteria in order; when `progress` is non-null a PASS/FAIL line
/// per criterion is streamed as results arrive.
std::vector<CriterionResult> run_acceptance(unsigned seed,
                                            std::ostream* progress = nullptr);

std::string format_criterion_line(const CriterionResult& r);

}  // namespace vxs
