#pragma once

#include "mcem/core.hpp"

#include <string>
#include <vector>

namespace mcem::oracle {

struct Check {
  std::string name;
  bool pass = true;
  std::string diagnostic;  // empty when there is nothing to add
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool pass() const;
};

/// Exhaustive IGM on `instances` random monotonic mixers, k in {2,3}, |U| in {3,4,5}.
SuiteResult igm_suite(int instances = 1000, std::uint64_t seed = 1);

/// Central-difference dq_tot/dQ^a >= -1e-8 on `probes` random (mixer, Q, state) probes.
SuiteResult monotonicity_suite(int probes = 10000, std::uint64_t seed = 1);

/// Every trainable gradient path against central differences, `probes` seeds per path,
/// relative error below 1e-4.
SuiteResult gradient_suite(int probes = 100, std::uint64_t seed = 1);

/// Q <- R Q with pi = beta and lambda = 1 on `mdps` random 5-state MDPs converges to the
/// dynamic-programming Q^pi (sup-norm 1e-6, at most 1000 sweeps) for retrace and tree backup.
SuiteResult retrace_suite(int mdps = 20, std::uint64_t seed = 1);

/// Retrace / tree-backup coefficient laws on `samples` random (log pi, log beta, lambda).
SuiteResult coefficient_suite(int samples = 100000, std::uint64_t seed = 1);

/// Exact expected payoff of MCEM vs. centralized-gradient tabular policies on the penalty
/// game; passes when MCEM is at least as good in `required` of `seeds` seeds.
SuiteResult theorem51_suite(int seeds = 20, int required = 18);

/// Elite selection vs. the quantile oracle on `instances` random lists, plus the elite counts
/// of the default settings.
SuiteResult quantile_suite(int instances = 10000, std::uint64_t seed = 1);

/// Closed-form Gaussian entropy vs. a `samples`-sample Monte-Carlo estimate, tolerance 1e-2.
SuiteResult entropy_suite(int samples = 1000000, std::uint64_t seed = 1);

}  // namespace mcem::oracle
