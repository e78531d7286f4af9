#ifndef CORBFUZZ_SOLVER_H_
#define CORBFUZZ_SOLVER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corbfuzz/formula.h"
#include "corbfuzz/rng.h"
#include "corbfuzz/value.h"

namespace corbfuzz {

inline constexpr size_t kMaxSynthStringLength = 32;

struct SolverVariable {
  std::string name;
  ValueType type = ValueType::kInt;
};

struct SolveOptions {
  std::uint64_t seed = 0;
  // Upper bound on assignments tried before giving up (reported as UNSAT).
  size_t node_budget = 200000;
  // Random draws per variable, tried before the structural candidates.
  size_t random_candidates = 6;
};

// Returns true for a complete model that must not be produced (used to
// exclude previously emitted results).
using RejectFn = std::function<bool(const Assignment&)>;

// Bounded model finder over the atom language of Formula. Each variable
// receives a finite candidate list built from (a) seeded random values inside
// the variable's top-level unit domain (integer interval, string bounds,
// allowed booleans), (b) the literals it is compared against and their
// neighbours, and (c) values of already-assigned variables it is related to.
// Depth-first search with three-valued pruning picks the first model that
// satisfies |formula| and is not rejected.
//
// Variables of |formula| must appear in |variables| or |fixed|; throws
// std::invalid_argument otherwise. Atoms comparing different types are
// false, so a type mismatch surfaces as UNSAT (nullopt).
std::optional<Assignment> Solve(const Formula& formula,
                                const std::vector<SolverVariable>& variables,
                                const Assignment& fixed,
                                const SolveOptions& options,
                                const RejectFn& reject = {});

bool IsSatisfiable(const Formula& formula,
                   const std::vector<SolverVariable>& variables);

// Random string over printable ASCII plus 0x00-0x1f, length <= 12.
std::string RandomSynthString(Rng& rng);

}  // namespace corbfuzz

#endif  // CORBFUZZ_SOLVER_H_
