#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klemu/types.hpp"

namespace klemu::design {

/// Latin hypercube sample of m points: along every axis the m points occupy
/// the m equal-width strata exactly once. Stratum permutations and
/// within-stratum offsets both come from the deterministic stream seeded by
/// rng_seed, so identical arguments give bit-identical designs.
DesignOfExperiments lhs_sample(const ParameterSpace& space, Index m, std::uint64_t rng_seed);

/// Diagnostic: returns one human-readable message per violated design
/// invariant (points inside bounds, no duplicate points); empty means valid.
std::vector<std::string> validate_design(const DesignOfExperiments& doe);

}  // namespace klemu::design
