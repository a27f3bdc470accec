#include "klemu/design.hpp"

#include <numeric>

#include "klemu/rng.hpp"

namespace klemu::design {

DesignOfExperiments lhs_sample(const ParameterSpace& space, Index m, std::uint64_t rng_seed) {
  space.validate();
  if (m < 1) throw DataError("lhs_sample: m must be >= 1");

  const Index d = space.dim();
  rng::SplitMix64 stream(rng_seed);

  DesignOfExperiments doe;
  doe.space = space;
  doe.points.resize(m, d);

  std::vector<Index> strata(static_cast<std::size_t>(m));
  for (Index j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), Index{0});
    rng::shuffle(strata, stream);
    const double width = (space.upper[j] - space.lower[j]) / static_cast<double>(m);
    for (Index i = 0; i < m; ++i) {
      const double offset = rng::unit_uniform(stream.next());  // in [0,1): stays inside the stratum
      doe.points(i, j) =
          space.lower[j] + (static_cast<double>(strata[static_cast<std::size_t>(i)]) + offset) * width;
    }
  }
  return doe;
}

std::vector<std::string> validate_design(const DesignOfExperiments& doe) {
  std::vector<std::string> violations;
  const Index m = doe.size();
  const Index d = doe.dim();

  if (d != doe.space.dim()) {
    violations.push_back("dimension mismatch between points and space");
    return violations;
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double v = doe.points(i, j);
      if (!(v >= doe.space.lower[j] && v <= doe.space.upper[j])) {
        violations.push_back("point " + std::to_string(i) + " outside bounds in dim " +
                             std::to_string(j));
      }
    }
  }
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      if (doe.points.row(a) == doe.points.row(b)) {
        violations.push_back("duplicate point at indices " + std::to_string(a) + "," +
                             std::to_string(b));
      }
    }
  }
  return violations;
}

}  // namespace klemu::design
