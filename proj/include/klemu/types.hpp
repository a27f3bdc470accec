#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "klemu/errors.hpp"

namespace klemu {

using Eigen::Index;

/// Axis-aligned box domain: d pairs of (lower, upper) bounds.
struct ParameterSpace {
  Eigen::ArrayXd lower;
  Eigen::ArrayXd upper;

  Index dim() const { return lower.size(); }

  /// Hypercube [lo, hi]^d.
  static ParameterSpace cube(double lo, double hi, Index d) {
    ParameterSpace s;
    s.lower = Eigen::ArrayXd::Constant(d, lo);
    s.upper = Eigen::ArrayXd::Constant(d, hi);
    s.validate();
    return s;
  }

  void validate() const {
    if (lower.size() < 1 || lower.size() != upper.size()) {
      throw DataError("ParameterSpace: need d >= 1 matching bound pairs");
    }
    for (Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw DataError("ParameterSpace: lower >= upper in dim " + std::to_string(i));
      }
    }
  }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) return false;
    return (x.array() >= lower).all() && (x.array() <= upper).all();
  }
};

/// A set of M input points (rows) inside a parameter space.
struct DesignOfExperiments {
  Eigen::MatrixXd points;  // M x d, one row per point
  ParameterSpace space;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

/// Ordered list of distinct seeds; position k is the canonical index of
/// trajectory k. Freezing this list is what makes trajectories comparable
/// across design points (common random numbers).
struct SeedRegistry {
  std::vector<std::uint64_t> seeds;

  Index size() const { return static_cast<Index>(seeds.size()); }

  static SeedRegistry consecutive(std::uint64_t first, Index n) {
    SeedRegistry r;
    r.seeds.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) r.seeds[static_cast<std::size_t>(k)] = first + std::uint64_t(k);
    return r;
  }

  void validate() const {
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError("SeedRegistry: duplicate seed entries");
    }
  }
};

/// M x N table of simulator outputs: rows follow the design points, columns
/// follow the seed registry, so column k is one frozen trajectory sampled at
/// all M points.
struct TrajectoryMatrix {
  Eigen::MatrixXd values;           // M x N
  Eigen::MatrixXd coords;           // M x d design coordinates
  std::vector<std::uint64_t> seeds; // N trajectory seeds
  std::string simulator_id;

  Index points() const { return values.rows(); }
  Index replications() const { return values.cols(); }

  void validate() const {
    if (values.rows() < 2 || values.cols() < 2) {
      throw DataError("TrajectoryMatrix: need M >= 2 and N >= 2");
    }
    if (coords.rows() != values.rows()) {
      throw DataError("TrajectoryMatrix: coords/values row mismatch");
    }
    if (static_cast<Index>(seeds.size()) != values.cols()) {
      throw DataError("TrajectoryMatrix: seed list length must equal column count");
    }
    if (!values.allFinite()) throw DataError("TrajectoryMatrix: non-finite values");
  }
};

}  // namespace klemu
