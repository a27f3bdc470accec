#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "klemu/types.hpp"

namespace klemu::simulators {

/// A stochastic simulator evaluated under frozen randomness: the seed fully
/// determines the internal random state, so evaluate(x, s) is a deterministic
/// function of (x, s), and the same s denotes the same underlying draw at
/// every x (common random numbers).
class StochasticSimulator {
 public:
  virtual ~StochasticSimulator() = default;

  virtual double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t seed) const = 0;
  virtual const ParameterSpace& input_space() const = 0;
  virtual std::string id() const = 0;
};

/// Three-parameter analytical test process on [0,2]^3:
///   H(x, w) = 100 * w1 * ( exp(x1*w2)/10 + x2*x3*w3 )
/// with w1 ~ N(0,1), w2 ~ U[1,2], w3 ~ U[0,1] derived from the seed alone.
/// Zero mean in w, closed-form covariance (see toy_covariance_oracle), and
/// cheap enough for large Monte Carlo reference ensembles.
class ToyProcess3D final : public StochasticSimulator {
 public:
  ToyProcess3D() : space_(ParameterSpace::cube(0.0, 2.0, 3)) {}

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t seed) const override;
  const ParameterSpace& input_space() const override { return space_; }
  std::string id() const override { return "toy3d"; }

  /// The seed -> (w1, w2, w3) mapping, exposed for tests. Bit-level stable:
  /// one SplitMix64 stream per seed, three draws in fixed order, w1 via the
  /// inverse normal CDF (single-draw, no rejection or branching on the
  /// stream), w2 = 1 + u, w3 = u.
  static std::array<double, 3> omegas(std::uint64_t seed);

  /// The closed form with the random draws supplied explicitly.
  static double formula(const Eigen::Ref<const Eigen::VectorXd>& x, double w1, double w2,
                        double w3);

 private:
  ParameterSpace space_;
};

/// Moment generating function of U[1,2]: E[exp(t*U)] = (e^{2t} - e^t)/t,
/// with the analytic limit 1 at t = 0 (series used near 0 to avoid
/// cancellation). Building block of the closed-form covariance below.
double uniform12_mgf(double t);

/// Analytic covariance C(x,y) = E[H(x,.)H(y,.)] of ToyProcess3D:
///   10^4 * [ 0.01*Mgf(x1+y1) + 0.05*(x2*x3*Mgf(y1) + y2*y3*Mgf(x1))
///            + (1/3)*x2*x3*y2*y3 ]
/// where Mgf = uniform12_mgf. Derived by expanding E[H(x)H(y)] over the
/// independent draws (E[w1^2] = 1, E[w3] = 1/2, E[w3^2] = 1/3) and verified
/// against Monte Carlo averages in the test suite.
double toy_covariance_oracle(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y);

/// Exactly Gaussian 1-D test process on [0,2]: three fixed sine modes with
/// independent standard-normal coefficients per seed,
///   H(x, w) = sum_{k=1..3} (1/k) * g_k * sin(k*pi*x/2).
/// Useful wherever a truly Gaussian instance is needed (e.g. checking the
/// Gaussian variance formula against an exact covariance).
class SineGaussianProcess final : public StochasticSimulator {
 public:
  SineGaussianProcess() : space_(ParameterSpace::cube(0.0, 2.0, 1)) {}

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t seed) const override;
  const ParameterSpace& input_space() const override { return space_; }
  std::string id() const override { return "sine_gaussian_1d"; }

  /// Exact covariance: sum_k (1/k^2) sin(k*pi*x/2) sin(k*pi*y/2).
  static double covariance(double x, double y);

 private:
  ParameterSpace space_;
};

/// Factory for the built-in simulators by id ("toy3d", "sine_gaussian_1d").
std::unique_ptr<StochasticSimulator> make_simulator(const std::string& id);

/// Evaluate the simulator at every (design point, registry seed) pair.
/// Entry (j, k) = evaluate(x^(j), seed_k); rows may be computed in parallel,
/// the result is identical regardless of scheduling.
TrajectoryMatrix sample_trajectories(const StochasticSimulator& sim,
                                     const DesignOfExperiments& doe, const SeedRegistry& seeds,
                                     int threads = 1);

}  // namespace klemu::simulators
