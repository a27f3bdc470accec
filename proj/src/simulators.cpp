#include "klemu/simulators.hpp"

#include <cmath>
#include <numbers>

#include "klemu/parallel.hpp"
#include "klemu/rng.hpp"

namespace klemu::simulators {

std::array<double, 3> ToyProcess3D::omegas(std::uint64_t seed) {
  rng::SplitMix64 g(seed);
  // Draw order is part of the format: changing it changes every trajectory.
  const double w1 = rng::standard_normal_quantile(rng::unit_uniform_open(g.next()));
  const double w2 = 1.0 + rng::unit_uniform(g.next());
  const double w3 = rng::unit_uniform(g.next());
  return {w1, w2, w3};
}

double ToyProcess3D::formula(const Eigen::Ref<const Eigen::VectorXd>& x, double w1, double w2,
                             double w3) {
  return 100.0 * w1 * (0.1 * std::exp(x[0] * w2) + x[1] * x[2] * w3);
}

double ToyProcess3D::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                              std::uint64_t seed) const {
  if (!space_.contains(x)) throw DataError("toy3d: input outside [0,2]^3");
  const auto w = omegas(seed);
  return formula(x, w[0], w[1], w[2]);
}

double uniform12_mgf(double t) {
  // (e^{2t} - e^t)/t = e^t * expm1(t)/t; series for tiny t where the
  // quotient loses all significant digits: 1 + (3/2)t + (7/6)t^2 + O(t^3).
  if (std::abs(t) < 1e-8) return 1.0 + t * (1.5 + t * (7.0 / 6.0));
  return std::exp(t) * std::expm1(t) / t;
}

double toy_covariance_oracle(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y) {
  static const ParameterSpace domain = ParameterSpace::cube(0.0, 2.0, 3);
  if (!domain.contains(x) || !domain.contains(y)) {
    throw DataError("toy_covariance_oracle: inputs outside [0,2]^3");
  }
  const double xa = x[1] * x[2];
  const double ya = y[1] * y[2];
  return 1e4 * (0.01 * uniform12_mgf(x[0] + y[0]) +
                0.05 * (xa * uniform12_mgf(y[0]) + ya * uniform12_mgf(x[0])) +
                xa * ya / 3.0);
}

double SineGaussianProcess::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     std::uint64_t seed) const {
  if (!space_.contains(x)) throw DataError("sine_gaussian_1d: input outside [0,2]");
  rng::SplitMix64 g(seed);
  double h = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double gk = rng::standard_normal_quantile(rng::unit_uniform_open(g.next()));
    h += gk / k * std::sin(k * std::numbers::pi * x[0] / 2.0);
  }
  return h;
}

double SineGaussianProcess::covariance(double x, double y) {
  double c = 0.0;
  for (int k = 1; k <= 3; ++k) {
    c += std::sin(k * std::numbers::pi * x / 2.0) * std::sin(k * std::numbers::pi * y / 2.0) /
         (k * k);
  }
  return c;
}

std::unique_ptr<StochasticSimulator> make_simulator(const std::string& id) {
  if (id == "toy3d") return std::make_unique<ToyProcess3D>();
  if (id == "sine_gaussian_1d") return std::make_unique<SineGaussianProcess>();
  throw UsageError("unknown simulator id: " + id);
}

TrajectoryMatrix sample_trajectories(const StochasticSimulator& sim,
                                     const DesignOfExperiments& doe, const SeedRegistry& seeds,
                                     int threads) {
  seeds.validate();
  const Index m = doe.size();
  const Index n = seeds.size();
  if (m < 1 || n < 1) throw DataError("sample_trajectories: empty design or seed registry");

  TrajectoryMatrix out;
  out.coords = doe.points;
  out.seeds = seeds.seeds;
  out.simulator_id = sim.id();
  out.values.resize(m, n);

  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t row) {
    const auto j = static_cast<Index>(row);
    const Eigen::VectorXd x = doe.points.row(j);
    for (Index k = 0; k < n; ++k) {
      try {
        out.values(j, k) = sim.evaluate(x, seeds.seeds[static_cast<std::size_t>(k)]);
      } catch (const std::exception& e) {
        throw DataError("sample_trajectories at point " + std::to_string(j) + ", seed index " +
                        std::to_string(k) + ": " + e.what());
      }
    }
  });
  return out;
}

}  // namespace klemu::simulators
