#pragma once

#include <cstdint>
#include <vector>

#include "klemu/emulator.hpp"
#include "klemu/metrics.hpp"
#include "klemu/simulators.hpp"
#include "klemu/types.hpp"

namespace klemu::validation {

/// Configuration of one repeated k-fold cross-validation experiment.
struct ValidationPlan {
  int k = 10;
  int repetitions = 100;
  emulator::Pathway pathway = emulator::Pathway::eigvec_interp;
  // Eigenvector/mean surrogate for eigvec_interp; mean surrogate for
  // cov_surrogate (whose fluctuation part comes from the expansion).
  surrogates::SurrogateKind surrogate = surrogates::SurrogateKind::kriging;
  surrogates::KernelFamily kernel = surrogates::KernelFamily::matern52;
  int pce_degree = 3;
  double truncation_energy = 1.0;
  int bins = 20;
  double alpha = 0.05;
};

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // population convention (divide by count)
};

struct ValidationSummary {
  MetricStat hist_intersection, hellinger, js_divergence, ks_statistic;
  double ks_rejection_rate = 0.0;
  std::size_t reports = 0;
};

/// Summary plus the raw per-held-out-point rows it was aggregated from, in
/// deterministic (repetition, fold, point) order.
struct ValidationResult {
  ValidationSummary summary;
  Eigen::MatrixXd points;  // one row per report: held-out coordinates
  std::vector<metrics::MetricReport> rows;
  std::vector<int> repetition;  // repetition index per row
};

ValidationSummary summarize(const std::vector<metrics::MetricReport>& rows);

/// Repeated k-fold cross-validation: per repetition, shuffle the design
/// points with the seeded stream and split into k folds (sizes within one of
/// each other, larger folds first); fit on each complement and score the
/// predicted ensembles against the held-out trajectory rows, which act as
/// the paired reference (same seeds). Identical (data, plan, rng_seed) give
/// identical results regardless of thread count.
ValidationResult k_fold_validate(const TrajectoryMatrix& data, const ValidationPlan& plan,
                                 std::uint64_t rng_seed, int threads = 1);

/// Score a fitted emulator at arbitrary test points against freshly
/// simulated reference ensembles. Passing the training registry compares
/// under common random numbers (paired trajectories); passing a different
/// registry gives an out-of-trajectory comparison.
std::vector<metrics::MetricReport> test_point_evaluate(const emulator::KLEmulator& emu,
                                                       const simulators::StochasticSimulator& sim,
                                                       const Eigen::MatrixXd& test_points,
                                                       const SeedRegistry& seeds, int bins,
                                                       double alpha, int threads = 1);

}  // namespace klemu::validation
