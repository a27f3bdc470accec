#include "klemu/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "klemu/parallel.hpp"
#include "klemu/rng.hpp"

namespace klemu::validation {

namespace {

double population_stddev(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (const double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

MetricStat stat_of(const std::vector<double>& v) {
  MetricStat s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.stddev = population_stddev(v, s.mean);
  return s;
}

/// Minimum training-set size the configured emulator can be fitted on.
Index min_training_size(const ValidationPlan& plan, Index dims) {
  if (plan.pathway == emulator::Pathway::eigvec_interp) {
    return plan.surrogate == surrogates::SurrogateKind::kriging ? 3 : dims + 1;
  }
  // Covariance expansion: M^2 pairs must at least determine the
  // coefficients of the doubled-input basis.
  const Index terms =
      surrogates::total_degree_multi_indices(static_cast<int>(2 * dims), plan.pce_degree).rows();
  Index m = 3;
  while (m * m < terms) ++m;
  return m;
}

emulator::KLEmulator fit_for_plan(const TrajectoryMatrix& training, const ValidationPlan& plan,
                                  const Eigen::MatrixXd& heldout_coords) {
  if (plan.pathway == emulator::Pathway::eigvec_interp) {
    emulator::PathwayAOptions options;
    options.surrogate = plan.surrogate;
    options.kernel = plan.kernel;
    options.truncation_energy = plan.truncation_energy;
    return emulator::fit_pathway_a(training, options);
  }
  Eigen::MatrixXd targets(training.coords.rows() + heldout_coords.rows(),
                          training.coords.cols());
  targets << training.coords, heldout_coords;
  emulator::PathwayBOptions options;
  options.pce_degree = plan.pce_degree;
  options.mean_surrogate = plan.surrogate;
  options.kernel = plan.kernel;
  return emulator::fit_pathway_b(training, targets, options);
}

}  // namespace

ValidationSummary summarize(const std::vector<metrics::MetricReport>& rows) {
  ValidationSummary s;
  s.reports = rows.size();
  std::vector<double> hi, he, js, ks;
  hi.reserve(rows.size());
  he.reserve(rows.size());
  js.reserve(rows.size());
  ks.reserve(rows.size());
  std::size_t rejections = 0;
  for (const auto& r : rows) {
    hi.push_back(r.hist_intersection);
    he.push_back(r.hellinger);
    js.push_back(r.js_divergence);
    ks.push_back(r.ks_statistic);
    rejections += r.ks_reject ? 1 : 0;
  }
  s.hist_intersection = stat_of(hi);
  s.hellinger = stat_of(he);
  s.js_divergence = stat_of(js);
  s.ks_statistic = stat_of(ks);
  s.ks_rejection_rate =
      rows.empty() ? 0.0 : static_cast<double>(rejections) / static_cast<double>(rows.size());
  return s;
}

ValidationResult k_fold_validate(const TrajectoryMatrix& data, const ValidationPlan& plan,
                                 std::uint64_t rng_seed, int threads) {
  data.validate();
  const Index m = data.points();
  const Index d = data.coords.cols();

  if (plan.k < 2) throw DataError("k_fold_validate: k must be >= 2");
  if (plan.k > m) throw DataError("k_fold_validate: k exceeds the number of design points");
  if (plan.repetitions < 1) throw DataError("k_fold_validate: repetitions must be >= 1");

  const Index max_fold = m / plan.k + (m % plan.k != 0 ? 1 : 0);
  const Index min_training = min_training_size(plan, d);
  if (m - max_fold < min_training) {
    throw DataError("k_fold_validate: training folds of " + std::to_string(m - max_fold) +
                    " points are below the minimum of " + std::to_string(min_training) +
                    " for the configured emulator");
  }

  // One independent, pre-drawn shuffle seed per repetition keeps results
  // identical whatever the parallel schedule.
  rng::SplitMix64 root(rng_seed);
  std::vector<std::uint64_t> rep_seeds(static_cast<std::size_t>(plan.repetitions));
  for (auto& s : rep_seeds) s = root.next();

  struct RepRows {
    std::vector<Eigen::VectorXd> points;
    std::vector<metrics::MetricReport> rows;
  };
  std::vector<RepRows> per_rep(static_cast<std::size_t>(plan.repetitions));

  parallel_for(static_cast<std::size_t>(plan.repetitions), threads, [&](std::size_t rep) {
    rng::SplitMix64 stream(rep_seeds[rep]);
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    rng::shuffle(order, stream);

    RepRows& out = per_rep[rep];
    std::size_t offset = 0;
    for (int fold = 0; fold < plan.k; ++fold) {
      const std::size_t fold_size =
          static_cast<std::size_t>(m / plan.k) + (fold < static_cast<int>(m % plan.k) ? 1 : 0);
      const auto held_begin = order.begin() + static_cast<std::ptrdiff_t>(offset);
      const auto held_end = held_begin + static_cast<std::ptrdiff_t>(fold_size);
      offset += fold_size;

      std::vector<Index> held(held_begin, held_end);
      std::vector<Index> train;
      train.reserve(static_cast<std::size_t>(m) - fold_size);
      for (auto it = order.begin(); it != held_begin; ++it) train.push_back(*it);
      for (auto it = held_end; it != order.end(); ++it) train.push_back(*it);
      std::sort(train.begin(), train.end());  // canonical row order for the fit
      std::sort(held.begin(), held.end());

      TrajectoryMatrix sub;
      sub.simulator_id = data.simulator_id;
      sub.seeds = data.seeds;
      sub.values.resize(static_cast<Index>(train.size()), data.replications());
      sub.coords.resize(static_cast<Index>(train.size()), d);
      for (std::size_t i = 0; i < train.size(); ++i) {
        sub.values.row(static_cast<Index>(i)) = data.values.row(train[i]);
        sub.coords.row(static_cast<Index>(i)) = data.coords.row(train[i]);
      }
      Eigen::MatrixXd held_coords(static_cast<Index>(held.size()), d);
      for (std::size_t i = 0; i < held.size(); ++i) {
        held_coords.row(static_cast<Index>(i)) = data.coords.row(held[i]);
      }

      const emulator::KLEmulator emu = fit_for_plan(sub, plan, held_coords);
      for (std::size_t i = 0; i < held.size(); ++i) {
        const Eigen::VectorXd x = held_coords.row(static_cast<Index>(i));
        const Eigen::VectorXd predicted = emu.predict_samples(x);
        const Eigen::VectorXd reference = data.values.row(held[i]);
        out.points.push_back(x);
        out.rows.push_back(metrics::compare(predicted, reference, plan.bins, plan.alpha));
      }
    }
  });

  ValidationResult result;
  std::size_t total = 0;
  for (const auto& r : per_rep) total += r.rows.size();
  result.points.resize(static_cast<Index>(total), d);
  result.rows.reserve(total);
  result.repetition.reserve(total);
  Index row = 0;
  for (std::size_t rep = 0; rep < per_rep.size(); ++rep) {
    for (std::size_t i = 0; i < per_rep[rep].rows.size(); ++i) {
      result.points.row(row++) = per_rep[rep].points[i].transpose();
      result.rows.push_back(per_rep[rep].rows[i]);
      result.repetition.push_back(static_cast<int>(rep));
    }
  }
  result.summary = summarize(result.rows);
  return result;
}

std::vector<metrics::MetricReport> test_point_evaluate(const emulator::KLEmulator& emu,
                                                       const simulators::StochasticSimulator& sim,
                                                       const Eigen::MatrixXd& test_points,
                                                       const SeedRegistry& seeds, int bins,
                                                       double alpha, int threads) {
  seeds.validate();
  const Index n = seeds.size();
  if (n < 1) throw DataError("test_point_evaluate: empty seed registry");

  std::vector<metrics::MetricReport> reports(static_cast<std::size_t>(test_points.rows()));
  parallel_for(static_cast<std::size_t>(test_points.rows()), threads, [&](std::size_t idx) {
    const Eigen::VectorXd x = test_points.row(static_cast<Index>(idx));
    try {
      Eigen::VectorXd reference(n);
      for (Index k = 0; k < n; ++k) {
        reference[k] = sim.evaluate(x, seeds.seeds[static_cast<std::size_t>(k)]);
      }
      const Eigen::VectorXd predicted = emu.predict_samples(x);
      reports[idx] = metrics::compare(predicted, reference, bins, alpha);
    } catch (const std::exception& e) {
      throw DataError("test_point_evaluate at point " + std::to_string(idx) + ": " + e.what());
    }
  });
  return reports;
}

}  // namespace klemu::validation
