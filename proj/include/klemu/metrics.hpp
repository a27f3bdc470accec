#pragma once

#include <Eigen/Core>
#include <utility>

#include "klemu/types.hpp"

namespace klemu::metrics {

/// Normalized histogram over shared bin edges. Comparisons below require
/// both operands to come from the same shared_histogram call (identical
/// edges), never from independent binnings.
struct Histogram {
  Eigen::VectorXd edges;   // strictly increasing, bins + 1 entries
  Eigen::VectorXd masses;  // nonnegative, sums to 1

  Index bins() const { return masses.size(); }
};

/// One scored comparison of a predicted sample against a reference sample.
struct MetricReport {
  double hist_intersection = 0.0;  // 1 = identical histograms, 0 = disjoint
  double hellinger = 0.0;          // 0 = identical, 1 = disjoint
  double js_divergence = 0.0;      // base-2 logs, in [0,1]
  double ks_statistic = 0.0;       // sup |F_a - F_b|
  bool ks_reject = false;          // at the alpha recorded below
  int bins = 0;
  double alpha = 0.0;
};

/// Bin both samples over common equal-width edges spanning their joint
/// range; the rightmost edge is inclusive. If every value in both samples is
/// identical the single degenerate bin gets mass 1 on each side.
std::pair<Histogram, Histogram> shared_histogram(const Eigen::VectorXd& sample_a,
                                                 const Eigen::VectorXd& sample_b, int bins);

/// Overlap sum_i min(p_i, q_i) in [0, 1].
double histogram_intersection(const Histogram& p, const Histogram& q);

/// (1/sqrt(2)) * || sqrt(p) - sqrt(q) ||_2 in [0, 1].
double hellinger(const Histogram& p, const Histogram& q);

/// Jensen-Shannon divergence with base-2 logarithms, in [0, 1]:
/// (KL(p||r) + KL(q||r))/2 with the midpoint r = (p+q)/2; zero-mass bins
/// contribute nothing.
double js_divergence(const Histogram& p, const Histogram& q);

/// Asymptotic two-sample critical constant c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_critical_constant(double alpha);

/// Exact two-sample Kolmogorov-Smirnov statistic (sup over the merged order
/// statistics, ties handled by advancing both empirical CDFs past each
/// distinct value) and the asymptotic-level decision
///   reject iff statistic > c(alpha) * sqrt((n+m)/(n*m)).
std::pair<double, bool> ks_two_sample(const Eigen::VectorXd& sample_a,
                                      const Eigen::VectorXd& sample_b, double alpha);

/// All four metrics on shared histograms, one report.
MetricReport compare(const Eigen::VectorXd& predicted, const Eigen::VectorXd& reference,
                     int bins, double alpha);

}  // namespace klemu::metrics
