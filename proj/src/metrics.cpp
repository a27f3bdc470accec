#include "klemu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "klemu/errors.hpp"

namespace klemu::metrics {

namespace {

void require_same_edges(const Histogram& p, const Histogram& q) {
  if (p.edges.size() != q.edges.size() || p.edges != q.edges) {
    throw DataError("histogram metric: operands must share identical bin edges");
  }
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

std::pair<Histogram, Histogram> shared_histogram(const Eigen::VectorXd& sample_a,
                                                 const Eigen::VectorXd& sample_b, int bins) {
  if (sample_a.size() == 0 || sample_b.size() == 0) {
    throw DataError("shared_histogram: samples must be nonempty");
  }
  if (bins < 1) throw DataError("shared_histogram: bins must be positive");
  if (!sample_a.allFinite() || !sample_b.allFinite()) {
    throw DataError("shared_histogram: non-finite sample values");
  }

  const double lo = std::min(sample_a.minCoeff(), sample_b.minCoeff());
  const double hi = std::max(sample_a.maxCoeff(), sample_b.maxCoeff());

  Histogram pa, pb;
  if (lo == hi) {
    // Zero-width joint range: one degenerate bin holding everything.
    pa.edges = pb.edges = Eigen::Vector2d(lo, lo + 1.0);
    pa.masses = pb.masses = Eigen::VectorXd::Ones(1);
    return {pa, pb};
  }

  Eigen::VectorXd edges(bins + 1);
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) edges[i] = lo + width * i;
  edges[bins] = hi;  // exact upper edge regardless of rounding

  const auto fill = [&](const Eigen::VectorXd& sample) {
    Eigen::VectorXd masses = Eigen::VectorXd::Zero(bins);
    for (Index i = 0; i < sample.size(); ++i) {
      auto b = static_cast<Index>((sample[i] - lo) / (hi - lo) * bins);
      b = std::clamp<Index>(b, 0, bins - 1);  // rightmost edge inclusive
      masses[b] += 1.0;
    }
    masses /= static_cast<double>(sample.size());
    return masses;
  };

  pa.edges = pb.edges = edges;
  pa.masses = fill(sample_a);
  pb.masses = fill(sample_b);
  return {pa, pb};
}

double histogram_intersection(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  return clamp01(p.masses.cwiseMin(q.masses).sum());
}

double hellinger(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  const double sq =
      0.5 * (p.masses.array().sqrt() - q.masses.array().sqrt()).square().sum();
  return clamp01(std::sqrt(sq));
}

double js_divergence(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  double acc = 0.0;
  for (Index i = 0; i < p.masses.size(); ++i) {
    const double pi = p.masses[i];
    const double qi = q.masses[i];
    const double ri = 0.5 * (pi + qi);
    if (pi > 0.0) acc += 0.5 * pi * std::log2(pi / ri);
    if (qi > 0.0) acc += 0.5 * qi * std::log2(qi / ri);
  }
  return clamp01(acc);
}

double ks_critical_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("ks: alpha must lie in (0,1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

std::pair<double, bool> ks_two_sample(const Eigen::VectorXd& sample_a,
                                      const Eigen::VectorXd& sample_b, double alpha) {
  const double critical = ks_critical_constant(alpha);
  if (sample_a.size() == 0 || sample_b.size() == 0) {
    throw DataError("ks_two_sample: samples must be nonempty");
  }

  std::vector<double> a(sample_a.data(), sample_a.data() + sample_a.size());
  std::vector<double> b(sample_b.data(), sample_b.data() + sample_b.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const auto n = a.size();
  const auto m = b.size();
  std::size_t ia = 0, ib = 0;
  double stat = 0.0;
  // Walk the merged order statistics; after consuming every copy of a value
  // from both samples, both empirical CDFs sit at their right limit there,
  // which is where the sup of |F_a - F_b| lives for step functions.
  while (ia < n || ib < m) {
    const double v = (ib >= m || (ia < n && a[ia] <= b[ib])) ? a[ia] : b[ib];
    while (ia < n && a[ia] == v) ++ia;
    while (ib < m && b[ib] == v) ++ib;
    stat = std::max(stat, std::abs(static_cast<double>(ia) / static_cast<double>(n) -
                                   static_cast<double>(ib) / static_cast<double>(m)));
  }

  const double threshold =
      critical * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
  return {stat, stat > threshold};
}

MetricReport compare(const Eigen::VectorXd& predicted, const Eigen::VectorXd& reference,
                     int bins, double alpha) {
  const auto [p, q] = shared_histogram(predicted, reference, bins);
  MetricReport report;
  report.hist_intersection = histogram_intersection(p, q);
  report.hellinger = hellinger(p, q);
  report.js_divergence = js_divergence(p, q);
  const auto [stat, reject] = ks_two_sample(predicted, reference, alpha);
  report.ks_statistic = stat;
  report.ks_reject = reject;
  report.bins = bins;
  report.alpha = alpha;
  return report;
}

}  // namespace klemu::metrics
