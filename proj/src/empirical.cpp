#include "klemu/empirical.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace klemu::empirical {

CenteredData center(const TrajectoryMatrix& data) {
  data.validate();
  CenteredData cd;
  cd.mean = data.values.rowwise().mean();
  cd.centered = data.values.colwise() - cd.mean;
  return cd;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols()) throw DataError("eigendecompose: matrix must be square");
  const double scale = c.cwiseAbs().maxCoeff();
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0)) {
    throw DataError("eigendecompose: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (c + c.transpose()));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose: eigensolver failed to converge");
  }

  const Index m = c.rows();
  Eigen::VectorXd lambda(m);
  Eigen::MatrixXd phi(m, m);
  // Eigen sorts ascending; flip to the nonincreasing order used everywhere.
  for (Index i = 0; i < m; ++i) {
    lambda[i] = solver.eigenvalues()[m - 1 - i];
    phi.col(i) = solver.eigenvectors().col(m - 1 - i);
  }

  const double floor = -1e-10 * std::max(scale, 1.0);
  for (Index i = 0; i < m; ++i) {
    if (lambda[i] < floor) {
      throw NumericalError("eigendecompose: eigenvalue " + std::to_string(lambda[i]) +
                           " below the PSD round-off tolerance");
    }
    if (lambda[i] < 0.0) lambda[i] = 0.0;
  }
  apply_sign_convention(phi);
  return {std::move(lambda), std::move(phi)};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose_repair(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols()) throw DataError("eigendecompose_repair: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (c + c.transpose()));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose_repair: eigensolver failed to converge");
  }
  const Index m = c.rows();
  Eigen::VectorXd lambda(m);
  Eigen::MatrixXd phi(m, m);
  for (Index i = 0; i < m; ++i) {
    lambda[i] = std::max(solver.eigenvalues()[m - 1 - i], 0.0);
    phi.col(i) = solver.eigenvectors().col(m - 1 - i);
  }
  apply_sign_convention(phi);
  return {std::move(lambda), std::move(phi)};
}

Eigen::MatrixXd project_xi(const CenteredData& cd, const Eigen::VectorXd& eigenvalues,
                           const Eigen::MatrixXd& eigenvectors) {
  const Index modes = eigenvalues.size();
  const Index n = cd.centered.cols();
  const double thresh = null_mode_threshold(eigenvalues);

  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(modes, n);
  for (Index i = 0; i < modes; ++i) {
    if (eigenvalues[i] > thresh) {
      xi.row(i) = (eigenvectors.col(i).transpose() * cd.centered) / std::sqrt(eigenvalues[i]);
    }
  }
  return xi;
}

KLBasis build_basis(const CenteredData& cd) {
  KLBasis basis;
  auto [lambda, phi] = eigendecompose(empirical_covariance(cd.centered));
  basis.eigenvalues = std::move(lambda);
  basis.eigenvectors = std::move(phi);
  basis.xi = project_xi(cd, basis.eigenvalues, basis.eigenvectors);
  basis.truncation = positive_mode_count(basis.eigenvalues);
  return basis;
}

KLBasis truncate(const KLBasis& basis, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw DataError("truncate: energy must lie in (0,1]");

  const Index positive = positive_mode_count(basis.eigenvalues);
  const double total = basis.eigenvalues.sum();
  Index p = 0;
  if (total > 0.0) {
    if (energy >= 1.0) {
      p = positive;
    } else {
      double cumulative = 0.0;
      while (p < positive) {
        cumulative += basis.eigenvalues[p];
        ++p;
        if (cumulative >= energy * total) break;
      }
    }
  }

  KLBasis out;
  out.eigenvalues = basis.eigenvalues.head(p);
  out.eigenvectors = basis.eigenvectors.leftCols(p);
  out.xi = basis.xi.topRows(p);
  out.truncation = p;
  return out;
}

}  // namespace klemu::empirical
