#pragma once

#include <Eigen/Dense>
#include <utility>

#include "klemu/types.hpp"

namespace klemu::empirical {

/// Trajectory values with the per-point empirical mean over seeds removed.
struct CenteredData {
  Eigen::MatrixXd centered;  // M x N, zero row means
  Eigen::VectorXd mean;      // length M
};

/// Discrete spectral basis of the empirical covariance: eigenpairs plus the
/// per-trajectory random-variable samples obtained by projecting the data
/// onto the eigenvectors.
struct KLBasis {
  Eigen::VectorXd eigenvalues;   // nonincreasing, >= 0
  Eigen::MatrixXd eigenvectors;  // columns orthonormal, one per retained mode
  Eigen::MatrixXd xi;            // modes x N projection samples
  Index truncation = 0;          // p: number of modes used for prediction

  Index modes() const { return eigenvalues.size(); }
};

/// Eigenvalues at or below eigenvalues[0] * 1e-12 are treated as null: their
/// projections are pinned to zero instead of dividing by a vanishing sqrt.
inline double null_mode_threshold(const Eigen::VectorXd& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues[0] * 1e-12;
}

inline Index positive_mode_count(const Eigen::VectorXd& eigenvalues) {
  const double thresh = null_mode_threshold(eigenvalues);
  Index p = 0;
  while (p < eigenvalues.size() && eigenvalues[p] > thresh) ++p;
  return p;
}

CenteredData center(const TrajectoryMatrix& data);

/// C = (1/N) * X * X^T for centered rows X. The 1/N convention (rather than
/// 1/(N-1)) is what makes the projected samples exactly unit-variance:
/// (1/N) xi xi^T = I on positive modes.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> empirical_covariance(
    const Eigen::MatrixBase<Derived>& centered) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix c = Matrix::Zero(centered.rows(), centered.rows());
  c.template selfadjointView<Eigen::Lower>().rankUpdate(centered.derived(),
                                                        Scalar(1) / Scalar(centered.cols()));
  return c.template selfadjointView<Eigen::Lower>();
}

/// Fix the sign ambiguity of each eigenvector: the component of largest
/// magnitude is made positive (ties resolved to the lowest index). Keeps
/// serialized bases and cross-run comparisons reproducible.
template <typename Derived>
void apply_sign_convention(Eigen::MatrixBase<Derived>& vectors) {
  using Scalar = typename Derived::Scalar;
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index arg = 0;
    Scalar best = -1;
    for (Index r = 0; r < vectors.rows(); ++r) {
      using std::abs;
      const Scalar a = abs(vectors(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (vectors(arg, c) < Scalar(0)) vectors.col(c) = -vectors.col(c);
  }
}

/// Spectral decomposition of a symmetric PSD matrix: eigenvalues sorted
/// nonincreasing, tiny negative round-off clamped to zero, sign convention
/// applied. Genuinely negative eigenvalues (below -1e-10 * ||C||) are an
/// error — covariance estimates must not produce them.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(const Eigen::MatrixXd& c);

/// Like eigendecompose, but for approximate covariances that may have lost
/// positive semidefiniteness (e.g. a surrogate of C evaluated off the
/// training pairs): every negative eigenvalue is clamped to zero instead of
/// being an error.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose_repair(const Eigen::MatrixXd& c);

/// Per-mode trajectory samples: xi(i,k) = (1/sqrt(lambda_i)) * sum_j
/// centered(j,k) * phi_i(j). Null modes get identically-zero rows.
Eigen::MatrixXd project_xi(const CenteredData& cd, const Eigen::VectorXd& eigenvalues,
                           const Eigen::MatrixXd& eigenvectors);

/// center -> covariance -> eigendecompose -> project, with truncation
/// initialized to the positive-mode count.
KLBasis build_basis(const CenteredData& cd);

/// Keep the smallest leading p with cumulative eigenvalue share >= energy;
/// modes beyond p are dropped from all fields. energy = 1 keeps exactly the
/// positive modes; an all-zero spectrum yields p = 0.
KLBasis truncate(const KLBasis& basis, double energy);

}  // namespace klemu::empirical
