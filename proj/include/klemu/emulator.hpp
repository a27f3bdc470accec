#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "klemu/empirical.hpp"
#include "klemu/surrogates.hpp"
#include "klemu/types.hpp"

namespace klemu::emulator {

/// The two ways of extending the spectral basis off the design points:
/// surrogate each eigenvector directly (eigvec_interp), or surrogate the
/// covariance function and re-decompose it on the enlarged point set
/// (cov_surrogate).
enum class Pathway { eigvec_interp, cov_surrogate };

std::string to_string(Pathway pathway);
Pathway pathway_from_string(const std::string& name);

/// A fitted spectral emulator of a stochastic simulator. Prediction at a new
/// input x returns the emulated trajectory ensemble
///   y_k = mean(x) + sum_{i<=p} sqrt(lambda_i) * xi_i(k) * phi_hat_i(x),
/// one value per retained trajectory; its empirical distribution is the
/// predicted output distribution at x.
class KLEmulator {
 public:
  Eigen::Index replications() const { return basis.xi.cols(); }
  Eigen::Index modes() const { return basis.truncation; }

  /// phi_hat_i(x) for the retained modes: surrogate evaluations for
  /// eigvec_interp; for cov_surrogate, the stored eigenvector row of x,
  /// which must be one of the fit-time target points.
  Eigen::VectorXd mode_values(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// The emulated N-sample ensemble at x.
  Eigen::VectorXd predict_samples(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// sum_{i<=p} lambda_i * phi_hat_i(x)^2 — the exact predictive variance
  /// when the trajectory variables are independent standard normals.
  double predict_variance_gaussian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  nlohmann::json to_json() const;
  static KLEmulator from_json(const nlohmann::json& j);

  // --- fitted state ---
  Pathway pathway = Pathway::eigvec_interp;
  empirical::KLBasis basis;       // truncated to the retained modes
  Eigen::MatrixXd basis_points;   // rows matching basis.eigenvectors rows
  Eigen::MatrixXd doe;            // the M training coordinates
  std::vector<std::unique_ptr<surrogates::Surrogate>> mode_surrogates;  // eigvec_interp: p
  std::unique_ptr<surrogates::Surrogate> mean_surrogate;
  std::optional<surrogates::PCEModel> cov_model;  // cov_surrogate only
  Index cov_training_pairs = 0;                   // cov_surrogate: M^2
  std::optional<ParameterSpace> space;            // domain check when present
  std::vector<std::uint64_t> seeds;               // trajectory seeds (provenance)
};

struct PathwayAOptions {
  surrogates::SurrogateKind surrogate = surrogates::SurrogateKind::kriging;
  surrogates::KernelFamily kernel = surrogates::KernelFamily::matern52;
  double truncation_energy = 1.0;
  int threads = 1;
};

/// Center, build the spectral basis, truncate, then fit one deterministic
/// surrogate per retained eigenvector (x^(j) -> phi_i(x^(j))) plus one for
/// the empirical mean.
KLEmulator fit_pathway_a(const TrajectoryMatrix& data, const PathwayAOptions& options = {},
                         std::optional<ParameterSpace> space = std::nullopt);

struct PathwayBOptions {
  int pce_degree = 3;
  // The mean function still needs a pointwise surrogate; the covariance
  // expansion only provides the fluctuation part.
  surrogates::SurrogateKind mean_surrogate = surrogates::SurrogateKind::rbf_linear;
  surrogates::KernelFamily kernel = surrogates::KernelFamily::matern52;
};

/// Fit an expansion of the empirical covariance over the M^2 training pairs,
/// evaluate it on the full target grid (targets must contain every design
/// point), symmetrize, re-decompose with negative eigenvalues clamped to
/// zero, and project the trajectory variables from the design-point rows.
KLEmulator fit_pathway_b(const TrajectoryMatrix& data, const Eigen::MatrixXd& targets,
                         const PathwayBOptions& options = {},
                         std::optional<ParameterSpace> space = std::nullopt);

}  // namespace klemu::emulator
