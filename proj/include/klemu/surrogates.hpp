#pragma once

#include <Eigen/Core>
#include <cmath>
#include <json.hpp>
#include <memory>
#include <string>

#include "klemu/errors.hpp"
#include "klemu/types.hpp"

namespace klemu::surrogates {

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

enum class KernelFamily { gaussian, exponential, matern32, matern52 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary correlation kernel with per-dimension lengthscales. variance
/// and nugget ride along for model bookkeeping; kernel_eval itself returns
/// the unit-variance correlation R(h).
struct KernelSpec {
  KernelFamily family = KernelFamily::matern52;
  Eigen::VectorXd lengthscales;
  double variance = 1.0;
  double nugget = 0.0;
};

/// Anisotropic distance h = sqrt(sum_i ((x_i - y_i)/theta_i)^2).
double scaled_distance(const Eigen::VectorXd& lengthscales,
                       const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y);

/// Correlation R(h) in (0, 1], with R(0) = 1 for every family:
///   gaussian     exp(-h^2)
///   exponential  exp(-h)
///   matern32     (1 + sqrt(3) h) exp(-sqrt(3) h)
///   matern52     (1 + sqrt(5) h + 5 h^2/3) exp(-sqrt(5) h)
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

// ---------------------------------------------------------------------------
// Deterministic scalar-output surrogates
// ---------------------------------------------------------------------------

class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual bool is_interpolating() const = 0;
  virtual std::string kind() const = 0;
  /// Complete state, sufficient for bit-exact re-prediction after reload.
  virtual nlohmann::json to_json() const = 0;
};

enum class SurrogateKind { rbf_linear, kriging };

std::string to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& name);

Eigen::VectorXd predict_many(const Surrogate& model, const Eigen::MatrixXd& points);

/// Exact scattered-data interpolator s(x) = sum_j w_j ||x - x_j|| + a + b.x,
/// solved from the augmented symmetric system with the usual orthogonality
/// side conditions on w. Reproduces affine functions exactly.
std::unique_ptr<Surrogate> rbf_linear_fit(const Eigen::MatrixXd& inputs,
                                          const Eigen::VectorXd& targets);

struct KrigingOptions {
  double initial_nugget = 1e-10;
  double max_nugget = 1e-6;  // escalation stops here (x10 steps)
  int multistarts = 5;       // fixed coarse grid of lengthscale scales
  int max_iterations = 150;  // per Nelder-Mead start
};

/// Ordinary Kriging (constant trend estimated by GLS). Lengthscales are
/// fitted by maximizing the concentrated log marginal likelihood — process
/// variance profiled out analytically — with multi-start Nelder-Mead over
/// log(theta). At nugget <= 1e-8 the predictor interpolates the data.
std::unique_ptr<Surrogate> kriging_fit(const Eigen::MatrixXd& inputs,
                                       const Eigen::VectorXd& targets, KernelFamily family,
                                       const KrigingOptions& options = {});

/// Rebuild a fitted surrogate from its to_json() form (dispatch on "kind").
std::unique_ptr<Surrogate> surrogate_from_json(const nlohmann::json& j);

/// Fit dispatcher used by the emulator configuration.
std::unique_ptr<Surrogate> fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                                         const Eigen::VectorXd& targets,
                                         KernelFamily family = KernelFamily::matern52);

// ---------------------------------------------------------------------------
// Polynomial chaos expansion (uniform measure, orthonormal Legendre basis)
// ---------------------------------------------------------------------------

/// Legendre polynomial of degree k scaled by sqrt(2k+1), which makes the
/// family orthonormal for the uniform measure on [-1, 1].
template <typename Scalar>
Scalar legendre_orthonormal(int k, Scalar t) {
  Scalar prev = Scalar(1);  // P_0
  if (k == 0) return prev;
  Scalar curr = t;  // P_1
  for (int n = 1; n < k; ++n) {
    const Scalar next = (Scalar(2 * n + 1) * t * curr - Scalar(n) * prev) / Scalar(n + 1);
    prev = curr;
    curr = next;
  }
  using std::sqrt;
  return sqrt(Scalar(2 * k + 1)) * curr;
}

/// All multi-indices of total degree <= degree over `dims` variables, in
/// graded lexicographic order (degree-major), one row each. Row count is
/// C(degree + dims, dims).
Eigen::MatrixXi total_degree_multi_indices(int dims, int degree);

struct PCEModel {
  int degree = 0;
  Eigen::MatrixXi multi_indices;   // terms x dims
  Eigen::VectorXd coefficients;    // one per multi-index row
  Eigen::VectorXd lower, upper;    // bounds of the affine map onto [-1,1]^d

  Index dims() const { return multi_indices.cols(); }
  Index terms() const { return multi_indices.rows(); }
};

/// Affine map of the box [lower, upper] onto [-1,1]^d and back.
Eigen::VectorXd map_to_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
Eigen::VectorXd map_from_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& z,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Least-squares fit of a total-degree expansion. Requires at least as many
/// samples as coefficients; bounds for the input map default to the sample
/// bounding box but can be widened explicitly when predictions are expected
/// outside it.
PCEModel pce_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, int degree);
PCEModel pce_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, int degree,
                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

double pce_predict(const PCEModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Row of basis values [Psi_0(x), ..., Psi_{T-1}(x)] for the mapped input —
/// the building block shared by fitting and prediction.
Eigen::VectorXd pce_basis_row(const PCEModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

nlohmann::json pce_to_json(const PCEModel& model);
PCEModel pce_from_json(const nlohmann::json& j);

}  // namespace klemu::surrogates
