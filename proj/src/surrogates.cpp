#include "klemu/surrogates.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "klemu/jsonio.hpp"

namespace klemu::surrogates {

namespace {

/// Target standardization shared by all surrogates: fit in (y - mean)/scale
/// units for conditioning, undo on predict. A zero-spread target keeps
/// scale 1 so the transform stays invertible.
struct TargetScaling {
  double mean = 0.0;
  double scale = 1.0;

  static TargetScaling of(const Eigen::VectorXd& targets) {
    TargetScaling s;
    s.mean = targets.mean();
    const double sd = std::sqrt((targets.array() - s.mean).square().mean());
    s.scale = sd > 0.0 ? sd : 1.0;
    return s;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const { return (y.array() - mean) / scale; }
  double undo(double z) const { return mean + scale * z; }
};

void check_training_set(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                        Index min_count, const char* who) {
  if (inputs.rows() != targets.size()) {
    throw DataError(std::string(who) + ": inputs/targets count mismatch");
  }
  if (inputs.rows() < min_count) {
    throw DataError(std::string(who) + ": needs at least " + std::to_string(min_count) +
                    " training points");
  }
  if (!inputs.allFinite() || !targets.allFinite()) {
    throw DataError(std::string(who) + ": non-finite training data");
  }
  for (Index a = 0; a < inputs.rows(); ++a) {
    for (Index b = a + 1; b < inputs.rows(); ++b) {
      if (inputs.row(a) == inputs.row(b)) {
        throw DataError(std::string(who) + ": duplicate training inputs at rows " +
                        std::to_string(a) + "," + std::to_string(b));
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::matern52: return "matern52";
  }
  throw UsageError("unknown kernel family value");
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "exponential") return KernelFamily::exponential;
  if (name == "matern32") return KernelFamily::matern32;
  if (name == "matern52") return KernelFamily::matern52;
  throw UsageError("unknown kernel family: " + name);
}

double scaled_distance(const Eigen::VectorXd& lengthscales,
                       const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || x.size() != lengthscales.size()) {
    throw DataError("scaled_distance: dimension mismatch");
  }
  return std::sqrt(((x - y).array() / lengthscales.array()).square().sum());
}

namespace {

double correlation(KernelFamily family, double h) {
  switch (family) {
    case KernelFamily::gaussian: return std::exp(-h * h);
    case KernelFamily::exponential: return std::exp(-h);
    case KernelFamily::matern32: {
      const double a = std::numbers::sqrt3 * h;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::matern52: {
      const double a = std::sqrt(5.0) * h;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  throw UsageError("unknown kernel family value");
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  return correlation(spec.family, scaled_distance(spec.lengthscales, x, y));
}

Eigen::VectorXd predict_many(const Surrogate& model, const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out[i] = model.predict(points.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// RBF-linear interpolation
// ---------------------------------------------------------------------------

namespace {

class RbfLinearSurrogate final : public Surrogate {
 public:
  RbfLinearSurrogate(Eigen::MatrixXd inputs, Eigen::VectorXd weights, Eigen::VectorXd tail,
                     TargetScaling scaling)
      : inputs_(std::move(inputs)),
        weights_(std::move(weights)),
        tail_(std::move(tail)),
        scaling_(scaling) {}

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    if (x.size() != inputs_.cols()) throw DataError("rbf_linear: input dimension mismatch");
    double s = tail_[0] + tail_.tail(inputs_.cols()).dot(x);
    for (Index j = 0; j < inputs_.rows(); ++j) {
      s += weights_[j] * (x - inputs_.row(j).transpose()).norm();
    }
    return scaling_.undo(s);
  }

  bool is_interpolating() const override { return true; }
  std::string kind() const override { return "rbf_linear"; }

  nlohmann::json to_json() const override {
    return {{"kind", kind()},
            {"inputs", jsonio::matrix_to_json(inputs_)},
            {"weights", jsonio::vector_to_json(weights_)},
            {"tail", jsonio::vector_to_json(tail_)},
            {"target_mean", scaling_.mean},
            {"target_scale", scaling_.scale}};
  }

  static std::unique_ptr<Surrogate> from_json(const nlohmann::json& j) {
    TargetScaling s;
    s.mean = j.at("target_mean").get<double>();
    s.scale = j.at("target_scale").get<double>();
    return std::make_unique<RbfLinearSurrogate>(jsonio::matrix_from_json(j.at("inputs")),
                                                jsonio::vector_from_json(j.at("weights")),
                                                jsonio::vector_from_json(j.at("tail")), s);
  }

 private:
  Eigen::MatrixXd inputs_;   // n x d
  Eigen::VectorXd weights_;  // n
  Eigen::VectorXd tail_;     // 1 + d (constant, then gradient)
  TargetScaling scaling_;
};

}  // namespace

std::unique_ptr<Surrogate> rbf_linear_fit(const Eigen::MatrixXd& inputs,
                                          const Eigen::VectorXd& targets) {
  check_training_set(inputs, targets, 1, "rbf_linear_fit");
  const Index n = inputs.rows();
  const Index d = inputs.cols();
  const Index size = n + d + 1;

  const TargetScaling scaling = TargetScaling::of(targets);
  const Eigen::VectorXd z = scaling.apply(targets);

  // [ A  P ] [w]   [z]      A_jl = ||x_j - x_l||,  P = [1 | X]
  // [ P' 0 ] [c] = [0]
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const double r = (inputs.row(a) - inputs.row(b)).norm();
      system(a, b) = r;
      system(b, a) = r;
    }
  }
  system.block(0, n, n, 1).setOnes();
  system.block(0, n + 1, n, d) = inputs;
  system.block(n, 0, 1, n).setOnes();
  system.block(n + 1, 0, d, n) = inputs.transpose();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs.head(n) = z;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
  if (qr.rank() < size) {
    throw NumericalError("rbf_linear_fit: singular augmented system (degenerate geometry)");
  }
  const Eigen::VectorXd solution = qr.solve(rhs);

  return std::make_unique<RbfLinearSurrogate>(inputs, solution.head(n), solution.tail(d + 1),
                                              scaling);
}

// ---------------------------------------------------------------------------
// Ordinary Kriging
// ---------------------------------------------------------------------------

namespace {

/// Minimize f over R^dim with Nelder-Mead from the given start. Standard
/// reflection/expansion/contraction/shrink coefficients; returns the best
/// vertex found within the iteration budget.
std::pair<Eigen::VectorXd, double> nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
    double step, int max_iterations) {
  const Index dim = start.size();
  std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(dim) + 1, start);
  std::vector<double> fx(static_cast<std::size_t>(dim) + 1);
  for (Index i = 0; i < dim; ++i) x[static_cast<std::size_t>(i) + 1][i] += step;
  for (std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);

  std::vector<std::size_t> order(x.size());
  for (int it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];

    if (std::abs(fx[worst] - fx[best]) <= 1e-9 * (std::abs(fx[best]) + 1e-9)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i != worst) centroid += x[i];
    }
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - x[worst]);
    const double f_reflected = f(reflected);
    if (f_reflected < fx[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - x[worst]);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        x[worst] = expanded;
        fx[worst] = f_expanded;
      } else {
        x[worst] = reflected;
        fx[worst] = f_reflected;
      }
    } else if (f_reflected < fx[second]) {
      x[worst] = reflected;
      fx[worst] = f_reflected;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (x[worst] - centroid);
      const double f_contracted = f(contracted);
      if (f_contracted < fx[worst]) {
        x[worst] = contracted;
        fx[worst] = f_contracted;
      } else {
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (i == best) continue;
          x[i] = x[best] + 0.5 * (x[i] - x[best]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  const std::size_t best =
      static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {x[best], fx[best]};
}

Eigen::MatrixXd correlation_matrix(KernelFamily family, const Eigen::VectorXd& theta,
                                   const Eigen::MatrixXd& inputs, double nugget) {
  const Index n = inputs.rows();
  Eigen::MatrixXd r(n, n);
  for (Index a = 0; a < n; ++a) {
    r(a, a) = 1.0 + nugget;
    for (Index b = a + 1; b < n; ++b) {
      const double v =
          correlation(family, scaled_distance(theta, inputs.row(a), inputs.row(b)));
      r(a, b) = v;
      r(b, a) = v;
    }
  }
  return r;
}

struct GlsFit {
  bool ok = false;
  double mu = 0.0;
  double sigma2 = 0.0;
  double nll = std::numeric_limits<double>::infinity();
  Eigen::VectorXd alpha;  // R^{-1}(z - mu 1)
  double condition = 0.0;
};

/// Factorize R, estimate the constant trend by GLS, profile out the process
/// variance, and evaluate the concentrated negative log likelihood
///   n log(sigma2_hat) + log det R.
GlsFit gls_fit(const Eigen::MatrixXd& r, const Eigen::VectorXd& z) {
  GlsFit fit;
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return fit;

  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  const double dmax = diag.maxCoeff(), dmin = diag.minCoeff();
  if (!(dmin > 0.0)) return fit;
  fit.condition = (dmax / dmin) * (dmax / dmin);

  const Index n = z.size();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd rinv_ones = llt.solve(ones);
  const double denom = ones.dot(rinv_ones);
  if (!(denom > 0.0)) return fit;
  fit.mu = z.dot(rinv_ones) / denom;

  const Eigen::VectorXd resid = z.array() - fit.mu;
  fit.alpha = llt.solve(resid);
  fit.sigma2 = resid.dot(fit.alpha) / static_cast<double>(n);

  const double logdet = 2.0 * diag.array().log().sum();
  fit.nll = static_cast<double>(n) * std::log(std::max(fit.sigma2, 1e-300)) + logdet;
  fit.ok = std::isfinite(fit.nll);
  return fit;
}

class KrigingSurrogate final : public Surrogate {
 public:
  KrigingSurrogate(Eigen::MatrixXd inputs, KernelSpec spec, double mu, Eigen::VectorXd alpha,
                   TargetScaling scaling)
      : inputs_(std::move(inputs)),
        spec_(std::move(spec)),
        mu_(mu),
        alpha_(std::move(alpha)),
        scaling_(scaling) {}

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    if (x.size() != inputs_.cols()) throw DataError("kriging: input dimension mismatch");
    double acc = mu_;
    for (Index j = 0; j < inputs_.rows(); ++j) {
      acc += alpha_[j] * kernel_eval(spec_, x, inputs_.row(j).transpose());
    }
    return scaling_.undo(acc);
  }

  bool is_interpolating() const override { return spec_.nugget <= 1e-8; }
  std::string kind() const override { return "kriging"; }

  nlohmann::json to_json() const override {
    return {{"kind", kind()},
            {"family", to_string(spec_.family)},
            {"inputs", jsonio::matrix_to_json(inputs_)},
            {"lengthscales", jsonio::vector_to_json(spec_.lengthscales)},
            {"variance", spec_.variance},
            {"nugget", spec_.nugget},
            {"trend", mu_},
            {"alpha", jsonio::vector_to_json(alpha_)},
            {"target_mean", scaling_.mean},
            {"target_scale", scaling_.scale}};
  }

  static std::unique_ptr<Surrogate> from_json(const nlohmann::json& j) {
    KernelSpec spec;
    spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    spec.lengthscales = jsonio::vector_from_json(j.at("lengthscales"));
    spec.variance = j.at("variance").get<double>();
    spec.nugget = j.at("nugget").get<double>();
    TargetScaling s;
    s.mean = j.at("target_mean").get<double>();
    s.scale = j.at("target_scale").get<double>();
    return std::make_unique<KrigingSurrogate>(jsonio::matrix_from_json(j.at("inputs")),
                                              std::move(spec), j.at("trend").get<double>(),
                                              jsonio::vector_from_json(j.at("alpha")), s);
  }

 private:
  Eigen::MatrixXd inputs_;
  KernelSpec spec_;
  double mu_;               // GLS trend, standardized units
  Eigen::VectorXd alpha_;   // R^{-1}(z - mu 1), standardized units
  TargetScaling scaling_;
};

}  // namespace

std::unique_ptr<Surrogate> kriging_fit(const Eigen::MatrixXd& inputs,
                                       const Eigen::VectorXd& targets, KernelFamily family,
                                       const KrigingOptions& options) {
  check_training_set(inputs, targets, 3, "kriging_fit");
  const Index n = inputs.rows();
  const Index d = inputs.cols();

  const TargetScaling scaling = TargetScaling::of(targets);
  const Eigen::VectorXd z = scaling.apply(targets);

  // Per-dimension data spread anchors the lengthscale search grid.
  Eigen::VectorXd spread(d);
  for (Index j = 0; j < d; ++j) {
    const double range = inputs.col(j).maxCoeff() - inputs.col(j).minCoeff();
    spread[j] = range > 0.0 ? range : 1.0;
  }

  // Constant targets: the GLS trend absorbs everything; no likelihood
  // surface to explore.
  if ((z.array().abs() < 1e-14).all()) {
    KernelSpec spec{family, spread, 1.0, options.initial_nugget};
    return std::make_unique<KrigingSurrogate>(inputs, std::move(spec), 0.0,
                                              Eigen::VectorXd::Zero(n), scaling);
  }

  static constexpr double start_scales[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  const int starts = std::min<int>(options.multistarts, std::size(start_scales));

  for (double nugget = options.initial_nugget; nugget <= options.max_nugget * (1.0 + 1e-12);
       nugget *= 10.0) {
    const auto objective = [&](const Eigen::VectorXd& log_theta) {
      const Eigen::VectorXd theta = log_theta.array().exp();
      return gls_fit(correlation_matrix(family, theta, inputs, nugget), z).nll;
    };

    bool any = false;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_log_theta;
    for (int s = 0; s < starts; ++s) {
      const Eigen::VectorXd start = (start_scales[s] * spread.array()).log();
      auto [point, value] = nelder_mead(objective, start, 0.25, options.max_iterations);
      if (std::isfinite(value) && value < best_value) {
        best_value = value;
        best_log_theta = point;
        any = true;
      }
    }
    if (!any) continue;  // escalate nugget

    const Eigen::VectorXd theta = best_log_theta.array().exp();
    const GlsFit fit = gls_fit(correlation_matrix(family, theta, inputs, nugget), z);
    if (!fit.ok) continue;

    KernelSpec spec{family, theta, fit.sigma2, nugget};
    return std::make_unique<KrigingSurrogate>(inputs, std::move(spec), fit.mu, fit.alpha,
                                              scaling);
  }

  // Estimate the conditioning at the widest start for the error report.
  const Eigen::MatrixXd r =
      correlation_matrix(family, spread, inputs, options.max_nugget);
  const GlsFit fit = gls_fit(r, z);
  throw NumericalError(
      "kriging_fit: correlation matrix stayed ill-conditioned after nugget escalation to " +
      std::to_string(options.max_nugget) +
      " (condition estimate " + std::to_string(fit.condition) + ")");
}

std::unique_ptr<Surrogate> surrogate_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "rbf_linear") return RbfLinearSurrogate::from_json(j);
  if (kind == "kriging") return KrigingSurrogate::from_json(j);
  throw DataError("surrogate_from_json: unknown kind '" + kind + "'");
}

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::rbf_linear: return "rbf_linear";
    case SurrogateKind::kriging: return "kriging";
  }
  throw UsageError("unknown surrogate kind value");
}

SurrogateKind surrogate_kind_from_string(const std::string& name) {
  if (name == "rbf_linear") return SurrogateKind::rbf_linear;
  if (name == "kriging") return SurrogateKind::kriging;
  throw UsageError("unknown surrogate kind: " + name);
}

std::unique_ptr<Surrogate> fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                                         const Eigen::VectorXd& targets, KernelFamily family) {
  switch (kind) {
    case SurrogateKind::rbf_linear: return rbf_linear_fit(inputs, targets);
    case SurrogateKind::kriging: return kriging_fit(inputs, targets, family);
  }
  throw UsageError("unknown surrogate kind value");
}

// ---------------------------------------------------------------------------
// Polynomial chaos expansion
// ---------------------------------------------------------------------------

Eigen::MatrixXi total_degree_multi_indices(int dims, int degree) {
  if (dims < 1 || degree < 0) throw DataError("total_degree_multi_indices: bad arguments");

  std::vector<Eigen::VectorXi> rows;
  Eigen::VectorXi current = Eigen::VectorXi::Zero(dims);
  // Graded order: enumerate each total degree g in turn, lexicographically
  // within g (first dimension most significant).
  const std::function<void(int, int, int)> emit = [&](int pos, int g, int remaining) {
    if (pos == dims - 1) {
      current[pos] = remaining;
      rows.push_back(current);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      current[pos] = v;
      emit(pos + 1, g, remaining - v);
    }
  };
  for (int g = 0; g <= degree; ++g) emit(0, g, g);

  Eigen::MatrixXi out(static_cast<Index>(rows.size()), dims);
  for (Index r = 0; r < out.rows(); ++r) out.row(r) = rows[static_cast<std::size_t>(r)];
  return out;
}

Eigen::VectorXd map_to_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (x.size() != lower.size() || x.size() != upper.size()) {
    throw DataError("map_to_unit_cube: dimension mismatch");
  }
  return (2.0 * (x - lower).array() / (upper - lower).array() - 1.0).matrix();
}

Eigen::VectorXd map_from_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& z,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (z.size() != lower.size() || z.size() != upper.size()) {
    throw DataError("map_from_unit_cube: dimension mismatch");
  }
  return (lower.array() + (z.array() + 1.0) * 0.5 * (upper - lower).array()).matrix();
}

Eigen::VectorXd pce_basis_row(const PCEModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Index d = model.dims();
  if (x.size() != d) throw DataError("pce: input dimension mismatch");
  const Eigen::VectorXd z = map_to_unit_cube(x, model.lower, model.upper);

  // Univariate values once per (dimension, degree), then products per term.
  Eigen::MatrixXd uni(d, model.degree + 1);
  for (Index j = 0; j < d; ++j) {
    for (int k = 0; k <= model.degree; ++k) uni(j, k) = legendre_orthonormal(k, z[j]);
  }

  Eigen::VectorXd row(model.terms());
  for (Index t = 0; t < model.terms(); ++t) {
    double v = 1.0;
    for (Index j = 0; j < d; ++j) v *= uni(j, model.multi_indices(t, j));
    row[t] = v;
  }
  return row;
}

PCEModel pce_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, int degree,
                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (inputs.rows() != targets.size()) throw DataError("pce_fit: inputs/targets count mismatch");
  if (inputs.rows() < 1) throw DataError("pce_fit: empty training set");
  if (!inputs.allFinite() || !targets.allFinite()) throw DataError("pce_fit: non-finite data");
  if (lower.size() != inputs.cols() || upper.size() != inputs.cols()) {
    throw DataError("pce_fit: bounds dimension mismatch");
  }
  for (Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) throw DataError("pce_fit: degenerate bounds in dim " + std::to_string(j));
  }

  PCEModel model;
  model.degree = degree;
  model.multi_indices = total_degree_multi_indices(static_cast<int>(inputs.cols()), degree);
  model.lower = lower;
  model.upper = upper;

  const Index terms = model.terms();
  if (inputs.rows() < terms) {
    throw DataError("pce_fit: underdetermined system (" + std::to_string(inputs.rows()) +
                    " samples for " + std::to_string(terms) +
                    " coefficients) — lower the degree");
  }

  const TargetScaling scaling = TargetScaling::of(targets);
  const Eigen::VectorXd z = scaling.apply(targets);

  Eigen::MatrixXd design(inputs.rows(), terms);
  model.coefficients = Eigen::VectorXd::Zero(terms);  // dims/degree set; basis_row usable
  for (Index i = 0; i < inputs.rows(); ++i) {
    design.row(i) = pce_basis_row(model, inputs.row(i)).transpose();
  }

  Eigen::VectorXd coeffs = design.colPivHouseholderQr().solve(z);
  // Undo the standardization inside the coefficients: the constant basis
  // function is identically 1, so the shift lands entirely on term 0.
  coeffs *= scaling.scale;
  coeffs[0] += scaling.mean;
  model.coefficients = std::move(coeffs);
  return model;
}

PCEModel pce_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, int degree) {
  if (inputs.rows() < 1) throw DataError("pce_fit: empty training set");
  Eigen::VectorXd lower = inputs.colwise().minCoeff().transpose();
  Eigen::VectorXd upper = inputs.colwise().maxCoeff().transpose();
  for (Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) {
      // Degenerate sample spread: widen to a unit box around the value.
      lower[j] -= 0.5;
      upper[j] += 0.5;
    }
  }
  return pce_fit(inputs, targets, degree, lower, upper);
}

double pce_predict(const PCEModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.coefficients.dot(pce_basis_row(model, x));
}

nlohmann::json pce_to_json(const PCEModel& model) {
  std::vector<int> indices(static_cast<std::size_t>(model.multi_indices.size()));
  for (Index t = 0; t < model.multi_indices.rows(); ++t) {
    for (Index j = 0; j < model.multi_indices.cols(); ++j) {
      indices[static_cast<std::size_t>(t * model.multi_indices.cols() + j)] =
          model.multi_indices(t, j);
    }
  }
  return {{"kind", "pce"},
          {"degree", model.degree},
          {"dims", model.multi_indices.cols()},
          {"multi_indices", indices},
          {"coefficients", jsonio::vector_to_json(model.coefficients)},
          {"lower", jsonio::vector_to_json(model.lower)},
          {"upper", jsonio::vector_to_json(model.upper)}};
}

PCEModel pce_from_json(const nlohmann::json& j) {
  PCEModel model;
  model.degree = j.at("degree").get<int>();
  const auto dims = j.at("dims").get<Index>();
  const auto indices = j.at("multi_indices").get<std::vector<int>>();
  if (dims < 1 || indices.size() % static_cast<std::size_t>(dims) != 0) {
    throw DataError("pce payload: malformed multi-index table");
  }
  const Index terms = static_cast<Index>(indices.size()) / dims;
  model.multi_indices.resize(terms, dims);
  for (Index t = 0; t < terms; ++t) {
    for (Index jdx = 0; jdx < dims; ++jdx) {
      model.multi_indices(t, jdx) = indices[static_cast<std::size_t>(t * dims + jdx)];
    }
  }
  model.coefficients = jsonio::vector_from_json(j.at("coefficients"));
  model.lower = jsonio::vector_from_json(j.at("lower"));
  model.upper = jsonio::vector_from_json(j.at("upper"));
  if (model.coefficients.size() != terms) throw DataError("pce payload: coefficient count mismatch");
  return model;
}

}  // namespace klemu::surrogates
