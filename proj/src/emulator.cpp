#include "klemu/emulator.hpp"

#include <cmath>
#include <utility>

#include "klemu/jsonio.hpp"
#include "klemu/parallel.hpp"

namespace klemu::emulator {

std::string to_string(Pathway pathway) {
  switch (pathway) {
    case Pathway::eigvec_interp: return "eigvec_interp";
    case Pathway::cov_surrogate: return "cov_surrogate";
  }
  throw UsageError("unknown pathway value");
}

Pathway pathway_from_string(const std::string& name) {
  if (name == "eigvec_interp") return Pathway::eigvec_interp;
  if (name == "cov_surrogate") return Pathway::cov_surrogate;
  throw UsageError("unknown pathway: " + name);
}

namespace {

/// Row of `points` equal to x: exact match first, then a tight-tolerance
/// scan as a fallback for values that went through a decimal round trip.
Index find_point_row(const Eigen::MatrixXd& points, const Eigen::Ref<const Eigen::VectorXd>& x) {
  for (Index r = 0; r < points.rows(); ++r) {
    if (points.row(r).transpose() == x) return r;
  }
  const double scale = 1.0 + x.cwiseAbs().maxCoeff();
  for (Index r = 0; r < points.rows(); ++r) {
    if ((points.row(r).transpose() - x).cwiseAbs().maxCoeff() <= 1e-12 * scale) return r;
  }
  return -1;
}

}  // namespace

Eigen::VectorXd KLEmulator::mode_values(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Index p = basis.truncation;
  if (pathway == Pathway::eigvec_interp) {
    Eigen::VectorXd phi(p);
    for (Index i = 0; i < p; ++i) phi[i] = mode_surrogates[static_cast<std::size_t>(i)]->predict(x);
    return phi;
  }
  const Index row = find_point_row(basis_points, x);
  if (row < 0) {
    throw DataError(
        "cov_surrogate emulator: prediction point is not among the fit-time targets; refit with "
        "this point included");
  }
  return basis.eigenvectors.row(row).head(p).transpose();
}

Eigen::VectorXd KLEmulator::predict_samples(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (space && !space->contains(x)) {
    throw DataError("predict_samples: input outside the parameter space");
  }
  const double mean = mean_surrogate->predict(x);
  const Eigen::VectorXd phi = mode_values(x);
  const Index p = basis.truncation;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(replications(), mean);
  if (p > 0) {
    const Eigen::VectorXd weights =
        (basis.eigenvalues.head(p).array().sqrt() * phi.array()).matrix();
    y += basis.xi.topRows(p).transpose() * weights;
  }
  return y;
}

double KLEmulator::predict_variance_gaussian(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (space && !space->contains(x)) {
    throw DataError("predict_variance_gaussian: input outside the parameter space");
  }
  const Index p = basis.truncation;
  if (p == 0) return 0.0;
  const Eigen::VectorXd phi = mode_values(x);
  return (basis.eigenvalues.head(p).array() * phi.array().square()).sum();
}

KLEmulator fit_pathway_a(const TrajectoryMatrix& data, const PathwayAOptions& options,
                         std::optional<ParameterSpace> space) {
  data.validate();
  const auto cd = empirical::center(data);

  KLEmulator emu;
  emu.pathway = Pathway::eigvec_interp;
  emu.basis = empirical::truncate(empirical::build_basis(cd), options.truncation_energy);
  emu.basis_points = data.coords;
  emu.doe = data.coords;
  emu.space = std::move(space);
  emu.seeds = data.seeds;

  const Index p = emu.basis.truncation;
  emu.mode_surrogates.resize(static_cast<std::size_t>(p));
  parallel_for(static_cast<std::size_t>(p), options.threads, [&](std::size_t i) {
    try {
      emu.mode_surrogates[i] = surrogates::fit_surrogate(
          options.surrogate, data.coords, emu.basis.eigenvectors.col(static_cast<Index>(i)),
          options.kernel);
    } catch (const std::exception& e) {
      throw NumericalError("mode " + std::to_string(i) + " surrogate fit failed: " + e.what());
    }
  });
  emu.mean_surrogate =
      surrogates::fit_surrogate(options.surrogate, data.coords, cd.mean, options.kernel);
  return emu;
}

KLEmulator fit_pathway_b(const TrajectoryMatrix& data, const Eigen::MatrixXd& targets,
                         const PathwayBOptions& options, std::optional<ParameterSpace> space) {
  data.validate();
  const Index m = data.points();
  const Index d = data.coords.cols();
  const Index mstar = targets.rows();
  if (targets.cols() != d) throw DataError("fit_pathway_b: target dimension mismatch");
  if (mstar < m) throw DataError("fit_pathway_b: fewer targets than design points");

  // Every design point must be a target row: those rows are where the
  // trajectory data lives, and the projections are computed there.
  std::vector<Index> doe_rows(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    const Index row = find_point_row(targets, data.coords.row(j).transpose());
    if (row < 0) {
      throw DataError("fit_pathway_b: design point " + std::to_string(j) +
                      " is missing from the target set");
    }
    doe_rows[static_cast<std::size_t>(j)] = row;
  }

  const auto cd = empirical::center(data);
  const Eigen::MatrixXd c = empirical::empirical_covariance(cd.centered);

  // Covariance surrogate on the doubled input (x, y) from all M^2 pairs.
  Eigen::MatrixXd pair_inputs(m * m, 2 * d);
  Eigen::VectorXd pair_targets(m * m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      pair_inputs.row(a * m + b) << data.coords.row(a), data.coords.row(b);
      pair_targets[a * m + b] = c(a, b);
    }
  }

  // Expansion bounds cover the whole target set so grid evaluation never
  // extrapolates; degenerate widths are padded.
  Eigen::VectorXd lo1 = targets.colwise().minCoeff().transpose();
  Eigen::VectorXd hi1 = targets.colwise().maxCoeff().transpose();
  for (Index j = 0; j < d; ++j) {
    if (!(lo1[j] < hi1[j])) {
      lo1[j] -= 0.5;
      hi1[j] += 0.5;
    }
  }
  Eigen::VectorXd lower(2 * d), upper(2 * d);
  lower << lo1, lo1;
  upper << hi1, hi1;

  KLEmulator emu;
  emu.pathway = Pathway::cov_surrogate;
  emu.cov_model = surrogates::pce_fit(pair_inputs, pair_targets, options.pce_degree, lower, upper);
  emu.cov_training_pairs = m * m;

  // Predicted covariance on the full target grid, then the exact
  // symmetrization (G + G^T)/2 before re-decomposing.
  Eigen::MatrixXd grid(mstar, mstar);
  Eigen::VectorXd pair(2 * d);
  for (Index a = 0; a < mstar; ++a) {
    for (Index b = 0; b < mstar; ++b) {
      pair << targets.row(a).transpose(), targets.row(b).transpose();
      grid(a, b) = surrogates::pce_predict(*emu.cov_model, pair);
    }
  }
  for (Index a = 0; a < mstar; ++a) {
    for (Index b = a + 1; b < mstar; ++b) {
      const double s = 0.5 * (grid(a, b) + grid(b, a));
      grid(a, b) = s;
      grid(b, a) = s;
    }
  }

  auto [lambda, phi] = empirical::eigendecompose_repair(grid);
  const Index p = empirical::positive_mode_count(lambda);

  emu.basis.eigenvalues = lambda.head(p);
  emu.basis.eigenvectors = phi.leftCols(p);
  emu.basis.truncation = p;
  emu.basis_points = targets;
  emu.doe = data.coords;
  emu.space = std::move(space);
  emu.seeds = data.seeds;

  // Trajectory variables from the design-point rows of the new eigenvectors
  // (the only rows with observed data).
  const Index n = data.replications();
  emu.basis.xi.resize(p, n);
  Eigen::MatrixXd phi_at_doe(m, p);
  for (Index j = 0; j < m; ++j) {
    phi_at_doe.row(j) = emu.basis.eigenvectors.row(doe_rows[static_cast<std::size_t>(j)]);
  }
  for (Index i = 0; i < p; ++i) {
    emu.basis.xi.row(i) =
        (phi_at_doe.col(i).transpose() * cd.centered) / std::sqrt(emu.basis.eigenvalues[i]);
  }

  emu.mean_surrogate =
      surrogates::fit_surrogate(options.mean_surrogate, data.coords, cd.mean, options.kernel);
  return emu;
}

nlohmann::json KLEmulator::to_json() const {
  nlohmann::json mode_json = nlohmann::json::array();
  for (const auto& s : mode_surrogates) mode_json.push_back(s->to_json());

  nlohmann::json j{
      {"pathway", to_string(pathway)},
      {"basis",
       {{"eigenvalues", jsonio::vector_to_json(basis.eigenvalues)},
        {"eigenvectors", jsonio::matrix_to_json(basis.eigenvectors)},
        {"xi", jsonio::matrix_to_json(basis.xi)},
        {"truncation", basis.truncation}}},
      {"basis_points", jsonio::matrix_to_json(basis_points)},
      {"doe", jsonio::matrix_to_json(doe)},
      {"doe_hash",
       codec::fnv1a64_hex(std::string(reinterpret_cast<const char*>(doe.data()),
                                      static_cast<std::size_t>(doe.size()) * sizeof(double)))},
      {"seeds", seeds},
      {"mode_surrogates", std::move(mode_json)},
      {"mean_surrogate", mean_surrogate->to_json()},
      {"cov_training_pairs", cov_training_pairs},
  };
  if (cov_model) j["cov_model"] = surrogates::pce_to_json(*cov_model);
  if (space) {
    j["space"] = {{"lower", jsonio::vector_to_json(space->lower.matrix())},
                  {"upper", jsonio::vector_to_json(space->upper.matrix())}};
  }
  return j;
}

KLEmulator KLEmulator::from_json(const nlohmann::json& j) {
  KLEmulator emu;
  emu.pathway = pathway_from_string(j.at("pathway").get<std::string>());
  const auto& jb = j.at("basis");
  emu.basis.eigenvalues = jsonio::vector_from_json(jb.at("eigenvalues"));
  emu.basis.eigenvectors = jsonio::matrix_from_json(jb.at("eigenvectors"));
  emu.basis.xi = jsonio::matrix_from_json(jb.at("xi"));
  emu.basis.truncation = jb.at("truncation").get<Index>();
  emu.basis_points = jsonio::matrix_from_json(j.at("basis_points"));
  emu.doe = jsonio::matrix_from_json(j.at("doe"));
  emu.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& js : j.at("mode_surrogates")) {
    emu.mode_surrogates.push_back(surrogates::surrogate_from_json(js));
  }
  emu.mean_surrogate = surrogates::surrogate_from_json(j.at("mean_surrogate"));
  emu.cov_training_pairs = j.at("cov_training_pairs").get<Index>();
  if (j.contains("cov_model")) emu.cov_model = surrogates::pce_from_json(j.at("cov_model"));
  if (j.contains("space")) {
    ParameterSpace s;
    s.lower = jsonio::vector_from_json(j.at("space").at("lower")).array();
    s.upper = jsonio::vector_from_json(j.at("space").at("upper")).array();
    s.validate();
    emu.space = std::move(s);
  }
  return emu;
}

}  // namespace klemu::emulator
