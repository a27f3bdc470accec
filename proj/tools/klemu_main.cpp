// klemu — command-line driver for the spectral emulator library.
//
// Pipeline: `doe` -> `simulate` -> `fit` -> `predict` / `report`, plus the
// standalone k-fold `validate`. Each command reads upstream artifacts from
// the output directory, writes one downstream artifact atomically
// (temp-then-rename), and prints a single timing line. Configuration
// precedence: command-line flags > --config JSON > built-in defaults; the
// effective configuration is echoed into every artifact envelope's
// provenance block, so outputs are self-describing.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure (or unexpected internal error). Failures print one
// machine-parsable JSON line on stderr.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "klemu/design.hpp"
#include "klemu/emulator.hpp"
#include "klemu/errors.hpp"
#include "klemu/jsonio.hpp"
#include "klemu/metrics.hpp"
#include "klemu/parallel.hpp"
#include "klemu/rng.hpp"
#include "klemu/simulators.hpp"
#include "klemu/storage.hpp"
#include "klemu/validation.hpp"
#include "klemu/version.hpp"

namespace {

using klemu::DataError;
using klemu::Index;
using klemu::UsageError;

struct RunConfig {
  std::string simulator = "toy3d";
  std::vector<double> lower;  // empty = use the simulator's input space
  std::vector<double> upper;
  int m = 30;
  int n = 50;
  std::string pathway = "eigvec_interp";
  std::string surrogate = "kriging";
  std::string kernel = "matern52";
  int degree = 3;
  double energy = 1.0;
  int bins = 20;
  double alpha = 0.05;
  int k = 10;
  int repetitions = 100;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all cores
  std::string out;
  std::string test_points;  // CSV path, optional
  int num_test_points = 0;  // used when no CSV is given
};

void apply_config_json(RunConfig& cfg, const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw UsageError("config " + path + ": top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "simulator") cfg.simulator = value.get<std::string>();
    else if (key == "space") {
      cfg.lower = value.at("lower").get<std::vector<double>>();
      cfg.upper = value.at("upper").get<std::vector<double>>();
    } else if (key == "m") cfg.m = value.get<int>();
    else if (key == "n") cfg.n = value.get<int>();
    else if (key == "pathway") cfg.pathway = value.get<std::string>();
    else if (key == "surrogate") cfg.surrogate = value.get<std::string>();
    else if (key == "kernel") cfg.kernel = value.get<std::string>();
    else if (key == "degree") cfg.degree = value.get<int>();
    else if (key == "energy") cfg.energy = value.get<double>();
    else if (key == "bins") cfg.bins = value.get<int>();
    else if (key == "alpha") cfg.alpha = value.get<double>();
    else if (key == "k") cfg.k = value.get<int>();
    else if (key == "repetitions") cfg.repetitions = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "threads") cfg.threads = value.get<int>();
    else if (key == "out") cfg.out = value.get<std::string>();
    else if (key == "test_points") cfg.test_points = value.get<std::string>();
    else if (key == "num_test_points") cfg.num_test_points = value.get<int>();
    else throw UsageError("config " + path + ": unknown key '" + key + "'");
  }
}

klemu::ParameterSpace resolve_space(const RunConfig& cfg) {
  if (!cfg.lower.empty() || !cfg.upper.empty()) {
    if (cfg.lower.size() != cfg.upper.size()) {
      throw UsageError("config space: lower and upper must have the same length");
    }
    klemu::ParameterSpace space;
    space.lower = Eigen::Map<const Eigen::ArrayXd>(cfg.lower.data(),
                                                   static_cast<Index>(cfg.lower.size()));
    space.upper = Eigen::Map<const Eigen::ArrayXd>(cfg.upper.data(),
                                                   static_cast<Index>(cfg.upper.size()));
    space.validate();
    return space;
  }
  return klemu::simulators::make_simulator(cfg.simulator)->input_space();
}

std::filesystem::path resolve_out(const RunConfig& cfg) {
  std::string dir = cfg.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("KLEMU_OUT")) dir = env;
  }
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  return dir;
}

/// The resolved settings recorded in every artifact's provenance.
nlohmann::json effective_config(const RunConfig& cfg, const klemu::ParameterSpace& space) {
  return {{"simulator", cfg.simulator},
          {"space",
           {{"lower", std::vector<double>(space.lower.data(), space.lower.data() + space.dim())},
            {"upper", std::vector<double>(space.upper.data(), space.upper.data() + space.dim())}}},
          {"m", cfg.m},
          {"n", cfg.n},
          {"pathway", cfg.pathway},
          {"surrogate", cfg.surrogate},
          {"kernel", cfg.kernel},
          {"degree", cfg.degree},
          {"energy", cfg.energy},
          {"bins", cfg.bins},
          {"alpha", cfg.alpha},
          {"k", cfg.k},
          {"repetitions", cfg.repetitions},
          {"seed", cfg.seed},
          {"test_points", cfg.test_points},
          {"num_test_points", cfg.num_test_points}};
}

nlohmann::json provenance_for(const RunConfig& cfg, const klemu::ParameterSpace& space) {
  return {{"config", effective_config(cfg, space)}};
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << text;
    if (!out.flush()) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " over " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Test points for predict/report: an explicit CSV wins; otherwise
/// `num_test_points` uniform draws from a stream one SplitMix64 increment
/// past the root seed (so it never collides with the design stream).
Eigen::MatrixXd resolve_test_points(const RunConfig& cfg, const klemu::ParameterSpace& space) {
  if (!cfg.test_points.empty()) {
    Eigen::MatrixXd points = klemu::storage::points_from_csv(read_text(cfg.test_points));
    if (points.cols() != space.dim()) {
      throw DataError("test points: dimension " + std::to_string(points.cols()) +
                      " does not match the parameter space (" + std::to_string(space.dim()) +
                      ")");
    }
    return points;
  }
  if (cfg.num_test_points > 0) {
    klemu::rng::SplitMix64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL);
    Eigen::MatrixXd points(cfg.num_test_points, space.dim());
    for (Index i = 0; i < points.rows(); ++i) {
      for (Index j = 0; j < points.cols(); ++j) {
        const double u = klemu::rng::unit_uniform(rng.next());
        points(i, j) = space.lower[j] + u * (space.upper[j] - space.lower[j]);
      }
    }
    return points;
  }
  throw UsageError("no test points: pass --points <csv> or --num-points <n>");
}

class Timer {
 public:
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// --- commands ---------------------------------------------------------------

void cmd_doe(const RunConfig& cfg) {
  Timer timer;
  const auto space = resolve_space(cfg);
  const auto doe = klemu::design::lhs_sample(space, cfg.m, cfg.seed);
  const auto path = resolve_out(cfg) / "doe.json";
  klemu::storage::save_doe(doe, path, provenance_for(cfg, space));
  std::cout << "[klemu] doe: m=" << cfg.m << " d=" << space.dim() << " -> " << path.string()
            << " (" << timer.ms() << " ms)\n";
}

void cmd_simulate(const RunConfig& cfg) {
  Timer timer;
  const auto out = resolve_out(cfg);
  const auto doe = klemu::storage::load_doe(out / "doe.json");
  const auto sim = klemu::simulators::make_simulator(cfg.simulator);
  const auto seeds = klemu::SeedRegistry::consecutive(cfg.seed, cfg.n);
  const auto tm = klemu::simulators::sample_trajectories(*sim, doe, seeds, cfg.threads);
  const auto path = out / "trajectories.json";
  klemu::storage::save_trajectories(tm, path, provenance_for(cfg, doe.space));
  std::cout << "[klemu] simulate: simulator=" << cfg.simulator << " points=" << tm.points()
            << " replications=" << tm.replications() << " -> " << path.string() << " ("
            << timer.ms() << " ms)\n";
}

void cmd_fit(const RunConfig& cfg) {
  Timer timer;
  const auto out = resolve_out(cfg);
  const auto tm = klemu::storage::load_trajectories(out / "trajectories.json");
  const auto space = resolve_space(cfg);
  const auto pathway = klemu::emulator::pathway_from_string(cfg.pathway);

  klemu::emulator::KLEmulator emu;
  if (pathway == klemu::emulator::Pathway::eigvec_interp) {
    klemu::emulator::PathwayAOptions options;
    options.surrogate = klemu::surrogates::surrogate_kind_from_string(cfg.surrogate);
    options.kernel = klemu::surrogates::kernel_family_from_string(cfg.kernel);
    options.truncation_energy = cfg.energy;
    options.threads = cfg.threads;
    emu = klemu::emulator::fit_pathway_a(tm, options, space);
  } else {
    // The covariance expansion can only be evaluated on its fit-time grid,
    // so fold any intended prediction points into the targets now.
    Eigen::MatrixXd targets = tm.coords;
    if (!cfg.test_points.empty() || cfg.num_test_points > 0) {
      const Eigen::MatrixXd extra = resolve_test_points(cfg, space);
      targets.conservativeResize(tm.coords.rows() + extra.rows(), Eigen::NoChange);
      targets.bottomRows(extra.rows()) = extra;
    }
    klemu::emulator::PathwayBOptions options;
    options.pce_degree = cfg.degree;
    options.mean_surrogate = klemu::surrogates::surrogate_kind_from_string(cfg.surrogate);
    options.kernel = klemu::surrogates::kernel_family_from_string(cfg.kernel);
    emu = klemu::emulator::fit_pathway_b(tm, targets, options, space);
  }

  const auto path = out / "emulator.json";
  klemu::storage::save_emulator(emu, path, provenance_for(cfg, space));
  std::cout << "[klemu] fit: pathway=" << cfg.pathway << " surrogate=" << cfg.surrogate
            << " modes=" << emu.modes() << " -> " << path.string() << " (" << timer.ms()
            << " ms)\n";
}

void cmd_predict(const RunConfig& cfg) {
  Timer timer;
  const auto out = resolve_out(cfg);
  const auto emu = klemu::storage::load_emulator(out / "emulator.json");
  const auto space = emu.space ? *emu.space : resolve_space(cfg);
  const Eigen::MatrixXd points = resolve_test_points(cfg, space);

  Eigen::MatrixXd samples(points.rows(), emu.replications());
  klemu::parallel_for(static_cast<std::size_t>(points.rows()), cfg.threads,
                      [&](std::size_t i) {
                        const auto row = static_cast<Index>(i);
                        samples.row(row) = emu.predict_samples(points.row(row)).transpose();
                      });

  nlohmann::json payload{{"points", klemu::jsonio::matrix_to_json(points)},
                         {"samples", klemu::jsonio::matrix_to_json(samples)},
                         {"seeds", emu.seeds}};
  const auto path = out / "predictions.json";
  klemu::storage::save_envelope(
      klemu::storage::wrap("predictions", std::move(payload), provenance_for(cfg, space)), path);
  std::cout << "[klemu] predict: points=" << points.rows()
            << " replications=" << emu.replications() << " -> " << path.string() << " ("
            << timer.ms() << " ms)\n";
}

void cmd_validate(const RunConfig& cfg) {
  Timer timer;
  const auto out = resolve_out(cfg);
  const auto tm = klemu::storage::load_trajectories(out / "trajectories.json");

  klemu::validation::ValidationPlan plan;
  plan.k = cfg.k;
  plan.repetitions = cfg.repetitions;
  plan.pathway = klemu::emulator::pathway_from_string(cfg.pathway);
  plan.surrogate = klemu::surrogates::surrogate_kind_from_string(cfg.surrogate);
  plan.kernel = klemu::surrogates::kernel_family_from_string(cfg.kernel);
  plan.pce_degree = cfg.degree;
  plan.truncation_energy = cfg.energy;
  plan.bins = cfg.bins;
  plan.alpha = cfg.alpha;

  const auto result = klemu::validation::k_fold_validate(tm, plan, cfg.seed, cfg.threads);

  nlohmann::json reports = nlohmann::json::array();
  for (const auto& row : result.rows) reports.push_back(klemu::storage::report_to_json(row));
  nlohmann::json payload{{"summary", klemu::storage::summary_to_json(result.summary)},
                         {"points", klemu::jsonio::matrix_to_json(result.points)},
                         {"reports", std::move(reports)},
                         {"repetition", result.repetition}};

  const auto space = resolve_space(cfg);
  const auto path = out / "validation.json";
  klemu::storage::save_envelope(
      klemu::storage::wrap("validation", std::move(payload), provenance_for(cfg, space)), path);
  std::cout << "[klemu] validate: k=" << cfg.k << " repetitions=" << cfg.repetitions
            << " rows=" << result.rows.size()
            << " ks_rejection_rate=" << result.summary.ks_rejection_rate << " -> "
            << path.string() << " (" << timer.ms() << " ms)\n";
}

void cmd_report(const RunConfig& cfg) {
  Timer timer;
  const auto out = resolve_out(cfg);
  const auto emu = klemu::storage::load_emulator(out / "emulator.json");
  const auto sim = klemu::simulators::make_simulator(cfg.simulator);
  const auto space = emu.space ? *emu.space : resolve_space(cfg);
  const Eigen::MatrixXd points = resolve_test_points(cfg, space);

  // Reference ensembles reuse the training seeds, so a perfect emulator
  // reproduces them exactly (common random numbers).
  klemu::SeedRegistry registry;
  registry.seeds = emu.seeds;
  klemu::DesignOfExperiments test_doe;
  test_doe.points = points;
  test_doe.space = space;
  const auto reference =
      klemu::simulators::sample_trajectories(*sim, test_doe, registry, cfg.threads);

  const auto count = static_cast<std::size_t>(points.rows());
  std::vector<Eigen::VectorXd> predicted(count), observed(count);
  std::vector<klemu::metrics::MetricReport> reports(count);
  klemu::parallel_for(count, cfg.threads, [&](std::size_t i) {
    const auto row = static_cast<Index>(i);
    predicted[i] = emu.predict_samples(points.row(row));
    observed[i] = reference.values.row(row);
    reports[i] = klemu::metrics::compare(predicted[i], observed[i], cfg.bins, cfg.alpha);
  });
  const auto summary = klemu::validation::summarize(reports);

  nlohmann::json report_rows = nlohmann::json::array();
  for (const auto& row : reports) report_rows.push_back(klemu::storage::report_to_json(row));
  nlohmann::json payload{{"summary", klemu::storage::summary_to_json(summary)},
                         {"points", klemu::jsonio::matrix_to_json(points)},
                         {"reports", std::move(report_rows)}};
  const auto path = out / "report.json";
  klemu::storage::save_envelope(
      klemu::storage::wrap("report", std::move(payload), provenance_for(cfg, space)), path);

  write_text_atomic(klemu::storage::reports_to_csv(points, reports), out / "report_points.csv");
  write_text_atomic(klemu::storage::cdf_pairs_to_csv(predicted, observed),
                    out / "report_cdf_pairs.csv");

  std::ostringstream table;
  table << "metric,mean,std\n";
  const auto line = [&](const char* name, const klemu::validation::MetricStat& s) {
    table << name << ',' << klemu::storage::format_double(s.mean) << ','
          << klemu::storage::format_double(s.stddev) << '\n';
  };
  line("hist_intersection", summary.hist_intersection);
  line("hellinger", summary.hellinger);
  line("js_divergence", summary.js_divergence);
  line("ks_statistic", summary.ks_statistic);
  table << "ks_rejection_rate," << klemu::storage::format_double(summary.ks_rejection_rate)
        << ",\n";
  write_text_atomic(table.str(), out / "report_summary.csv");

  std::cout << "[klemu] report: points=" << points.rows()
            << " hist_intersection_mean=" << summary.hist_intersection.mean << " -> "
            << path.string() << " +3 csv (" << timer.ms() << " ms)\n";
}

int fail(int code, const char* category, const std::string& message) {
  const nlohmann::json line{{"error", {{"category", category}, {"message", message}}}};
  std::cerr << line.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral emulator of stochastic simulators (Karhunen-Loeve pipeline)"};
  app.set_version_flag("--version", std::string(klemu::version));
  app.require_subcommand(1);

  // All options live at the top level and fall through from subcommands, so
  // both `klemu --m 30 doe` and `klemu doe --m 30` work.
  std::string config_path, out_dir, simulator, pathway, surrogate, kernel, points_csv;
  std::uint64_t seed = 0;
  int threads = 0, m = 0, n = 0, degree = 0, bins = 0, k = 0, repetitions = 0, num_points = 0;
  double energy = 0, alpha = 0;

  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  auto* opt_out = app.add_option("--out", out_dir, "output directory (default $KLEMU_OUT or .)");
  auto* opt_seed = app.add_option("--seed", seed, "root RNG seed");
  auto* opt_threads = app.add_option("--threads", threads, "worker thread cap (0 = all cores)");
  auto* opt_sim = app.add_option("--simulator", simulator, "simulator id (toy3d, sine_gaussian_1d)");
  auto* opt_m = app.add_option("--m", m, "number of design points");
  auto* opt_n = app.add_option("--n", n, "replications per design point");
  auto* opt_pathway = app.add_option("--pathway", pathway, "eigvec_interp or cov_surrogate");
  auto* opt_surrogate = app.add_option("--surrogate", surrogate, "kriging or rbf_linear");
  auto* opt_kernel =
      app.add_option("--kernel", kernel, "gaussian, exponential, matern32, matern52");
  auto* opt_degree = app.add_option("--degree", degree, "polynomial chaos total degree");
  auto* opt_energy = app.add_option("--energy", energy, "spectral energy kept by truncation");
  auto* opt_bins = app.add_option("--bins", bins, "histogram bins for metrics");
  auto* opt_alpha = app.add_option("--alpha", alpha, "KS test significance level");
  auto* opt_k = app.add_option("--k", k, "cross-validation folds");
  auto* opt_reps = app.add_option("--repetitions", repetitions, "cross-validation repetitions");
  auto* opt_points = app.add_option("--points", points_csv, "test points CSV path");
  auto* opt_num_points =
      app.add_option("--num-points", num_points, "generate this many uniform test points");

  auto* sub_doe = app.add_subcommand("doe", "generate a Latin hypercube design");
  auto* sub_simulate = app.add_subcommand("simulate", "run frozen-seed trajectories on the design");
  auto* sub_fit = app.add_subcommand("fit", "fit the spectral emulator to the trajectories");
  auto* sub_predict = app.add_subcommand("predict", "emulate ensembles at test points");
  auto* sub_validate = app.add_subcommand("validate", "repeated k-fold cross-validation");
  auto* sub_report = app.add_subcommand("report", "score the emulator against fresh paired runs");
  for (auto* sub : {sub_doe, sub_simulate, sub_fit, sub_predict, sub_validate, sub_report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    return fail(1, "usage", e.what());
  }

  try {
    RunConfig cfg;
    if (opt_config->count()) {
      apply_config_json(cfg, klemu::storage::load_file(config_path), config_path);
    }
    if (opt_out->count()) cfg.out = out_dir;
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_threads->count()) cfg.threads = threads;
    if (opt_sim->count()) cfg.simulator = simulator;
    if (opt_m->count()) cfg.m = m;
    if (opt_n->count()) cfg.n = n;
    if (opt_pathway->count()) cfg.pathway = pathway;
    if (opt_surrogate->count()) cfg.surrogate = surrogate;
    if (opt_kernel->count()) cfg.kernel = kernel;
    if (opt_degree->count()) cfg.degree = degree;
    if (opt_energy->count()) cfg.energy = energy;
    if (opt_bins->count()) cfg.bins = bins;
    if (opt_alpha->count()) cfg.alpha = alpha;
    if (opt_k->count()) cfg.k = k;
    if (opt_reps->count()) cfg.repetitions = repetitions;
    if (opt_points->count()) cfg.test_points = points_csv;
    if (opt_num_points->count()) cfg.num_test_points = num_points;

    if (app.got_subcommand(sub_doe)) cmd_doe(cfg);
    else if (app.got_subcommand(sub_simulate)) cmd_simulate(cfg);
    else if (app.got_subcommand(sub_fit)) cmd_fit(cfg);
    else if (app.got_subcommand(sub_predict)) cmd_predict(cfg);
    else if (app.got_subcommand(sub_validate)) cmd_validate(cfg);
    else if (app.got_subcommand(sub_report)) cmd_report(cfg);
    return 0;
  } catch (const UsageError& e) {
    return fail(1, "usage", e.what());
  } catch (const DataError& e) {
    return fail(2, "data", e.what());
  } catch (const klemu::NumericalError& e) {
    return fail(3, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(3, "internal", e.what());
  }
}
