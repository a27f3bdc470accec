#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "klemu/codec.hpp"
#include "klemu/design.hpp"
#include "klemu/simulators.hpp"
#include "klemu/storage.hpp"

using klemu::DataError;
using klemu::DesignOfExperiments;
using klemu::Index;
using klemu::ParameterSpace;
using klemu::SeedRegistry;
using klemu::TrajectoryMatrix;
namespace fs = std::filesystem;
namespace st = klemu::storage;

namespace {

// Fresh per-test scratch directory, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("klemu_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

TrajectoryMatrix toy_table(Index m, Index n, std::uint64_t design_seed) {
  klemu::simulators::ToyProcess3D sim;
  const auto doe = klemu::design::lhs_sample(sim.input_space(), m, design_seed);
  return klemu::simulators::sample_trajectories(sim, doe, SeedRegistry::consecutive(1, n));
}

}  // namespace

TEST_CASE("envelope wrap/unwrap round trip with provenance") {
  const nlohmann::json payload = {{"alpha", 0.05}, {"values", {1.0, 2.0, 3.0}}};
  const auto env = st::wrap("demo", payload, {{"note", "context"}});

  CHECK(env.at("kind") == "demo");
  CHECK(env.at("format_version") == st::format_version);
  CHECK(env.at("provenance").contains("created_at"));
  CHECK(env.at("provenance").contains("library_version"));
  CHECK(env.at("provenance").at("note") == "context");

  const auto back = st::unwrap(env, "demo");
  CHECK(back == payload);
}

TEST_CASE("unwrap rejects tampering and mismatches") {
  const auto env = st::wrap("demo", {{"x", 1}});

  auto tampered = env;
  tampered["payload"]["x"] = 2;
  CHECK_THROWS_WITH_AS(st::unwrap(tampered, "demo"), doctest::Contains("corrupt"), DataError);

  auto wrong_version = env;
  wrong_version["format_version"] = 999;
  CHECK_THROWS_WITH_AS(st::unwrap(wrong_version, "demo"), doctest::Contains("999"), DataError);
  try {
    st::unwrap(wrong_version, "demo");
  } catch (const DataError& e) {
    // The message names the version this build reads as well.
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }

  CHECK_THROWS_WITH_AS(st::unwrap(env, "other"), doctest::Contains("other"), DataError);

  auto missing = env;
  missing.erase("checksum");
  CHECK_THROWS_AS(st::unwrap(missing, "demo"), DataError);
}

TEST_CASE("save_envelope writes atomically and load_file reports failures") {
  TempDir tmp;
  const auto path = tmp.path / "artifact.json";
  const auto env = st::wrap("demo", {{"x", 42}});
  st::save_envelope(env, path);

  const auto loaded = st::load_file(path);
  CHECK(st::unwrap(loaded, "demo").at("x") == 42);

  // No temp files left behind.
  int entries = 0;
  for (const auto& _ : fs::directory_iterator(tmp.path)) {
    (void)_;
    ++entries;
  }
  CHECK(entries == 1);

  CHECK_THROWS_AS(st::load_file(tmp.path / "absent.json"), DataError);

  std::ofstream(tmp.path / "garbage.json") << "{not json";
  CHECK_THROWS_AS(st::load_file(tmp.path / "garbage.json"), DataError);
}

TEST_CASE("design-of-experiments artifact round trip") {
  TempDir tmp;
  const auto doe =
      klemu::design::lhs_sample(ParameterSpace::cube(0.0, 2.0, 3), 9, 31);
  const auto path = tmp.path / "doe.json";
  st::save_doe(doe, path, {{"design_seed", 31}});

  const auto back = st::load_doe(path);
  CHECK(back.points == doe.points);  // bit-exact
  CHECK((back.space.lower == doe.space.lower).all());
  CHECK((back.space.upper == doe.space.upper).all());

  // Provenance extras are preserved in the envelope.
  CHECK(st::load_file(path).at("provenance").at("design_seed") == 31);
}

TEST_CASE("seed registry artifact round trip and validation on load") {
  TempDir tmp;
  const auto reg = SeedRegistry::consecutive(1000, 16);
  const auto path = tmp.path / "seeds.json";
  st::save_seed_registry(reg, path);
  CHECK(st::load_seed_registry(path).seeds == reg.seeds);

  // A duplicated seed list is rejected at load time.
  auto env = st::load_file(path);
  env["payload"]["seeds"][1] = env["payload"]["seeds"][0];
  env["checksum"] = klemu::codec::fnv1a64_hex(env["payload"].dump());
  st::save_envelope(env, path);
  CHECK_THROWS_AS(st::load_seed_registry(path), DataError);
}

TEST_CASE("trajectory artifact round trip") {
  TempDir tmp;
  const auto tm = toy_table(6, 9, 17);
  const auto path = tmp.path / "trajectories.json";
  st::save_trajectories(tm, path);

  const auto back = st::load_trajectories(path);
  CHECK(back.values == tm.values);  // bit-exact
  CHECK(back.coords == tm.coords);
  CHECK(back.seeds == tm.seeds);
  CHECK(back.simulator_id == tm.simulator_id);
}

TEST_CASE("basis artifact round trip pins the covariance convention") {
  TempDir tmp;
  const auto tm = toy_table(6, 9, 23);
  const auto cd = klemu::empirical::center(tm);

  st::BasisArtifact art;
  art.basis = klemu::empirical::build_basis(cd);
  art.coords = tm.coords;
  art.mean = cd.mean;
  const auto path = tmp.path / "basis.json";
  st::save_basis(art, path);

  const auto back = st::load_basis(path);
  CHECK(back.basis.eigenvalues == art.basis.eigenvalues);
  CHECK(back.basis.eigenvectors == art.basis.eigenvectors);
  CHECK(back.basis.xi == art.basis.xi);
  CHECK(back.basis.truncation == art.basis.truncation);
  CHECK(back.coords == art.coords);
  CHECK(back.mean == art.mean);

  // A foreign normalization tag is rejected: silently mixing conventions
  // would corrupt every downstream variance.
  auto env = st::load_file(path);
  env["payload"]["cov_norm"] = "1/(N-1)";
  env["checksum"] = klemu::codec::fnv1a64_hex(env["payload"].dump());
  st::save_envelope(env, path);
  CHECK_THROWS_AS(st::load_basis(path), DataError);
}

TEST_CASE("emulator artifact re-predicts bit-exactly") {
  TempDir tmp;
  const auto tm = toy_table(8, 12, 29);
  klemu::emulator::PathwayAOptions opt;
  opt.surrogate = klemu::surrogates::SurrogateKind::kriging;
  const auto emu = klemu::emulator::fit_pathway_a(tm, opt, ParameterSpace::cube(0.0, 2.0, 3));

  const auto path = tmp.path / "emulator.json";
  st::save_emulator(emu, path, {{"m", 8}, {"n", 12}});
  const auto back = st::load_emulator(path);

  Eigen::VectorXd x(3);
  x << 0.3, 1.2, 1.9;
  CHECK(back.predict_samples(x) == emu.predict_samples(x));  // bit-exact
  CHECK(back.seeds == emu.seeds);
  CHECK(back.modes() == emu.modes());
  REQUIRE(back.space.has_value());
}

TEST_CASE("report and summary JSON fragments") {
  klemu::metrics::MetricReport r;
  r.hist_intersection = 0.9375;
  r.hellinger = 0.0625;
  r.js_divergence = 0.03125;
  r.ks_statistic = 0.125;
  r.ks_reject = true;
  r.bins = 20;
  r.alpha = 0.05;

  const auto j = st::report_to_json(r);
  const auto back = st::report_from_json(j);
  CHECK(back.hist_intersection == r.hist_intersection);
  CHECK(back.hellinger == r.hellinger);
  CHECK(back.js_divergence == r.js_divergence);
  CHECK(back.ks_statistic == r.ks_statistic);
  CHECK(back.ks_reject == r.ks_reject);
  CHECK(back.bins == r.bins);
  CHECK(back.alpha == r.alpha);

  const auto summary = klemu::validation::summarize({r, r});
  const auto js = st::summary_to_json(summary);
  CHECK(js.at("reports") == 2);
  CHECK(js.at("hist_intersection").at("mean") == 0.9375);
  CHECK(js.at("hist_intersection").at("std") == 0.0);
  CHECK(js.at("ks_rejection_rate") == 1.0);
}

TEST_CASE("points CSV round trip preserves doubles exactly") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, -0.0, 1.0 / 3.0, 1e-300, -1.7976931348623157e308, 42.0;

  const std::string csv = st::points_to_csv(pts);
  CHECK(csv.rfind("x1,x2\n", 0) == 0);  // header first

  const Eigen::MatrixXd back = st::points_from_csv(csv);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(back(i, j) == pts(i, j));  // bit-exact
  CHECK(std::signbit(back(0, 1)));  // -0.0 survives

  // 17 significant digits, trailing zeros trimmed.
  CHECK(st::format_double(0.5) == "0.5");
  CHECK(st::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("points CSV rejects malformed input with line numbers") {
  CHECK_THROWS_WITH_AS(st::points_from_csv("x1,x2\n1.0\n"), doctest::Contains("line 2"),
                       DataError);
  CHECK_THROWS_WITH_AS(st::points_from_csv("x1,x2\n1.0,abc\n"), doctest::Contains("line 2"),
                       DataError);
  CHECK_THROWS_AS(st::points_from_csv(""), DataError);
}

TEST_CASE("doe CSV round trip checks the space dimension") {
  const auto doe = klemu::design::lhs_sample(ParameterSpace::cube(0.0, 2.0, 2), 5, 3);
  const std::string csv = st::doe_to_csv(doe);
  const auto back = st::doe_from_csv(csv, doe.space);
  CHECK(back.points == doe.points);

  CHECK_THROWS_AS(st::doe_from_csv(csv, ParameterSpace::cube(0.0, 2.0, 3)), DataError);
}

TEST_CASE("trajectory CSV carries one seed column per replication") {
  const auto tm = toy_table(4, 3, 37);
  const std::string csv = st::trajectories_to_csv(tm);

  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "x1,x2,x3,seed_" + std::to_string(tm.seeds[0]) + ",seed_" +
            std::to_string(tm.seeds[1]) + ",seed_" + std::to_string(tm.seeds[2]));

  // One line per point plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const auto sidecar = st::trajectories_sidecar(tm);
  CHECK(sidecar.at("dims") == 3);
  CHECK(sidecar.at("points") == 4);
  CHECK(sidecar.at("replications") == 3);
  CHECK(sidecar.at("simulator_id") == "toy3d");
  CHECK(sidecar.at("seeds").size() == 3);
}

TEST_CASE("report CSV layout") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.0, 1.0, 2.0, 3.0;
  klemu::metrics::MetricReport a, b;
  a.hist_intersection = 1.0;
  a.ks_reject = false;
  b.hist_intersection = 0.5;
  b.ks_statistic = 0.75;
  b.ks_reject = true;

  const std::string csv = st::reports_to_csv(pts, {a, b});
  CHECK(csv.rfind("x1,x2,hist_int,hellinger,jsd,ks_stat,ks_reject\n", 0) == 0);
  CHECK(csv.find(",1\n") != std::string::npos);   // reject encoded as 1
  CHECK(csv.find(",0\n") != std::string::npos);   // and 0
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("cdf pair CSV walks the merged sample values") {
  Eigen::VectorXd pred(3), ref(3);
  pred << 1.0, 2.0, 3.0;
  ref << 2.0, 3.0, 4.0;
  const std::string csv = st::cdf_pairs_to_csv({pred}, {ref});

  CHECK(csv.rfind("point_index,value,cdf_predicted,cdf_reference\n", 0) == 0);
  // Merged distinct values 1,2,3,4 -> four rows after the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  // At value 4 both CDFs have reached their final mass.
  CHECK(csv.find("0,4,1,1") != std::string::npos);
  // At value 1 the predicted CDF is 1/3, the reference still 0.
  CHECK(csv.find("0,1,0.33333333333333331,0") != std::string::npos);
}
