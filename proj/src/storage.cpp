#include "klemu/storage.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "klemu/jsonio.hpp"
#include "klemu/version.hpp"

namespace klemu::storage {

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::string payload_checksum(const nlohmann::json& payload) {
  return codec::fnv1a64_hex(payload.dump());
}

}  // namespace

nlohmann::json wrap(const std::string& kind, nlohmann::json payload,
                    nlohmann::json provenance_extra) {
  nlohmann::json provenance = std::move(provenance_extra);
  provenance["created_at"] = iso_timestamp();
  provenance["library_version"] = version;
  return {{"kind", kind},
          {"format_version", format_version},
          {"checksum", payload_checksum(payload)},
          {"provenance", std::move(provenance)},
          {"payload", std::move(payload)}};
}

nlohmann::json unwrap(const nlohmann::json& envelope, const std::string& kind) {
  if (!envelope.is_object() || !envelope.contains("kind") ||
      !envelope.contains("format_version") || !envelope.contains("payload") ||
      !envelope.contains("checksum")) {
    throw DataError("artifact envelope: missing required fields");
  }
  const auto found_kind = envelope.at("kind").get<std::string>();
  if (found_kind != kind) {
    throw DataError("artifact envelope: expected kind '" + kind + "', found '" + found_kind +
                    "'");
  }
  const auto found_version = envelope.at("format_version").get<int>();
  if (found_version != format_version) {
    throw DataError("artifact envelope: format version " + std::to_string(found_version) +
                    " is unsupported (this build reads version " +
                    std::to_string(format_version) + ")");
  }
  const auto& payload = envelope.at("payload");
  if (payload_checksum(payload) != envelope.at("checksum").get<std::string>()) {
    throw DataError("artifact envelope: checksum mismatch (corrupt or truncated payload)");
  }
  return payload;
}

void save_envelope(const nlohmann::json& envelope, const std::filesystem::path& path) {
  const std::filesystem::path tmp =
      path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << envelope.dump(2) << '\n';
    if (!out.flush()) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move " + tmp.string() + " over " + path.string() + ": " +
                    ec.message());
  }
}

nlohmann::json load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("invalid JSON in " + path.string());
  return j;
}

// --- typed artifacts --------------------------------------------------------

void save_doe(const DesignOfExperiments& doe, const std::filesystem::path& path,
              nlohmann::json provenance_extra) {
  nlohmann::json payload{{"points", jsonio::matrix_to_json(doe.points)},
                         {"space",
                          {{"lower", jsonio::vector_to_json(doe.space.lower.matrix())},
                           {"upper", jsonio::vector_to_json(doe.space.upper.matrix())}}}};
  save_envelope(wrap("doe", std::move(payload), std::move(provenance_extra)), path);
}

DesignOfExperiments load_doe(const std::filesystem::path& path) {
  const auto payload = unwrap(load_file(path), "doe");
  DesignOfExperiments doe;
  doe.points = jsonio::matrix_from_json(payload.at("points"));
  doe.space.lower = jsonio::vector_from_json(payload.at("space").at("lower")).array();
  doe.space.upper = jsonio::vector_from_json(payload.at("space").at("upper")).array();
  doe.space.validate();
  return doe;
}

void save_seed_registry(const SeedRegistry& seeds, const std::filesystem::path& path,
                        nlohmann::json provenance_extra) {
  save_envelope(
      wrap("seed_registry", {{"seeds", seeds.seeds}}, std::move(provenance_extra)), path);
}

SeedRegistry load_seed_registry(const std::filesystem::path& path) {
  const auto payload = unwrap(load_file(path), "seed_registry");
  SeedRegistry r;
  r.seeds = payload.at("seeds").get<std::vector<std::uint64_t>>();
  r.validate();
  return r;
}

void save_trajectories(const TrajectoryMatrix& tm, const std::filesystem::path& path,
                       nlohmann::json provenance_extra) {
  nlohmann::json payload{{"values", jsonio::matrix_to_json(tm.values)},
                         {"coords", jsonio::matrix_to_json(tm.coords)},
                         {"seeds", tm.seeds},
                         {"simulator_id", tm.simulator_id}};
  save_envelope(wrap("trajectories", std::move(payload), std::move(provenance_extra)), path);
}

TrajectoryMatrix load_trajectories(const std::filesystem::path& path) {
  const auto payload = unwrap(load_file(path), "trajectories");
  TrajectoryMatrix tm;
  tm.values = jsonio::matrix_from_json(payload.at("values"));
  tm.coords = jsonio::matrix_from_json(payload.at("coords"));
  tm.seeds = payload.at("seeds").get<std::vector<std::uint64_t>>();
  tm.simulator_id = payload.at("simulator_id").get<std::string>();
  tm.validate();
  return tm;
}

void save_basis(const BasisArtifact& artifact, const std::filesystem::path& path,
                nlohmann::json provenance_extra) {
  nlohmann::json payload{{"eigenvalues", jsonio::vector_to_json(artifact.basis.eigenvalues)},
                         {"eigenvectors", jsonio::matrix_to_json(artifact.basis.eigenvectors)},
                         {"xi", jsonio::matrix_to_json(artifact.basis.xi)},
                         {"truncation", artifact.basis.truncation},
                         {"coords", jsonio::matrix_to_json(artifact.coords)},
                         {"mean", jsonio::vector_to_json(artifact.mean)},
                         {"cov_norm", "1/N"}};
  save_envelope(wrap("kl_basis", std::move(payload), std::move(provenance_extra)), path);
}

BasisArtifact load_basis(const std::filesystem::path& path) {
  const auto payload = unwrap(load_file(path), "kl_basis");
  if (payload.at("cov_norm").get<std::string>() != "1/N") {
    throw DataError("kl_basis: unsupported covariance normalization tag");
  }
  BasisArtifact artifact;
  artifact.basis.eigenvalues = jsonio::vector_from_json(payload.at("eigenvalues"));
  artifact.basis.eigenvectors = jsonio::matrix_from_json(payload.at("eigenvectors"));
  artifact.basis.xi = jsonio::matrix_from_json(payload.at("xi"));
  artifact.basis.truncation = payload.at("truncation").get<Index>();
  artifact.coords = jsonio::matrix_from_json(payload.at("coords"));
  artifact.mean = jsonio::vector_from_json(payload.at("mean"));
  return artifact;
}

void save_emulator(const emulator::KLEmulator& emu, const std::filesystem::path& path,
                   nlohmann::json provenance_extra) {
  save_envelope(wrap("emulator", emu.to_json(), std::move(provenance_extra)), path);
}

emulator::KLEmulator load_emulator(const std::filesystem::path& path) {
  return emulator::KLEmulator::from_json(unwrap(load_file(path), "emulator"));
}

// --- report fragments -------------------------------------------------------

nlohmann::json report_to_json(const metrics::MetricReport& report) {
  return {{"hist_intersection", report.hist_intersection},
          {"hellinger", report.hellinger},
          {"js_divergence", report.js_divergence},
          {"ks_statistic", report.ks_statistic},
          {"ks_reject", report.ks_reject},
          {"bins", report.bins},
          {"alpha", report.alpha}};
}

metrics::MetricReport report_from_json(const nlohmann::json& j) {
  metrics::MetricReport r;
  r.hist_intersection = j.at("hist_intersection").get<double>();
  r.hellinger = j.at("hellinger").get<double>();
  r.js_divergence = j.at("js_divergence").get<double>();
  r.ks_statistic = j.at("ks_statistic").get<double>();
  r.ks_reject = j.at("ks_reject").get<bool>();
  r.bins = j.at("bins").get<int>();
  r.alpha = j.at("alpha").get<double>();
  return r;
}

nlohmann::json summary_to_json(const validation::ValidationSummary& summary) {
  const auto stat = [](const validation::MetricStat& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}};
  };
  return {{"hist_intersection", stat(summary.hist_intersection)},
          {"hellinger", stat(summary.hellinger)},
          {"js_divergence", stat(summary.js_divergence)},
          {"ks_statistic", stat(summary.ks_statistic)},
          {"ks_rejection_rate", summary.ks_rejection_rate},
          {"reports", summary.reports}};
}

// --- CSV ---------------------------------------------------------------------

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string points_to_csv(const Eigen::MatrixXd& points) {
  std::ostringstream out;
  for (Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << '\n';
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j) {
      out << (j ? "," : "") << format_double(points(i, j));
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Eigen::MatrixXd points_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw DataError("points CSV: empty input");
  const auto header = split_csv_line(line);
  const auto d = static_cast<Index>(header.size());
  if (d < 1) throw DataError("points CSV: empty header");

  std::vector<Eigen::VectorXd> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != d) {
      throw DataError("points CSV: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(d));
    }
    Eigen::VectorXd row(d);
    for (Index j = 0; j < d; ++j) {
      std::size_t consumed = 0;
      try {
        row[j] = std::stod(fields[static_cast<std::size_t>(j)], &consumed);
      } catch (const std::exception&) {
        throw DataError("points CSV: bad number at line " + std::to_string(line_no));
      }
      if (consumed != fields[static_cast<std::size_t>(j)].size()) {
        throw DataError("points CSV: trailing characters at line " + std::to_string(line_no));
      }
    }
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd points(static_cast<Index>(rows.size()), d);
  for (Index i = 0; i < points.rows(); ++i) points.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  return points;
}

std::string doe_to_csv(const DesignOfExperiments& doe) { return points_to_csv(doe.points); }

DesignOfExperiments doe_from_csv(const std::string& csv, const ParameterSpace& space) {
  DesignOfExperiments doe;
  doe.points = points_from_csv(csv);
  doe.space = space;
  if (doe.points.cols() != space.dim()) {
    throw DataError("doe_from_csv: CSV dimension does not match the parameter space");
  }
  return doe;
}

std::string trajectories_to_csv(const TrajectoryMatrix& tm) {
  std::ostringstream out;
  for (Index j = 0; j < tm.coords.cols(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  for (const auto seed : tm.seeds) out << ",seed_" << seed;
  out << '\n';
  for (Index i = 0; i < tm.values.rows(); ++i) {
    for (Index j = 0; j < tm.coords.cols(); ++j) {
      out << (j ? "," : "") << format_double(tm.coords(i, j));
    }
    for (Index k = 0; k < tm.values.cols(); ++k) out << ',' << format_double(tm.values(i, k));
    out << '\n';
  }
  return out.str();
}

nlohmann::json trajectories_sidecar(const TrajectoryMatrix& tm) {
  return {{"dims", tm.coords.cols()},
          {"points", tm.points()},
          {"replications", tm.replications()},
          {"seeds", tm.seeds},
          {"simulator_id", tm.simulator_id}};
}

std::string reports_to_csv(const Eigen::MatrixXd& points,
                           const std::vector<metrics::MetricReport>& reports) {
  if (points.rows() != static_cast<Index>(reports.size())) {
    throw DataError("reports_to_csv: points/reports count mismatch");
  }
  std::ostringstream out;
  for (Index j = 0; j < points.cols(); ++j) out << "x" << (j + 1) << ',';
  out << "hist_int,hellinger,jsd,ks_stat,ks_reject\n";
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j) out << format_double(points(i, j)) << ',';
    const auto& r = reports[static_cast<std::size_t>(i)];
    out << format_double(r.hist_intersection) << ',' << format_double(r.hellinger) << ','
        << format_double(r.js_divergence) << ',' << format_double(r.ks_statistic) << ','
        << (r.ks_reject ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string cdf_pairs_to_csv(const std::vector<Eigen::VectorXd>& predicted,
                             const std::vector<Eigen::VectorXd>& reference) {
  if (predicted.size() != reference.size()) {
    throw DataError("cdf_pairs_to_csv: sample list length mismatch");
  }
  std::ostringstream out;
  out << "point_index,value,cdf_predicted,cdf_reference\n";
  for (std::size_t idx = 0; idx < predicted.size(); ++idx) {
    std::vector<double> a(predicted[idx].data(), predicted[idx].data() + predicted[idx].size());
    std::vector<double> b(reference[idx].data(), reference[idx].data() + reference[idx].size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> merged;
    merged.reserve(a.size() + b.size());
    merged.insert(merged.end(), a.begin(), a.end());
    merged.insert(merged.end(), b.begin(), b.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    for (const double v : merged) {
      const auto fa = std::upper_bound(a.begin(), a.end(), v) - a.begin();
      const auto fb = std::upper_bound(b.begin(), b.end(), v) - b.begin();
      out << idx << ',' << format_double(v) << ','
          << format_double(static_cast<double>(fa) / static_cast<double>(a.size())) << ','
          << format_double(static_cast<double>(fb) / static_cast<double>(b.size())) << '\n';
    }
  }
  return out.str();
}

}  // namespace klemu::storage
