#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "klemu/emulator.hpp"
#include "klemu/empirical.hpp"
#include "klemu/metrics.hpp"
#include "klemu/types.hpp"
#include "klemu/validation.hpp"

namespace klemu::storage {

inline constexpr int format_version = 1;

/// Every artifact file is one JSON envelope:
///   { kind, format_version, payload, provenance, checksum }
/// with checksum = FNV-1a 64 (hex) of the serialized payload, and provenance
/// carrying the creation timestamp, library version, and caller-supplied
/// context (input hashes, effective configuration).
nlohmann::json wrap(const std::string& kind, nlohmann::json payload,
                    nlohmann::json provenance_extra = nlohmann::json::object());

/// Validate an envelope (kind match, supported version, checksum) and return
/// its payload. Violations are typed DataErrors naming what went wrong.
nlohmann::json unwrap(const nlohmann::json& envelope, const std::string& kind);

/// Atomic write: serialize to a sibling temp file, then rename over path.
void save_envelope(const nlohmann::json& envelope, const std::filesystem::path& path);

/// Read and parse a JSON file (I/O and parse failures -> DataError).
nlohmann::json load_file(const std::filesystem::path& path);

// --- typed artifact round trips ------------------------------------------

void save_doe(const DesignOfExperiments& doe, const std::filesystem::path& path,
              nlohmann::json provenance_extra = nlohmann::json::object());
DesignOfExperiments load_doe(const std::filesystem::path& path);

void save_seed_registry(const SeedRegistry& seeds, const std::filesystem::path& path,
                        nlohmann::json provenance_extra = nlohmann::json::object());
SeedRegistry load_seed_registry(const std::filesystem::path& path);

void save_trajectories(const TrajectoryMatrix& tm, const std::filesystem::path& path,
                       nlohmann::json provenance_extra = nlohmann::json::object());
TrajectoryMatrix load_trajectories(const std::filesystem::path& path);

/// The spectral basis together with the coordinates and mean it was built
/// from; the payload records the covariance normalization convention.
struct BasisArtifact {
  empirical::KLBasis basis;
  Eigen::MatrixXd coords;
  Eigen::VectorXd mean;
};

void save_basis(const BasisArtifact& artifact, const std::filesystem::path& path,
                nlohmann::json provenance_extra = nlohmann::json::object());
BasisArtifact load_basis(const std::filesystem::path& path);

void save_emulator(const emulator::KLEmulator& emu, const std::filesystem::path& path,
                   nlohmann::json provenance_extra = nlohmann::json::object());
emulator::KLEmulator load_emulator(const std::filesystem::path& path);

// --- JSON fragments shared by artifacts and the CLI -----------------------

nlohmann::json report_to_json(const metrics::MetricReport& report);
metrics::MetricReport report_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const validation::ValidationSummary& summary);

// --- human-facing CSV ------------------------------------------------------

/// Header x1,...,xd then one full-precision row per design point.
std::string doe_to_csv(const DesignOfExperiments& doe);
/// Inverse of doe_to_csv; the parameter space is supplied by the caller
/// (CSV carries only coordinates).
DesignOfExperiments doe_from_csv(const std::string& csv, const ParameterSpace& space);

/// Coordinates then one `seed_<s>` column per trajectory.
std::string trajectories_to_csv(const TrajectoryMatrix& tm);
/// Companion metadata: dims, point/replication counts, seeds, simulator id.
nlohmann::json trajectories_sidecar(const TrajectoryMatrix& tm);

/// x1,...,xd,hist_int,hellinger,jsd,ks_stat,ks_reject — one row per report.
std::string reports_to_csv(const Eigen::MatrixXd& points,
                           const std::vector<metrics::MetricReport>& reports);

/// Step-function CDF pairs for plotting: point_index,value,cdf_predicted,
/// cdf_reference over the merged sample values of each point.
std::string cdf_pairs_to_csv(const std::vector<Eigen::VectorXd>& predicted,
                             const std::vector<Eigen::VectorXd>& reference);

/// Full-precision decimal (round-trips doubles exactly).
std::string format_double(double v);

/// Points-only CSV (same shape as doe_to_csv) parsed into a bare matrix.
Eigen::MatrixXd points_from_csv(const std::string& csv);
std::string points_to_csv(const Eigen::MatrixXd& points);

}  // namespace klemu::storage
