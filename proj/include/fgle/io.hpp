#pragma once

// CSV and JSON output. Numbers are written with 17 significant digits so that
// reruns can be compared byte for byte.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgle/fbm.hpp"
#include "fgle/harness.hpp"
#include "fgle/solver.hpp"

namespace fgle {

/// printf("%.17g") with "nan"/"inf" spelled out.
std::string format_number(double value);

/// Writes text, creating parent directories. Throws Error on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Columns path, index, t, value: one block per path, each of length steps+1.
std::string fbm_csv(const std::vector<std::vector<double>>& paths, double step);

/// Columns path, index, t, x[, y] for trajectories sharing one grid.
std::string trajectories_csv(const std::vector<Trajectory>& trajectories);

/// Columns path, index, t, G[, G_y].
std::string noise_csv(const std::vector<GPath>& noise);

/// Columns path_id, t, x[, y] from states[path][time][dim].
std::string snapshots_csv(std::span<const double> states, std::size_t paths, std::span<const double> times,
                          std::size_t dims);

/// Columns H, scheme, k, rms_error, sup_error, n_paths, seed; rms_error is
/// taken at the final time.
std::string error_table_csv(const ConvergenceResult& result);

/// Columns t, bin indices, bin centres, mass[, gibbs_mass] for each snapshot.
std::string histograms_csv(const ErgodicityResult& result);

/// Columns t, msd, msd_stderr, var..., l1_gibbs, asymmetry.
std::string moments_csv(const ErgodicityResult& result);

/// Manifest written next to every run's outputs: tool version, subcommand,
/// master seed, the effective config and the files produced. Feeding it back
/// with --config reproduces the run.
nlohmann::json make_manifest(const std::string& subcommand, std::uint64_t seed, const nlohmann::json& config,
                             const std::vector<std::string>& outputs);

const char* tool_version() noexcept;

}  // namespace fgle
