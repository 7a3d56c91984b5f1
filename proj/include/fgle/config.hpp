#pragma once

// Run configuration for the command-line tool. Each subcommand reads a JSON
// object whose keys mirror its parameters; values in the file replace the
// ones already present in the struct, so callers fill the struct from
// defaults and flags first. Unknown keys and wrongly typed values throw
// ConfigError naming the field.
//
//   soe:         alpha, eps, delta, T, node_budget
//   fbm:         N, k, H, n_paths, seed
//   solve:       problem {force, params}, H, alpha_override, x0, k, T,
//                n_paths, scheme, eps, noise ("physical" | "none"), seed
//   converge:    H, k, k_ref, T, n_paths, scheme, eps, x0, seed, chunk
//   ergodicity:  problem, H, x0, k, T, n_paths, scheme, eps, snapshots,
//                bins, box {lo, hi}, tail_start, seed, chunk
//
// A manifest written by a previous run is also accepted: its "config" member
// is used and its "subcommand" must match.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgle/harness.hpp"

namespace fgle {

struct SoeRunConfig {
  double alpha = 0.4;
  double eps = 1e-9;
  double delta = 0x1p-11;
  double horizon = 1.0;
  std::size_t node_budget = 512;

  void validate() const;
};

struct FbmRunConfig {
  std::size_t steps = 1024;
  double step = 0x1p-10;
  double hurst = 0.75;
  std::size_t paths = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SolveRunConfig {
  std::string force = "harmonic";
  std::vector<double> force_params;
  double hurst = 0.75;
  /// Replaces alpha = 2 - 2H; only allowed with noise = "none".
  std::optional<double> alpha_override;
  std::vector<double> x0{1.0};
  double step = 0x1p-8;
  double horizon = 1.0;
  std::size_t paths = 1;
  Scheme scheme = Scheme::direct;
  /// SOE tolerance; 0 selects k^{min(3/2-H, 3-3H)}.
  double eps = 0.0;
  bool physical_noise = true;
  std::uint64_t seed = 1;

  void validate() const;
  FgleProblem problem() const;
};

/// Reads and parses a JSON file. Syntax errors become ConfigError with the
/// line and column.
nlohmann::json load_config_file(const std::filesystem::path& path, const std::string& subcommand);

void apply_config(const nlohmann::json& doc, SoeRunConfig& config);
void apply_config(const nlohmann::json& doc, FbmRunConfig& config);
void apply_config(const nlohmann::json& doc, SolveRunConfig& config);
void apply_config(const nlohmann::json& doc, ConvergenceConfig& config);
void apply_config(const nlohmann::json& doc, ErgodicityConfig& config);

nlohmann::json to_json(const SoeRunConfig& config);
nlohmann::json to_json(const FbmRunConfig& config);
nlohmann::json to_json(const SolveRunConfig& config);

Scheme parse_scheme(const std::string& name, const std::string& field);
SchemeSelection parse_scheme_selection(const std::string& name, const std::string& field);

}  // namespace fgle
