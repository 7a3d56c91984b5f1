// fgle: command-line front end.
//
//   fgle soe        --alpha 0.4 --eps 1e-9 --delta 0.00048828125 --T 1
//   fgle fbm        --N 1024 --k 0.0009765625 --H 0.75 --n-paths 4
//   fgle solve      --config solve.json
//   fgle converge   --H 0.8 --H 0.6 --scheme direct
//   fgle ergodicity --config well.json --threads 8
//
// Precedence: defaults < flags < --config file. FGLE_OUT_DIR, when set,
// replaces the output directory. Exit status 0 on success, 1 on a runtime
// failure, 2 on a usage or configuration error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgle/config.hpp"
#include "fgle/error.hpp"
#include "fgle/fbm.hpp"
#include "fgle/harness.hpp"
#include "fgle/io.hpp"
#include "fgle/rng.hpp"
#include "fgle/soe.hpp"
#include "fgle/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::size_t threads = 0;
};

fs::path output_dir(const Common& common, const std::string& subcommand) {
  if (const char* env = std::getenv("FGLE_OUT_DIR"); env && *env) return fs::path(env);
  return common.out.empty() ? fs::path("fgle_out") / subcommand : fs::path(common.out);
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("-c,--config", common.config, "JSON config or manifest; its values override flags");
  sub->add_option("-o,--out", common.out, "output directory (default fgle_out/<subcommand>)");
  sub->add_option("-j,--threads", common.threads, "worker threads, 0 = all cores")->capture_default_str();
}

template <class Config>
void load_file(const Common& common, const std::string& subcommand, Config& config) {
  if (!common.config.empty()) fgle::apply_config(fgle::load_config_file(common.config, subcommand), config);
}

void finish(const fs::path& dir, const std::string& subcommand, std::uint64_t seed, const json& config,
            std::vector<std::string> outputs) {
  outputs.push_back("manifest.json");
  fgle::write_json(dir / "manifest.json", fgle::make_manifest(subcommand, seed, config, outputs));
  std::cout << "wrote";
  for (const auto& o : outputs) std::cout << ' ' << (dir / o).string();
  std::cout << '\n';
}

int run_soe(const Common& common, fgle::SoeRunConfig cfg) {
  load_file(common, "soe", cfg);
  cfg.validate();
  const fs::path dir = output_dir(common, "soe");
  fgle::SoeOptions options;
  options.node_budget = cfg.node_budget;
  const fgle::SoeKernel kernel = fgle::build_soe(cfg.alpha, cfg.eps, cfg.delta, cfg.horizon, options);
  const double certified = fgle::certify_soe(kernel, options.certification_points);
  fgle::write_json(dir / "kernel.json", fgle::to_json(kernel));
  const json report = {{"config", fgle::to_json(cfg)},
                       {"M", kernel.size()},
                       {"certified_error", certified},
                       {"certification_points", options.certification_points},
                       {"certified", certified <= cfg.eps}};
  fgle::write_json(dir / "report.json", report);
  std::cout << "M = " << kernel.size() << ", certified sup error " << certified << '\n';
  finish(dir, "soe", 0, fgle::to_json(cfg), {"kernel.json", "report.json"});
  return 0;
}

int run_fbm(const Common& common, fgle::FbmRunConfig cfg) {
  load_file(common, "fbm", cfg);
  cfg.validate();
  const fs::path dir = output_dir(common, "fbm");
  const fgle::CirculantFgnSampler sampler(cfg.steps, cfg.hurst);
  auto chunks = fgle::parallel_chunks<std::vector<std::vector<double>>>(
      cfg.paths, 16, common.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<double>> out;
        for (std::size_t p = begin; p < end; ++p) {
          out.push_back(fgle::cumulative_path(sampler.sample(fgle::derive_seed(cfg.seed, p), cfg.step)));
        }
        return out;
      });
  std::vector<std::vector<double>> paths;
  for (auto& c : chunks) {
    for (auto& p : c) paths.push_back(std::move(p));
  }
  const double t = static_cast<double>(cfg.steps) * cfg.step;
  const double expected = std::pow(t, 2.0 * cfg.hurst);
  double second = 0.0;
  for (const auto& p : paths) second += p.back() * p.back();
  const double n = static_cast<double>(paths.size());
  second /= n;
  // B_H(T)^2 / T^{2H} is chi-square with one degree of freedom: variance 2.
  const double stderr_ = expected * std::sqrt(2.0 / n);
  json report = {{"config", fgle::to_json(cfg)},
                 {"T", t},
                 {"variance_check",
                  {{"empirical", second},
                   {"expected", expected},
                   {"standard_error", stderr_},
                   {"z", (second - expected) / stderr_}}}};
  fgle::write_text(dir / "paths.csv", fgle::fbm_csv(paths, cfg.step));
  fgle::write_json(dir / "report.json", report);
  finish(dir, "fbm", cfg.seed, fgle::to_json(cfg), {"paths.csv", "report.json"});
  return 0;
}

int run_solve(const Common& common, fgle::SolveRunConfig cfg) {
  load_file(common, "solve", cfg);
  cfg.validate();
  const fs::path dir = output_dir(common, "solve");
  const fgle::FgleProblem problem = cfg.problem();
  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step));
  fgle::SchemeKernel kernel;
  if (cfg.scheme == fgle::Scheme::fast) {
    const double eps = cfg.eps > 0.0 ? cfg.eps : fgle::scheme_tolerance(cfg.step, cfg.hurst);
    kernel = fgle::scheme_kernel_for(problem.alpha, cfg.step, cfg.horizon, eps);
  }
  std::vector<fgle::GPath> noise(cfg.paths);
  std::vector<fgle::Trajectory> trajectories(cfg.paths);
  const fgle::FbmGrid grid{steps, cfg.step, cfg.hurst, cfg.seed};
  if (cfg.physical_noise) {
    const fgle::PhysicalNoiseSampler sampler(steps, cfg.step, cfg.hurst, problem.dim);
    for (std::size_t p = 0; p < cfg.paths; ++p) noise[p] = sampler.sample(fgle::derive_seed(cfg.seed, p));
  } else {
    for (auto& g : noise) g = fgle::GPath::zero(grid, problem.dim);
  }
  fgle::parallel_chunks<int>(cfg.paths, 1, common.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      trajectories[p] = cfg.scheme == fgle::Scheme::direct ? fgle::solve_direct(problem, noise[p])
                                                           : fgle::solve_fast(problem, noise[p], kernel);
    }
    return 0;
  });
  json finals = json::array();
  for (const auto& tr : trajectories) {
    const auto last = tr.state(tr.steps);
    finals.push_back(std::vector<double>(last.begin(), last.end()));
  }
  const json report = {{"config", fgle::to_json(cfg)},
                       {"alpha", problem.alpha},
                       {"sigma", problem.sigma},
                       {"steps", steps},
                       {"modes", kernel.soe.size()},
                       {"final_states", finals}};
  fgle::write_text(dir / "trajectories.csv", fgle::trajectories_csv(trajectories));
  fgle::write_text(dir / "noise.csv", fgle::noise_csv(noise));
  fgle::write_json(dir / "report.json", report);
  finish(dir, "solve", cfg.seed, fgle::to_json(cfg), {"trajectories.csv", "noise.csv", "report.json"});
  return 0;
}

int run_converge(const Common& common, fgle::ConvergenceConfig cfg) {
  load_file(common, "converge", cfg);
  cfg.threads = common.threads;
  cfg.validate();
  const fs::path dir = output_dir(common, "converge");
  const fgle::ConvergenceResult result = fgle::run_convergence(cfg);
  fgle::write_text(dir / "errors.csv", fgle::error_table_csv(result));
  fgle::write_json(dir / "report.json", fgle::to_json(result));
  for (const auto& f : result.fits) {
    std::cout << "H = " << f.hurst << " " << fgle::scheme_name(f.scheme) << ": slope " << f.fit.slope << " (R^2 "
              << f.fit.r2 << "), theoretical " << f.theoretical << (f.log_factor ? " up to a log factor" : "")
              << '\n';
  }
  finish(dir, "converge", cfg.seed, fgle::to_json(cfg), {"errors.csv", "report.json"});
  return 0;
}

int run_ergodicity(const Common& common, fgle::ErgodicityConfig cfg) {
  load_file(common, "ergodicity", cfg);
  cfg.threads = common.threads;
  cfg.validate();
  const fs::path dir = output_dir(common, "ergodicity");
  const fgle::ErgodicityResult result = fgle::run_ergodicity(cfg);
  const double final_time = result.snapshots.back().time;
  fgle::write_text(dir / "moments.csv", fgle::moments_csv(result));
  fgle::write_text(dir / "histograms.csv", fgle::histograms_csv(result));
  fgle::write_text(dir / "final_samples.csv",
                   fgle::snapshots_csv(result.final_samples, cfg.paths, std::vector<double>{final_time},
                                       cfg.x0.size()));
  fgle::write_json(dir / "report.json", fgle::to_json(result));
  const auto& last = result.snapshots.back();
  std::cout << "t = " << last.time << ": var " << last.variance[0] << ", msd " << last.msd;
  if (last.l1 >= 0.0) std::cout << ", L1 to Gibbs " << last.l1;
  if (last.asymmetry >= 0.0) std::cout << ", asymmetry " << last.asymmetry;
  std::cout << '\n';
  finish(dir, "ergodicity", cfg.seed, fgle::to_json(cfg),
         {"moments.csv", "histograms.csv", "final_samples.csv", "report.json"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overdamped fractional Langevin equation: noise, kernels, solvers and studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fgle::tool_version());
  Common common;

  fgle::SoeRunConfig soe;
  auto* soe_cmd = app.add_subcommand("soe", "build and certify a sum-of-exponentials kernel");
  soe_cmd->add_option("--alpha", soe.alpha, "exponent of t^(alpha-1)")->capture_default_str();
  soe_cmd->add_option("--eps", soe.eps, "sup-norm tolerance")->capture_default_str();
  soe_cmd->add_option("--delta", soe.delta, "left end of the interval")->capture_default_str();
  soe_cmd->add_option("--T", soe.horizon, "right end of the interval")->capture_default_str();
  soe_cmd->add_option("--node-budget", soe.node_budget, "maximum number of exponentials")->capture_default_str();
  add_common(soe_cmd, common);

  fgle::FbmRunConfig fbm;
  auto* fbm_cmd = app.add_subcommand("fbm", "sample fractional Brownian motion paths");
  fbm_cmd->add_option("--N", fbm.steps, "number of steps")->capture_default_str();
  fbm_cmd->add_option("--k", fbm.step, "step size")->capture_default_str();
  fbm_cmd->add_option("--H", fbm.hurst, "Hurst index")->capture_default_str();
  fbm_cmd->add_option("--n-paths", fbm.paths, "number of paths")->capture_default_str();
  fbm_cmd->add_option("--seed", fbm.seed, "master seed")->capture_default_str();
  add_common(fbm_cmd, common);

  fgle::SolveRunConfig solve;
  std::string solve_scheme = "direct";
  double solve_alpha = 0.0;
  std::string solve_noise = "physical";
  auto* solve_cmd = app.add_subcommand("solve", "integrate sample trajectories");
  solve_cmd->add_option("--force", solve.force, "force field name")->capture_default_str();
  solve_cmd->add_option("--params", solve.force_params, "force parameters");
  solve_cmd->add_option("--H", solve.hurst, "Hurst index")->capture_default_str();
  auto* alpha_opt = solve_cmd->add_option("--alpha", solve_alpha, "override alpha (requires --noise none)");
  solve_cmd->add_option("--x0", solve.x0, "initial value");
  solve_cmd->add_option("--k", solve.step, "step size")->capture_default_str();
  solve_cmd->add_option("--T", solve.horizon, "final time")->capture_default_str();
  solve_cmd->add_option("--n-paths", solve.paths, "number of trajectories")->capture_default_str();
  solve_cmd->add_option("--scheme", solve_scheme, "direct or fast")->capture_default_str();
  solve_cmd->add_option("--eps", solve.eps, "SOE tolerance, 0 for automatic")->capture_default_str();
  solve_cmd->add_option("--noise", solve_noise, "physical or none")->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "master seed")->capture_default_str();
  add_common(solve_cmd, common);

  fgle::ConvergenceConfig converge;
  std::string converge_scheme = "direct";
  auto* converge_cmd = app.add_subcommand("converge", "strong convergence study on the harmonic problem");
  converge_cmd->add_option("--H", converge.hursts, "Hurst indices");
  converge_cmd->add_option("--k", converge.steps, "dyadic step sizes");
  converge_cmd->add_option("--k-ref", converge.reference_step, "reference step")->capture_default_str();
  converge_cmd->add_option("--T", converge.horizon, "final time")->capture_default_str();
  converge_cmd->add_option("--n-paths", converge.paths, "number of paths")->capture_default_str();
  converge_cmd->add_option("--scheme", converge_scheme, "direct, fast or both")->capture_default_str();
  converge_cmd->add_option("--eps", converge.eps, "SOE tolerance, 0 for k^order")->capture_default_str();
  converge_cmd->add_option("--x0", converge.x0, "initial value")->capture_default_str();
  converge_cmd->add_option("--seed", converge.seed, "master seed")->capture_default_str();
  converge_cmd->add_option("--chunk", converge.chunk, "paths per work item")->capture_default_str();
  add_common(converge_cmd, common);

  fgle::ErgodicityConfig ergodicity;
  std::string ergodicity_scheme = "fast";
  auto* ergodicity_cmd = app.add_subcommand("ergodicity", "histograms, Gibbs distance and MSD over an ensemble");
  ergodicity_cmd->add_option("--force", ergodicity.force, "force field name")->capture_default_str();
  ergodicity_cmd->add_option("--params", ergodicity.force_params, "force parameters");
  ergodicity_cmd->add_option("--H", ergodicity.hurst, "Hurst index")->capture_default_str();
  ergodicity_cmd->add_option("--x0", ergodicity.x0, "initial value");
  ergodicity_cmd->add_option("--k", ergodicity.step, "step size")->capture_default_str();
  ergodicity_cmd->add_option("--T", ergodicity.horizon, "final time")->capture_default_str();
  ergodicity_cmd->add_option("--n-paths", ergodicity.paths, "number of paths")->capture_default_str();
  ergodicity_cmd->add_option("--scheme", ergodicity_scheme, "direct or fast")->capture_default_str();
  ergodicity_cmd->add_option("--eps", ergodicity.eps, "SOE tolerance, 0 for automatic")->capture_default_str();
  ergodicity_cmd->add_option("--snapshots", ergodicity.snapshots, "snapshot times (default: log-spaced)");
  ergodicity_cmd->add_option("--bins", ergodicity.bins, "histogram bins per dimension");
  ergodicity_cmd->add_option("--box-lo", ergodicity.box_lo, "histogram box lower corner");
  ergodicity_cmd->add_option("--box-hi", ergodicity.box_hi, "histogram box upper corner");
  ergodicity_cmd->add_option("--tail-start", ergodicity.tail_start, "MSD tail window start")->capture_default_str();
  ergodicity_cmd->add_option("--seed", ergodicity.seed, "master seed")->capture_default_str();
  ergodicity_cmd->add_option("--chunk", ergodicity.chunk, "paths per work item")->capture_default_str();
  add_common(ergodicity_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*soe_cmd) return run_soe(common, soe);
    if (*fbm_cmd) return run_fbm(common, fbm);
    if (*solve_cmd) {
      solve.scheme = fgle::parse_scheme(solve_scheme, "--scheme");
      if (*alpha_opt) solve.alpha_override = solve_alpha;
      if (solve_noise != "physical" && solve_noise != "none") {
        throw fgle::ConfigError("--noise", "must be physical or none");
      }
      solve.physical_noise = solve_noise == "physical";
      return run_solve(common, solve);
    }
    if (*converge_cmd) {
      converge.scheme = fgle::parse_scheme_selection(converge_scheme, "--scheme");
      return run_converge(common, converge);
    }
    if (*ergodicity_cmd) {
      ergodicity.scheme = fgle::parse_scheme(ergodicity_scheme, "--scheme");
      return run_ergodicity(common, ergodicity);
    }
  } catch (const fgle::ConfigError& e) {
    std::cerr << "fgle: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fgle: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
