#pragma once

// Experiment drivers: strong-convergence studies on the harmonic problem and
// ergodicity studies (histograms against the Gibbs density, mean square
// displacement) for the registered potentials.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fgle/forces.hpp"
#include "fgle/solver.hpp"

namespace fgle {

std::size_t default_threads() noexcept;

/// Runs fn(begin, end) over [0, items) in chunks of `chunk` on `threads`
/// workers and returns the per-chunk results in chunk order, so any later
/// reduction is independent of scheduling. The first exception is rethrown.
template <class R, class F>
std::vector<R> parallel_chunks(std::size_t items, std::size_t chunk, std::size_t threads, F&& fn) {
  if (chunk == 0) chunk = 1;
  const std::size_t chunks = (items + chunk - 1) / chunk;
  std::vector<R> results(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        results[c] = fn(c * chunk, std::min(items, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads == 0 ? default_threads() : threads, chunks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Least squares y = slope x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Strong order min(3/2 - H, 3 - 3H) for H in (1/2, 1). At H = 3/4 the bound
/// carries an extra sqrt|ln k| factor, flagged by order_has_log_factor.
double theoretical_order(double hurst);
bool order_has_log_factor(double hurst) noexcept;

enum class SchemeSelection { direct, fast, both };

struct ConvergenceConfig {
  std::vector<double> hursts{0.8, 0.6};
  std::vector<double> steps{0x1p-9, 0x1p-8, 0x1p-7, 0x1p-6, 0x1p-5};
  double reference_step = 0x1p-12;
  double horizon = 1.0;
  std::size_t paths = 2000;
  SchemeSelection scheme = SchemeSelection::direct;
  /// SOE tolerance for the fast scheme; 0 selects k^{min(3/2-H, 3-3H)} per k.
  double eps = 0.0;
  double x0 = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t chunk = 25;

  /// Throws ConfigError with the offending field.
  void validate() const;
};

struct ConvergenceRow {
  double hurst = 0.0;
  Scheme scheme = Scheme::direct;
  double step = 0.0;
  double sup_error = 0.0;   // max_n sqrt(E|x_n - x(t_n)|^2)
  double final_error = 0.0; // same at t = T
  double sup_time = 0.0;    // where the max is attained
  std::size_t paths = 0;
  std::size_t modes = 0;    // SOE size for the fast scheme
  double eps = 0.0;
};

struct ConvergenceFit {
  double hurst = 0.0;
  Scheme scheme = Scheme::direct;
  LineFit fit;              // log sup_error against log k
  double theoretical = 0.0;
  bool log_factor = false;
};

struct ConvergenceResult {
  ConvergenceConfig config;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceFit> fits;
};

/// For each path: one fine noise path, the reference solution, and every
/// scheme run on the subsampled noise. Deterministic in (config, seed) and
/// independent of the thread count.
ConvergenceResult run_convergence(const ConvergenceConfig& config);

/// sup_n |fast - direct| on one shared noise path (inf norm over components).
double scheme_discrepancy(const FgleProblem& problem, double step, double horizon, double eps, std::uint64_t seed);

struct Histogram {
  std::size_t dims = 1;
  std::vector<double> lo, hi;
  std::vector<std::size_t> bins;
  std::vector<double> masses;  // row-major over bins, sums to 1
  std::size_t outliers = 0;    // samples folded into edge bins
  std::size_t samples = 0;

  double bin_width(std::size_t d) const { return (hi[d] - lo[d]) / static_cast<double>(bins[d]); }
};

/// Histogram of `samples` (row-major, dims values each); points outside the
/// box are counted in the nearest edge bin.
Histogram make_histogram(std::span<const double> samples, std::size_t dims, const std::vector<double>& lo,
                         const std::vector<double>& hi, const std::vector<std::size_t>& bins);

/// Normalized exp(-V) integrated over the histogram bins. Edge bins also
/// collect the mass outside the box (up to an outer box where the exterior
/// mass is negligible), matching how histograms fold outliers.
struct GibbsDensity {
  std::size_t dims = 1;
  std::vector<double> lo, hi;
  std::vector<std::size_t> bins;
  std::vector<double> outer_lo, outer_hi;
  double normalization = 0.0;   // Z over the outer box
  double exterior_mass = 0.0;   // estimated mass outside the outer box
  std::vector<double> masses;   // same layout as Histogram::masses

  /// Normalized density at x.
  double density(std::span<const double> x) const;
  /// E|x - x0|^2 under the density.
  double second_moment_about(std::span<const double> x0) const;

  std::function<double(std::span<const double>)> potential;
  double shift = 0.0;  // exp(-(V - shift)) is what gets integrated
};

/// Throws ConfigError if the force has no potential and DomainError if
/// Simpson quadrature does not settle to 1e-8 relative.
GibbsDensity gibbs_density(const ForceField& force, const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<std::size_t>& bins);

/// sum_b |p_b - q_b|, in [0, 2].
double l1_distance(std::span<const double> p, std::span<const double> q);

/// Half the L1 distance between a 1D histogram and its mirror image, i.e.
/// sum over the right half of |p_b - p_{mirror(b)}|. The box must be
/// symmetric about 0.
double mirror_asymmetry(const Histogram& histogram);

struct ErgodicityConfig {
  std::string force = "harmonic";
  std::vector<double> force_params;
  double hurst = 0.75;
  std::vector<double> x0{0.0};
  double step = 0x1p-7;
  double horizon = 32.0;
  std::size_t paths = 10000;
  Scheme scheme = Scheme::fast;
  /// SOE tolerance; 0 selects k^{min(3/2-H, 3-3H)}.
  double eps = 0.0;
  /// Snapshot times; empty selects 0 plus 48 log-spaced grid times up to T.
  std::vector<double> snapshots;
  std::vector<std::size_t> bins{40};
  std::vector<double> box_lo{-4.0};
  std::vector<double> box_hi{4.0};
  /// MSD tail fits use snapshots at or after this time.
  double tail_start = 0.25;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t chunk = 50;

  void validate() const;
};

struct Snapshot {
  double time = 0.0;
  std::size_t index = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  double msd = 0.0;            // E|x(t) - x(0)|^2
  double msd_stderr = 0.0;
  Histogram histogram;
  double l1 = -1.0;            // to the Gibbs density, -1 without a potential
  double asymmetry = -1.0;     // 1D symmetric boxes only
};

struct ErgodicityResult {
  ErgodicityConfig config;
  std::vector<Snapshot> snapshots;
  bool has_gibbs = false;
  GibbsDensity gibbs;
  double msd_equilibrium = 0.0;  // E|x - x0|^2 under the Gibbs density
  /// log |msd_equilibrium - msd(t)| against log t over the tail window: the
  /// snapshots from tail_start up to the first one whose gap is within 3
  /// standard errors of zero.
  LineFit msd_gap_fit;
  std::vector<double> msd_gap_times;
  std::size_t modes = 0;
  /// States at the last snapshot, row-major [path][dim].
  std::vector<double> final_samples;
};

ErgodicityResult run_ergodicity(const ErgodicityConfig& config);

/// MSD series E|x(t) - x(0)|^2 from states[path][time][dim], row-major.
std::vector<double> msd(std::span<const double> states, std::size_t paths, std::size_t times, std::size_t dims,
                        std::span<const double> x0);

nlohmann::json to_json(const ConvergenceConfig& config);
nlohmann::json to_json(const ConvergenceResult& result);
nlohmann::json to_json(const ErgodicityConfig& config);
nlohmann::json to_json(const ErgodicityResult& result);

}  // namespace fgle
