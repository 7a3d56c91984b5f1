#pragma once

// Fractional Gaussian noise and fractional Brownian motion on uniform grids.
//
// Increments are drawn by circulant embedding of the Toeplitz covariance
// (Wood-Chan). A dense Cholesky sampler is provided as an oracle for tests.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fgle/rng.hpp"

namespace fgle {

/// Uniform grid t_j = j * step, j = 0..steps, for one noise realization.
struct FbmGrid {
  std::size_t steps = 0;
  double step = 0.0;
  double hurst = 0.5;
  std::uint64_t seed = 0;

  /// Throws DomainError unless steps >= 2, step > 0 and 0 < hurst < 1.
  void validate() const;
  double time(std::size_t n) const noexcept { return static_cast<double>(n) * step; }
  double horizon() const noexcept { return time(steps); }
};

/// One realization of xi_n = B_H(t_n) - B_H(t_{n-1}), n = 1..steps.
struct FgnIncrements {
  FbmGrid grid;
  std::vector<double> values;
};

/// The noise process G on a grid, one block of steps+1 values per dimension.
/// values are stored component-major; G(0) = 0 in every component.
struct GPath {
  FbmGrid grid;
  std::size_t dims = 1;
  std::vector<double> values;

  static GPath zero(const FbmGrid& grid, std::size_t dims);
  /// Builds a path from caller-supplied components, each of length steps+1.
  static GPath from_components(const FbmGrid& grid, const std::vector<std::vector<double>>& components);

  std::size_t steps() const noexcept { return grid.steps; }
  double step() const noexcept { return grid.step; }
  std::span<const double> component(std::size_t d) const {
    return {values.data() + d * (grid.steps + 1), grid.steps + 1};
  }
  std::span<double> component(std::size_t d) {
    return {values.data() + d * (grid.steps + 1), grid.steps + 1};
  }
  double at(std::size_t d, std::size_t n) const { return values[d * (grid.steps + 1) + n]; }
};

/// E[B_H(s) B_H(t)] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

/// Autocovariance of unit-step fGn: (|m+1|^{2H} - 2 m^{2H} + |m-1|^{2H}) / 2.
double fgn_autocovariance(std::size_t lag, double hurst);

/// Dense covariance k^{2H} rho_H(|i-j|) of `steps` consecutive increments.
Eigen::MatrixXd fgn_covariance_matrix(std::size_t steps, double step, double hurst);

/// Circulant-embedding sampler for `steps` unit-lag fGn increments.
///
/// The embedding has size 2(steps-1) with first row
/// [rho(0), ..., rho(steps-1), rho(steps-2), ..., rho(1)]. Its eigenvalues
/// are computed once; eigenvalues below -tol * max are rejected, smaller
/// negatives are clamped to zero. Sampling is thread-safe: each call uses
/// its own work buffers.
class CirculantFgnSampler {
 public:
  static constexpr double kEigenTolerance = 1e-9;

  CirculantFgnSampler(std::size_t steps, double hurst);
  ~CirculantFgnSampler();
  CirculantFgnSampler(CirculantFgnSampler&&) noexcept;
  CirculantFgnSampler& operator=(CirculantFgnSampler&&) noexcept;
  CirculantFgnSampler(const CirculantFgnSampler&) = delete;
  CirculantFgnSampler& operator=(const CirculantFgnSampler&) = delete;

  std::size_t steps() const noexcept { return steps_; }
  double hurst() const noexcept { return hurst_; }
  std::size_t embedding_size() const noexcept { return eigenvalues_.size(); }
  /// Eigenvalues of the embedding before clamping.
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  double min_eigenvalue() const noexcept;

  /// Draws one realization scaled to grid step `step` (factor step^H).
  std::vector<double> sample(NormalSampler& normals, double step) const;
  std::vector<double> sample(std::uint64_t seed, double step) const {
    NormalSampler normals(seed);
    return sample(normals, step);
  }

 private:
  struct Plan;
  std::size_t steps_;
  double hurst_;
  std::vector<double> eigenvalues_;
  std::vector<double> amplitudes_;  // sqrt(max(lambda, 0) / L)
  std::unique_ptr<Plan> plan_;
};

/// One fGn realization on `grid`; deterministic in (grid, seed).
FgnIncrements sample_fgn(const FbmGrid& grid);

/// B_H(t_0..t_N): prefix sums of sample_fgn with B_H(0) = 0.
std::vector<double> sample_fbm_path(const FbmGrid& grid);

/// Prefix sum with a leading zero: {0, x1, x1+x2, ...}.
std::vector<double> cumulative_path(std::span<const double> increments);

/// beta_H = sqrt(2 / Gamma(3 - 2H)).
double g_scale_factor(double hurst);

/// True when alpha = 2 - 2H and sigma = sqrt(2 / Gamma(2H + 1)) to 1e-12.
bool is_physical(double hurst, double alpha, double sigma);

/// Samples G for the physical parameter map, where G is distributed as
/// beta_H * B_{1-H}. Components are independent fBm paths drawn from streams
/// derive_seed(grid.seed, d).
class PhysicalNoiseSampler {
 public:
  /// `steps`, `step` give the grid; `hurst` is the solver's Hurst index.
  PhysicalNoiseSampler(std::size_t steps, double step, double hurst, std::size_t dims);

  GPath sample(std::uint64_t seed) const;
  std::size_t steps() const noexcept { return fgn_.steps(); }
  double step() const noexcept { return step_; }
  std::size_t dims() const noexcept { return dims_; }

 private:
  CirculantFgnSampler fgn_;
  double step_;
  double hurst_;
  double scale_;
  std::size_t dims_;
};

/// One-shot form of PhysicalNoiseSampler. Rejects non-physical (alpha, sigma).
GPath sample_G_physical(const FbmGrid& grid, std::size_t dims, double alpha, double sigma);

/// Exact sampler: x = L z for cov = L L^T. Falls back to a diagonal jitter of
/// up to 1e-10 * max diagonal when the plain factorization fails, and throws
/// FactorizationError beyond that.
class ExactGaussianSampler {
 public:
  explicit ExactGaussianSampler(const Eigen::MatrixXd& covariance);
  Eigen::VectorXd sample(std::uint64_t seed) const;
  std::size_t size() const noexcept { return static_cast<std::size_t>(factor_.rows()); }

 private:
  Eigen::MatrixXd factor_;  // lower triangular
};

/// One-shot form of ExactGaussianSampler.
Eigen::VectorXd sample_gaussian_exact(const Eigen::MatrixXd& covariance, std::uint64_t seed);

/// Pairwise sums of a fine increment sequence: step k -> 2k.
std::vector<double> coarsen_increments(std::span<const double> fine);

/// Path on the grid of step 2k: the fine path at even indices.
GPath coarsen_path(const GPath& fine);

/// Subsamples every `stride`-th node; equivalent to log2(stride) coarsenings.
GPath subsample_path(const GPath& fine, std::size_t stride);

}  // namespace fgle
