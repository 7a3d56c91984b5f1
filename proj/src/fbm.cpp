#include "fgle/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "fgle/error.hpp"

namespace fgle {

namespace {

// FFTW's planner is not re-entrant; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw DomainError("Hurst index must lie in (0, 1), got " + std::to_string(hurst));
  }
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

void FbmGrid::validate() const {
  if (steps < 2) throw DomainError("grid needs at least 2 steps");
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid step must be positive");
  check_hurst(hurst);
}

GPath GPath::zero(const FbmGrid& grid, std::size_t dims) {
  GPath g;
  g.grid = grid;
  g.dims = dims;
  g.values.assign(dims * (grid.steps + 1), 0.0);
  return g;
}

GPath GPath::from_components(const FbmGrid& grid, const std::vector<std::vector<double>>& components) {
  GPath g = zero(grid, components.size());
  for (std::size_t d = 0; d < components.size(); ++d) {
    if (components[d].size() != grid.steps + 1) {
      throw MismatchError("noise component " + std::to_string(d) + " has " +
                          std::to_string(components[d].size()) + " values, expected " +
                          std::to_string(grid.steps + 1));
    }
    std::copy(components[d].begin(), components[d].end(), g.component(d).begin());
  }
  return g;
}

double fbm_covariance(double s, double t, double hurst) {
  check_hurst(hurst);
  if (s < 0.0 || t < 0.0) throw DomainError("fBm covariance needs nonnegative times");
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
  check_hurst(hurst);
  const double two_h = 2.0 * hurst;
  if (lag == 0) return 1.0;
  const double m = static_cast<double>(lag);
  if (lag == 1) return 0.5 * (std::pow(2.0, two_h) - 2.0);
  // m^{2H} [(1+1/m)^{2H} - 2 + (1-1/m)^{2H}] / 2, written with expm1/log1p so
  // the second difference does not cancel at large lags.
  const double u = 1.0 / m;
  const double up = std::expm1(two_h * std::log1p(u));
  const double down = std::expm1(two_h * std::log1p(-u));
  return 0.5 * std::pow(m, two_h) * (up + down);
}

Eigen::MatrixXd fgn_covariance_matrix(std::size_t steps, double step, double hurst) {
  const double scale = std::pow(step, 2.0 * hurst);
  std::vector<double> rho(steps);
  for (std::size_t m = 0; m < steps; ++m) rho[m] = scale * fgn_autocovariance(m, hurst);
  Eigen::MatrixXd cov(steps, steps);
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho[i > j ? i - j : j - i];
    }
  }
  return cov;
}

struct CirculantFgnSampler::Plan {
  explicit Plan(std::size_t n) : size(n) {
    FftwBuffer in(n), out(n);
    std::lock_guard lock(planner_mutex());
    handle = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(handle);
  }
  std::size_t size;
  fftw_plan handle = nullptr;
};

CirculantFgnSampler::CirculantFgnSampler(std::size_t steps, double hurst) : steps_(steps), hurst_(hurst) {
  if (steps < 2) throw DomainError("circulant embedding needs at least 2 steps");
  check_hurst(hurst);
  const std::size_t len = 2 * (steps - 1);
  plan_ = std::make_unique<Plan>(len);

  FftwBuffer row(len), spectrum(len);
  for (std::size_t j = 0; j < steps; ++j) {
    row.data[j][0] = fgn_autocovariance(j, hurst);
    row.data[j][1] = 0.0;
  }
  for (std::size_t j = steps; j < len; ++j) {
    row.data[j][0] = row.data[len - j][0];
    row.data[j][1] = 0.0;
  }
  fftw_execute_dft(plan_->handle, row.data, spectrum.data);

  eigenvalues_.resize(len);
  double largest = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    eigenvalues_[j] = spectrum.data[j][0];
    largest = std::max(largest, eigenvalues_[j]);
  }
  const double floor = -kEigenTolerance * largest;
  amplitudes_.resize(len);
  for (std::size_t j = 0; j < len; ++j) {
    if (eigenvalues_[j] < floor) {
      throw EmbeddingError("circulant embedding for H=" + std::to_string(hurst) + ", N=" +
                           std::to_string(steps) + " has eigenvalue " + std::to_string(eigenvalues_[j]));
    }
    amplitudes_[j] = std::sqrt(std::max(eigenvalues_[j], 0.0) / static_cast<double>(len));
  }
}

CirculantFgnSampler::~CirculantFgnSampler() = default;
CirculantFgnSampler::CirculantFgnSampler(CirculantFgnSampler&&) noexcept = default;
CirculantFgnSampler& CirculantFgnSampler::operator=(CirculantFgnSampler&&) noexcept = default;

double CirculantFgnSampler::min_eigenvalue() const noexcept {
  return *std::min_element(eigenvalues_.begin(), eigenvalues_.end());
}

std::vector<double> CirculantFgnSampler::sample(NormalSampler& normals, double step) const {
  const std::size_t len = amplitudes_.size();
  FftwBuffer in(len), out(len);
  for (std::size_t j = 0; j < len; ++j) {
    auto [re, im] = normals.pair();
    in.data[j][0] = amplitudes_[j] * re;
    in.data[j][1] = amplitudes_[j] * im;
  }
  fftw_execute_dft(plan_->handle, in.data, out.data);

  const double scale = std::pow(step, hurst_);
  std::vector<double> xi(steps_);
  for (std::size_t n = 0; n < steps_; ++n) xi[n] = scale * out.data[n][0];
  return xi;
}

FgnIncrements sample_fgn(const FbmGrid& grid) {
  grid.validate();
  CirculantFgnSampler sampler(grid.steps, grid.hurst);
  return {grid, sampler.sample(grid.seed, grid.step)};
}

std::vector<double> cumulative_path(std::span<const double> increments) {
  std::vector<double> path(increments.size() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t n = 0; n < increments.size(); ++n) {
    acc += increments[n];
    path[n + 1] = acc;
  }
  return path;
}

std::vector<double> sample_fbm_path(const FbmGrid& grid) {
  return cumulative_path(sample_fgn(grid).values);
}

double g_scale_factor(double hurst) { return std::sqrt(2.0 / std::tgamma(3.0 - 2.0 * hurst)); }

bool is_physical(double hurst, double alpha, double sigma) {
  const double sigma_phys = std::sqrt(2.0 / std::tgamma(2.0 * hurst + 1.0));
  return std::abs(alpha - (2.0 - 2.0 * hurst)) <= 1e-12 && std::abs(sigma - sigma_phys) <= 1e-12;
}

PhysicalNoiseSampler::PhysicalNoiseSampler(std::size_t steps, double step, double hurst, std::size_t dims)
    : fgn_(steps, 1.0 - hurst),
      step_(step),
      hurst_(hurst),
      scale_(g_scale_factor(hurst)),
      dims_(dims) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (dims == 0) throw DomainError("noise needs at least one dimension");
}

GPath PhysicalNoiseSampler::sample(std::uint64_t seed) const {
  FbmGrid grid{fgn_.steps(), step_, hurst_, seed};
  GPath g = GPath::zero(grid, dims_);
  for (std::size_t d = 0; d < dims_; ++d) {
    const auto xi = fgn_.sample(derive_seed(seed, d), step_);
    auto out = g.component(d);
    double acc = 0.0;
    for (std::size_t n = 0; n < xi.size(); ++n) {
      acc += xi[n];
      out[n + 1] = scale_ * acc;
    }
  }
  return g;
}

GPath sample_G_physical(const FbmGrid& grid, std::size_t dims, double alpha, double sigma) {
  grid.validate();
  if (!is_physical(grid.hurst, alpha, sigma)) {
    throw DomainError("G can only be sampled directly when alpha = 2 - 2H and sigma = sqrt(2/Gamma(2H+1))");
  }
  return PhysicalNoiseSampler(grid.steps, grid.step, grid.hurst, dims).sample(grid.seed);
}

ExactGaussianSampler::ExactGaussianSampler(const Eigen::MatrixXd& covariance) {
  const Eigen::Index n = covariance.rows();
  if (covariance.cols() != n) throw FactorizationError("covariance must be square");
  const double magnitude = n > 0 ? covariance.cwiseAbs().maxCoeff() : 0.0;
  if (n > 0 && (covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, magnitude)) {
    throw FactorizationError("covariance must be symmetric");
  }
  if (magnitude == 0.0) {
    factor_ = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  const double max_diag = covariance.diagonal().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  for (double jitter = 1e-14; llt.info() != Eigen::Success; jitter *= 10.0) {
    if (jitter > 1e-10) throw FactorizationError("covariance is not positive semi-definite");
    Eigen::MatrixXd shifted = covariance;
    shifted.diagonal().array() += jitter * max_diag;
    llt.compute(shifted);
  }
  factor_ = llt.matrixL();
}

Eigen::VectorXd ExactGaussianSampler::sample(std::uint64_t seed) const {
  const Eigen::Index n = factor_.rows();
  Eigen::VectorXd z(n);
  NormalSampler normals(seed);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normals();
  return factor_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_gaussian_exact(const Eigen::MatrixXd& covariance, std::uint64_t seed) {
  return ExactGaussianSampler(covariance).sample(seed);
}

std::vector<double> coarsen_increments(std::span<const double> fine) {
  if (fine.size() % 2 != 0) {
    throw DomainError("coarsening needs an even number of increments, got " + std::to_string(fine.size()));
  }
  std::vector<double> coarse(fine.size() / 2);
  for (std::size_t n = 0; n < coarse.size(); ++n) coarse[n] = fine[2 * n] + fine[2 * n + 1];
  return coarse;
}

GPath subsample_path(const GPath& fine, std::size_t stride) {
  if (stride == 0 || fine.steps() % stride != 0) {
    throw DomainError("path of " + std::to_string(fine.steps()) + " steps cannot be subsampled by " +
                      std::to_string(stride));
  }
  FbmGrid grid = fine.grid;
  grid.steps = fine.steps() / stride;
  grid.step = fine.step() * static_cast<double>(stride);
  GPath coarse = GPath::zero(grid, fine.dims);
  for (std::size_t d = 0; d < fine.dims; ++d) {
    auto src = fine.component(d);
    auto dst = coarse.component(d);
    for (std::size_t n = 0; n <= grid.steps; ++n) dst[n] = src[n * stride];
  }
  return coarse;
}

GPath coarsen_path(const GPath& fine) { return subsample_path(fine, 2); }

}  // namespace fgle
