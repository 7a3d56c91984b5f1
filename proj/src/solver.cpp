#include "fgle/solver.hpp"

#include <cmath>
#include <string>

#include "fgle/error.hpp"

namespace fgle {

namespace {

void check_noise(const FgleProblem& problem, const GPath& noise) {
  problem.validate();
  if (noise.dims != problem.dim) {
    throw MismatchError("noise has " + std::to_string(noise.dims) + " components, problem has dimension " +
                        std::to_string(problem.dim));
  }
  if (noise.steps() < 1 || !(noise.step() > 0.0)) throw MismatchError("noise grid is empty");
  if (noise.values.size() != noise.dims * (noise.steps() + 1)) throw MismatchError("noise storage has wrong size");
}

void check_finite(std::span<const double> x, std::size_t n) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFiniteStateError(n, "state became non-finite");
  }
}

// Sum a[i] * b[i] with four interleaved accumulators.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

// a_m = k^alpha/Gamma(1+alpha) ((m+1)^alpha - m^alpha), m = 0..count-1.
std::vector<double> lag_weights(std::size_t count, double alpha, double step) {
  std::vector<double> a(count);
  if (alpha == 1.0) {
    for (double& v : a) v = step;
    return a;
  }
  const double scale = std::pow(step, alpha) / std::tgamma(1.0 + alpha);
  for (std::size_t m = 0; m < count; ++m) {
    if (m == 0) {
      a[m] = scale;
    } else {
      const double md = static_cast<double>(m);
      a[m] = scale * std::pow(md, alpha) * std::expm1(alpha * std::log1p(1.0 / md));
    }
  }
  return a;
}

}  // namespace

FgleProblem FgleProblem::physical(double hurst, ForceField force, std::vector<double> x0) {
  FgleProblem p;
  p.dim = force.dim;
  p.hurst = hurst;
  p.alpha = 2.0 - 2.0 * hurst;
  p.sigma = std::sqrt(2.0 / std::tgamma(2.0 * hurst + 1.0));
  p.force = std::move(force);
  p.x0 = std::move(x0);
  return p;
}

bool FgleProblem::is_physical() const noexcept { return fgle::is_physical(hurst, alpha, sigma); }

void FgleProblem::validate() const {
  if (dim == 0) throw DomainError("problem dimension must be positive");
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst index must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (!force.drift) throw MismatchError("problem has no force field");
  if (force.dim != dim) {
    throw MismatchError("force '" + force.name + "' is " + std::to_string(force.dim) + "-dimensional, problem is " +
                        std::to_string(dim) + "-dimensional");
  }
  if (x0.size() != dim) throw MismatchError("initial value has " + std::to_string(x0.size()) + " components");
}

const char* scheme_name(Scheme scheme) noexcept { return scheme == Scheme::direct ? "direct" : "fast"; }

std::vector<double> direct_weights(std::size_t n, double alpha, double step) {
  if (n == 0) throw DomainError("direct weights need n >= 1");
  const std::vector<double> a = lag_weights(n, alpha, step);
  std::vector<double> w(n);
  for (std::size_t j = 1; j <= n; ++j) w[j - 1] = a[n - j];
  return w;
}

Trajectory solve_direct(const FgleProblem& problem, const GPath& noise) {
  check_noise(problem, noise);
  const std::size_t steps = noise.steps(), dim = problem.dim;
  const double step = noise.step();

  // reversed[steps - 1 - m] = a_m, so x_n's history is a contiguous dot
  // product of reversed[steps - n ..] with b(x_0..x_{n-1}).
  const std::vector<double> a = lag_weights(steps, problem.alpha, step);
  std::vector<double> reversed(a.rbegin(), a.rend());

  Trajectory traj{step, steps, dim, Scheme::direct, std::vector<double>((steps + 1) * dim)};
  std::vector<double> history(dim * steps);  // history[d * steps + j] = b_d(x_j)
  std::vector<double> b(dim);
  std::copy(problem.x0.begin(), problem.x0.end(), traj.states.begin());

  for (std::size_t n = 1; n <= steps; ++n) {
    problem.force.drift(traj.state(n - 1), b);
    for (std::size_t d = 0; d < dim; ++d) history[d * steps + n - 1] = b[d];
    for (std::size_t d = 0; d < dim; ++d) {
      const double drift = dot(reversed.data() + (steps - n), history.data() + d * steps, n);
      traj.states[n * dim + d] = problem.x0[d] + drift + noise.at(d, n);
    }
    check_finite(traj.state(n), n);
  }
  return traj;
}

double mode_load(double exponent, double alpha, double step) {
  const double decay = std::exp(-exponent * step);
  return decay * -std::expm1(-exponent * step) / (exponent * std::tgamma(alpha));
}

FastStepper::FastStepper(const FgleProblem& problem, const SchemeKernel& kernel) : problem_(&problem) {
  problem.validate();
  if (std::abs(kernel.soe.alpha - problem.alpha) > 1e-12) {
    throw MismatchError("kernel alpha " + std::to_string(kernel.soe.alpha) + " differs from problem alpha " +
                        std::to_string(problem.alpha));
  }
  const double step = kernel.step;
  const std::size_t m = kernel.soe.size();
  weight_ = kernel.soe.weights;
  decay_.resize(m);
  load_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    decay_[i] = std::exp(-kernel.soe.exponents[i] * step);
    load_[i] = mode_load(kernel.soe.exponents[i], problem.alpha, step);
  }
  local_ = std::pow(step, problem.alpha) / std::tgamma(1.0 + problem.alpha);
  modes_.modes = m;
  modes_.dim = problem.dim;
  reset();
}

void FastStepper::reset() {
  const std::size_t dim = problem_->dim;
  n_ = 0;
  x_ = problem_->x0;
  b_.assign(dim, 0.0);
  b_prev_.assign(dim, 0.0);
  has_prev_ = false;
  modes_.eta.assign(modes_.modes * dim, 0.0);
}

std::span<const double> FastStepper::advance(std::span<const double> noise_value) {
  const std::size_t dim = problem_->dim;
  const std::size_t m = modes_.modes;
  problem_->force.drift(x_, b_);

  std::vector<double>& eta = modes_.eta;
  std::vector<double>& history = history_;
  history.assign(dim, 0.0);
  if (has_prev_) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        double& e = eta[i * dim + d];
        e = decay_[i] * e + load_[i] * b_prev_[d];
        history[d] += weight_[i] * e;
      }
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    const double drift = local_ * b_[d] + history[d];
    x_[d] = problem_->x0[d] + drift + noise_value[d];
  }
  ++n_;
  check_finite(x_, n_);
  std::swap(b_prev_, b_);
  has_prev_ = true;
  return x_;
}

namespace {

void check_kernel(const FgleProblem& problem, const GPath& noise, const SchemeKernel& kernel) {
  check_noise(problem, noise);
  if (std::abs(kernel.step - noise.step()) > 1e-12 * noise.step()) {
    throw MismatchError("kernel step " + std::to_string(kernel.step) + " differs from noise step " +
                        std::to_string(noise.step()));
  }
  if (noise.grid.horizon() > kernel.soe.horizon * (1.0 + 1e-12)) {
    throw MismatchError("kernel is certified up to T=" + std::to_string(kernel.soe.horizon) + " but the run ends at " +
                        std::to_string(noise.grid.horizon()));
  }
}

}  // namespace

Trajectory solve_fast(const FgleProblem& problem, const GPath& noise, const SchemeKernel& kernel) {
  check_kernel(problem, noise, kernel);
  const std::size_t steps = noise.steps(), dim = problem.dim;
  FastStepper stepper(problem, kernel);
  Trajectory traj{noise.step(), steps, dim, Scheme::fast, std::vector<double>((steps + 1) * dim)};
  std::copy(problem.x0.begin(), problem.x0.end(), traj.states.begin());
  std::vector<double> g(dim);
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::size_t d = 0; d < dim; ++d) g[d] = noise.at(d, n);
    const auto x = stepper.advance(g);
    std::copy(x.begin(), x.end(), traj.states.begin() + static_cast<std::ptrdiff_t>(n * dim));
  }
  return traj;
}

std::vector<double> solve_fast_snapshots(const FgleProblem& problem, const GPath& noise, const SchemeKernel& kernel,
                                         std::span<const std::size_t> indices) {
  check_kernel(problem, noise, kernel);
  const std::size_t steps = noise.steps(), dim = problem.dim;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] > steps || (i > 0 && indices[i] < indices[i - 1])) {
      throw DomainError("snapshot indices must be ascending and at most " + std::to_string(steps));
    }
  }
  FastStepper stepper(problem, kernel);
  std::vector<double> out;
  out.reserve(indices.size() * dim);
  std::vector<double> g(dim);
  std::size_t next = 0;
  auto record = [&](std::size_t n) {
    while (next < indices.size() && indices[next] == n) {
      const auto x = stepper.state();
      out.insert(out.end(), x.begin(), x.end());
      ++next;
    }
  };
  record(0);
  const std::size_t last = indices.empty() ? 0 : indices.back();
  for (std::size_t n = 1; n <= last; ++n) {
    for (std::size_t d = 0; d < dim; ++d) g[d] = noise.at(d, n);
    stepper.advance(g);
    record(n);
  }
  return out;
}

SchemeKernel scheme_kernel_for(double alpha, double step, double horizon, double eps) {
  return make_scheme_kernel(build_soe(alpha, eps, step, horizon), step);
}

}  // namespace fgle
