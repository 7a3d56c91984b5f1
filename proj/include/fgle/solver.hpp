#pragma once

// Time-stepping for the overdamped fractional Langevin equation
//
//   x(t) = x0 + (1/Gamma(alpha)) int_0^t (t-s)^{alpha-1} b(x(s)) ds + G(t).
//
// solve_direct evaluates the full history sum (O(N^2)); solve_fast replaces
// the history by M exponential modes (O(N M)).

#include <cstddef>
#include <span>
#include <vector>

#include "fgle/fbm.hpp"
#include "fgle/forces.hpp"
#include "fgle/soe.hpp"

namespace fgle {

struct FgleProblem {
  std::size_t dim = 1;
  double hurst = 0.75;
  double alpha = 0.5;
  double sigma = 1.0;
  ForceField force;
  std::vector<double> x0;

  /// alpha = 2 - 2H and sigma = sqrt(2/Gamma(2H+1)).
  static FgleProblem physical(double hurst, ForceField force, std::vector<double> x0);

  bool is_physical() const noexcept;
  /// Throws DomainError or MismatchError for inconsistent fields.
  void validate() const;
};

enum class Scheme { direct, fast };

const char* scheme_name(Scheme scheme) noexcept;

struct Trajectory {
  double step = 0.0;
  std::size_t steps = 0;
  std::size_t dim = 1;
  Scheme scheme = Scheme::direct;
  /// Row-major: states[n * dim + d] = x_n component d, n = 0..steps.
  std::vector<double> states;

  double time(std::size_t n) const noexcept { return static_cast<double>(n) * step; }
  std::span<const double> state(std::size_t n) const { return {states.data() + n * dim, dim}; }
  double at(std::size_t n, std::size_t d = 0) const { return states[n * dim + d]; }
};

/// w_j = k^alpha/Gamma(1+alpha) ((n-j+1)^alpha - (n-j)^alpha), j = 1..n.
std::vector<double> direct_weights(std::size_t n, double alpha, double step);

Trajectory solve_direct(const FgleProblem& problem, const GPath& noise);

/// Auxiliary history states eta_i^n, one row of dim values per mode.
struct AuxModes {
  std::size_t modes = 0;
  std::size_t dim = 1;
  std::vector<double> eta;  // eta[i * dim + d]

  double at(std::size_t i, std::size_t d = 0) const { return eta[i * dim + d]; }
};

/// One-step propagator of the fast scheme. With eta^1 = 0,
///   x_n       = x0 + k^alpha/Gamma(1+alpha) b(x_{n-1}) + sum_i w_i eta_i^n + G(t_n),
///   eta^{n+1} = e^{-s_i k} eta^n + q_i b(x_{n-1}),
///   q_i       = (e^{-s_i k} - e^{-2 s_i k}) / (s_i Gamma(alpha)).
/// The kernel may be shared by many steppers.
class FastStepper {
 public:
  FastStepper(const FgleProblem& problem, const SchemeKernel& kernel);

  /// Restarts at x_0 = problem.x0.
  void reset();
  /// Computes x_{n+1} from the current state and G(t_{n+1}) and returns it.
  std::span<const double> advance(std::span<const double> noise_value);

  std::size_t index() const noexcept { return n_; }
  std::span<const double> state() const noexcept { return x_; }
  /// eta^{index()}, the history term that produced the current state.
  const AuxModes& modes() const noexcept { return modes_; }

 private:
  const FgleProblem* problem_;
  std::vector<double> weight_;  // w_i
  std::vector<double> decay_;   // e^{-s_i k}
  std::vector<double> load_;    // q_i
  double local_;                // k^alpha / Gamma(1+alpha)
  std::size_t n_ = 0;
  std::vector<double> x_, b_, b_prev_, history_;
  bool has_prev_ = false;
  AuxModes modes_;
};

/// q_i in closed form; equals (1/Gamma(alpha)) int_{t_{n-1}}^{t_n} e^{-s(t_{n+1}-u)} du.
double mode_load(double exponent, double alpha, double step);

Trajectory solve_fast(const FgleProblem& problem, const GPath& noise, const SchemeKernel& kernel);

/// Streaming form of solve_fast: keeps O(M d) state and returns the states at
/// the requested grid indices (ascending), row-major with dim values each.
std::vector<double> solve_fast_snapshots(const FgleProblem& problem, const GPath& noise, const SchemeKernel& kernel,
                                         std::span<const std::size_t> indices);

/// Builds the scheme kernel for step k on [k, T] at tolerance eps.
SchemeKernel scheme_kernel_for(double alpha, double step, double horizon, double eps);

}  // namespace fgle
