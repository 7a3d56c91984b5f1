#pragma once

// Mittag-Leffler function E_alpha(z) = sum_n z^n / Gamma(1 + n alpha) on the
// half-line z <= 0, and the relaxation function e(t) = E_alpha(-t^alpha).

#include <cstddef>
#include <vector>

namespace fgle {

struct MlParams {
  double alpha = 0.5;
  /// Series terms below this magnitude (after the peak term) are dropped.
  double series_tol = 1e-17;
  /// |z| at which evaluation switches from the series to the asymptotic
  /// expansion.
  double crossover = 0.0;

  /// Parameters with crossover = ml_crossover(alpha).
  static MlParams for_alpha(double alpha);
};

enum class MlRegime { exact, series, asymptotic };

struct MlEvaluation {
  double value = 0.0;
  double error_estimate = 0.0;
  MlRegime regime = MlRegime::exact;
};

/// Smallest x at which the asymptotic error estimate is <= 1e-10, times 2.
/// Beyond it the asymptotic expansion is accurate; below it the series is
/// summed, in multiple precision when its terms are large.
double ml_crossover(double alpha);

/// E_alpha(-x) from the power series. Summation is compensated in double
/// while the largest term is at most 10, otherwise done in MPFR with enough
/// bits to absorb the cancellation.
MlEvaluation ml_series(double alpha, double x, double series_tol = 1e-17);

/// E_alpha(-x) ~ sum_{m>=1} (-1)^{m+1} x^{-m} / Gamma(1 - m alpha), truncated
/// before the smallest term. The error estimate is that term plus
/// exp(-x^{1/alpha}), the size of the part the expansion cannot represent.
MlEvaluation ml_asymptotic(double alpha, double x);

/// E_alpha(z) for alpha in (0, 1] and z <= 0. Throws DomainError outside
/// that range and AccuracyError when the error estimate exceeds 1e-8.
MlEvaluation mittag_leffler_eval(const MlParams& params, double z);
double mittag_leffler(const MlParams& params, double z);
double mittag_leffler(double alpha, double z);

/// e(t) = E_alpha(-t^alpha), t >= 0.
double e_alpha1(double alpha, double t);

/// e(t_i) for t_i = i * step, i = 0..steps.
std::vector<double> e_alpha1_values(double alpha, double step, std::size_t steps);

/// e(t_i) - e(t_{i-1}) for i = 1..steps, by differencing e_alpha1_values.
std::vector<double> e_alpha1_increments(double alpha, double step, std::size_t steps);

}  // namespace fgle
