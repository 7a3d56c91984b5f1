#pragma once

// Sum-of-exponentials (SOE) approximation of the power kernel t^{alpha-1}.
//
//   t^{alpha-1} ~= sum_i w_i exp(-s_i t),   t in [delta, T],
//
// with every s_i, w_i > 0 and a sup-norm error certified at construction.

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace fgle {

struct SoeKernel {
  double alpha = 0.5;
  double delta = 0.0;
  double horizon = 0.0;    // T
  double tolerance = 0.0;  // certified sup error on [delta, T]
  std::vector<double> exponents;
  std::vector<double> weights;

  std::size_t size() const noexcept { return exponents.size(); }
};

struct SoeOptions {
  std::size_t certification_points = 10000;
  std::size_t node_budget = 512;
  /// Largest Gauss rule tried for compressing the small-exponent tail.
  std::size_t max_lump_order = 8;
  bool drop_negligible = true;
};

/// Builds a certified kernel for t^{alpha-1} on [delta, T] at tolerance eps.
///
/// The kernel comes from t^{alpha-1} = (1/Gamma(1-alpha)) int_R exp(-t e^u)
/// e^{(1-alpha)u} du. The u-axis is discretized by the trapezoidal rule
/// (geometrically graded in s = e^u), the cluster of small exponents below a
/// cutoff is replaced by the Gauss rule of its discrete measure, and nodes
/// that contribute nothing are dropped. Step size, cutoff and Gauss order are
/// searched until the sup error on a geometric grid is at most eps.
/// Throws DomainError on bad arguments and CertificationError when no kernel
/// within options.node_budget nodes meets eps.
SoeKernel build_soe(double alpha, double eps, double delta, double horizon, const SoeOptions& options = {});

/// sum_i w_i exp(-s_i t); throws DomainError outside [delta, T].
double eval_soe(const SoeKernel& kernel, double t);

/// max |t^{alpha-1} - eval_soe(t)| over `grid_size` geometric points on [delta, T].
double certify_soe(const SoeKernel& kernel, std::size_t grid_size = 10000);

/// The piecewise kernel used by the fast scheme:
///   gamma(t) = t^{alpha-1}/Gamma(alpha)         for 0 < t <= step,
///   gamma(t) = sum_i w_i e^{-s_i t}/Gamma(alpha) for step < t <= T.
struct SchemeKernel {
  SoeKernel soe;
  double step = 0.0;
};

/// Throws MismatchError unless soe.delta equals step.
SchemeKernel make_scheme_kernel(SoeKernel soe, double step);

double eval_scheme_kernel(const SchemeKernel& kernel, double t);

/// Tolerance k^{min(3/2 - H, 3 - 3H)} matched to the scheme's strong order.
double scheme_tolerance(double step, double hurst);

nlohmann::json to_json(const SoeKernel& kernel);
/// Parses and re-certifies; throws ConfigError on schema problems and
/// CertificationError if the stored nodes do not meet the stored eps.
SoeKernel soe_from_json(const nlohmann::json& doc);

}  // namespace fgle
