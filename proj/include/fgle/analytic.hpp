#pragma once

// Reference solution of the harmonic case b(x) = -x on a fine grid:
//
//   x(t_n) = x0 e(t_n) + G(t_n) + sum_{i=1..n} G(t_n - t_i) (e(t_i) - e(t_{i-1})),
//
// with e(t) = E_alpha(-t^alpha).

#include <cstddef>
#include <vector>

#include "fgle/fbm.hpp"
#include "fgle/solver.hpp"

namespace fgle {

/// e(t_i) on the fine grid, computed once per (alpha, step, steps).
struct RelaxationTable {
  double alpha = 0.5;
  double step = 0.0;
  std::vector<double> values;      // e(t_i), i = 0..steps
  std::vector<double> increments;  // e(t_i) - e(t_{i-1}), i = 1..steps

  static RelaxationTable build(double alpha, double step, std::size_t steps);
  std::size_t steps() const noexcept { return increments.size(); }
};

struct ReferenceSolution {
  double step = 0.0;        // fine step k_m
  std::size_t stride = 1;   // values are kept at every stride-th fine node
  std::size_t dim = 1;
  /// Row-major: values[j * dim + d] = x_ref(j * stride * step) component d.
  std::vector<double> values;

  std::size_t nodes() const noexcept { return values.size() / dim; }
  double spacing() const noexcept { return step * static_cast<double>(stride); }
  double at(std::size_t j, std::size_t d = 0) const { return values[j * dim + d]; }
};

/// Evaluates the reference at fine nodes 0, stride, 2 stride, ... for each
/// component of `fine`. Throws MismatchError if the table does not match the
/// noise grid or stride does not divide the number of steps.
ReferenceSolution exact_harmonic(const GPath& fine, const std::vector<double>& x0, const RelaxationTable& table,
                                 std::size_t stride = 1);

/// Ensemble accumulator for sqrt(E|x_n - x(t_n)|^2) on one scheme grid.
class StrongErrorAccumulator {
 public:
  StrongErrorAccumulator() = default;
  explicit StrongErrorAccumulator(std::size_t nodes) : sum_sq_(nodes, 0.0), sum_quad_(nodes, 0.0) {}

  /// Adds one path. The trajectory grid must nest in the reference grid.
  void add(const Trajectory& traj, const ReferenceSolution& ref);
  /// Adds another accumulator; merging in a fixed order keeps sums reproducible.
  void merge(const StrongErrorAccumulator& other);

  std::size_t paths() const noexcept { return paths_; }
  std::size_t nodes() const noexcept { return sum_sq_.size(); }
  /// Root-mean-square error at each node.
  std::vector<double> rms() const;
  /// max_n rms()[n].
  double sup() const;
  /// Index of the node that attains sup().
  std::size_t sup_index() const;
  /// Standard error of the mean squared error at node n.
  double mse_standard_error(std::size_t n) const;

 private:
  std::vector<double> sum_sq_;    // sum over paths of |e_n|^2
  std::vector<double> sum_quad_;  // sum over paths of |e_n|^4
  std::size_t paths_ = 0;
};

struct StrongError {
  std::vector<double> rms;
  double sup = 0.0;
  std::size_t paths = 0;
};

/// One-shot form over an ensemble of (trajectory, reference) pairs.
StrongError strong_error(const std::vector<Trajectory>& trajectories, const std::vector<ReferenceSolution>& refs);

}  // namespace fgle
