#include "fgle/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgle/error.hpp"
#include "fgle/mittag.hpp"

namespace fgle {

RelaxationTable RelaxationTable::build(double alpha, double step, std::size_t steps) {
  RelaxationTable t;
  t.alpha = alpha;
  t.step = step;
  t.values = e_alpha1_values(alpha, step, steps);
  t.increments.resize(steps);
  for (std::size_t i = 1; i <= steps; ++i) t.increments[i - 1] = t.values[i] - t.values[i - 1];
  return t;
}

ReferenceSolution exact_harmonic(const GPath& fine, const std::vector<double>& x0, const RelaxationTable& table,
                                 std::size_t stride) {
  const std::size_t steps = fine.steps(), dim = fine.dims;
  if (x0.size() != dim) throw MismatchError("initial value size differs from noise dimension");
  if (table.steps() != steps || std::abs(table.step - fine.step()) > 1e-12 * fine.step()) {
    throw MismatchError("relaxation table does not match the noise grid");
  }
  if (stride == 0 || steps % stride != 0) {
    throw MismatchError("stride " + std::to_string(stride) + " does not divide " + std::to_string(steps) + " steps");
  }

  // reversed[steps - i] = e(t_i) - e(t_{i-1}), so the sum over i for node n is
  // the contiguous product sum_j G(t_j) reversed[steps - n + j], j = 0..n-1.
  std::vector<double> reversed(table.increments.rbegin(), table.increments.rend());

  ReferenceSolution ref;
  ref.step = fine.step();
  ref.stride = stride;
  ref.dim = dim;
  const std::size_t nodes = steps / stride + 1;
  ref.values.resize(nodes * dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto g = fine.component(d);
    for (std::size_t j = 0; j < nodes; ++j) {
      const std::size_t n = j * stride;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      const double* w = reversed.data() + (steps - n);
      std::size_t i = 0;
      for (; i + 4 <= n; i += 4) {
        s0 += g[i] * w[i];
        s1 += g[i + 1] * w[i + 1];
        s2 += g[i + 2] * w[i + 2];
        s3 += g[i + 3] * w[i + 3];
      }
      for (; i < n; ++i) s0 += g[i] * w[i];
      ref.values[j * dim + d] = x0[d] * table.values[n] + g[n] + ((s0 + s1) + (s2 + s3));
    }
  }
  return ref;
}

void StrongErrorAccumulator::add(const Trajectory& traj, const ReferenceSolution& ref) {
  if (traj.dim != ref.dim) throw MismatchError("trajectory and reference dimensions differ");
  const double ratio = traj.step / ref.spacing();
  const auto r = static_cast<std::size_t>(std::llround(ratio));
  if (r == 0 || std::abs(ratio - static_cast<double>(r)) > 1e-9) {
    throw MismatchError("trajectory step " + std::to_string(traj.step) + " is not a multiple of the reference spacing " +
                        std::to_string(ref.spacing()));
  }
  if (traj.steps * r + 1 > ref.nodes()) throw MismatchError("trajectory extends beyond the reference");
  if (sum_sq_.empty() && paths_ == 0) {
    sum_sq_.assign(traj.steps + 1, 0.0);
    sum_quad_.assign(traj.steps + 1, 0.0);
  }
  if (sum_sq_.size() != traj.steps + 1) throw MismatchError("trajectory length differs from earlier paths");
  for (std::size_t n = 0; n <= traj.steps; ++n) {
    double e2 = 0.0;
    for (std::size_t d = 0; d < traj.dim; ++d) {
      const double e = traj.at(n, d) - ref.at(n * r, d);
      e2 += e * e;
    }
    sum_sq_[n] += e2;
    sum_quad_[n] += e2 * e2;
  }
  ++paths_;
}

void StrongErrorAccumulator::merge(const StrongErrorAccumulator& other) {
  if (other.paths_ == 0) return;
  if (paths_ == 0 && sum_sq_.empty()) {
    *this = other;
    return;
  }
  if (other.sum_sq_.size() != sum_sq_.size()) throw MismatchError("cannot merge accumulators of different grids");
  for (std::size_t n = 0; n < sum_sq_.size(); ++n) {
    sum_sq_[n] += other.sum_sq_[n];
    sum_quad_[n] += other.sum_quad_[n];
  }
  paths_ += other.paths_;
}

std::vector<double> StrongErrorAccumulator::rms() const {
  std::vector<double> out(sum_sq_.size(), 0.0);
  if (paths_ == 0) return out;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = std::sqrt(sum_sq_[n] / static_cast<double>(paths_));
  return out;
}

double StrongErrorAccumulator::sup() const {
  const auto r = rms();
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

std::size_t StrongErrorAccumulator::sup_index() const {
  const auto r = rms();
  return r.empty() ? 0 : static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

double StrongErrorAccumulator::mse_standard_error(std::size_t n) const {
  if (paths_ < 2) return 0.0;
  const double p = static_cast<double>(paths_);
  const double mean = sum_sq_[n] / p;
  const double var = std::max(0.0, (sum_quad_[n] / p - mean * mean) * p / (p - 1.0));
  return std::sqrt(var / p);
}

StrongError strong_error(const std::vector<Trajectory>& trajectories, const std::vector<ReferenceSolution>& refs) {
  if (trajectories.size() != refs.size()) throw MismatchError("need one reference per trajectory");
  StrongErrorAccumulator acc;
  for (std::size_t p = 0; p < trajectories.size(); ++p) acc.add(trajectories[p], refs[p]);
  return {acc.rms(), acc.sup(), acc.paths()};
}

}  // namespace fgle
