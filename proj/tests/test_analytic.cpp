#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fgle/analytic.hpp"
#include "fgle/error.hpp"
#include "fgle/fbm.hpp"
#include "fgle/forces.hpp"
#include "fgle/mittag.hpp"
#include "fgle/solver.hpp"

using namespace fgle;

TEST(ExactHarmonic, ZeroNoiseIsRelaxation) {
  const double h = 0.7, alpha = 2 - 2 * h, k = 0x1p-8;
  const FbmGrid grid{512, k, h, 1};
  const RelaxationTable table = RelaxationTable::build(alpha, k, 512);
  const ReferenceSolution ref = exact_harmonic(GPath::zero(grid, 2), {1.5, -2.0}, table, 4);
  ASSERT_EQ(ref.nodes(), 129u);
  for (std::size_t j = 0; j < ref.nodes(); ++j) {
    const double e = e_alpha1(alpha, j * 4 * k);
    EXPECT_NEAR(ref.at(j, 0), 1.5 * e, 1e-15);
    EXPECT_NEAR(ref.at(j, 1), -2.0 * e, 1e-15);
  }
  const ReferenceSolution zero = exact_harmonic(PhysicalNoiseSampler(512, k, h, 1).sample(4), {0.0}, table);
  EXPECT_EQ(zero.at(0), 0.0);
}

TEST(ExactHarmonic, OrnsteinUhlenbeckWithSmoothForcing) {
  // alpha = 1, G(t) = sin(3t): x(t) = x0 e^{-t} + G(t) - int_0^t e^{-(t-s)} G(s) ds.
  const std::size_t steps = 4096;
  const double k = 1.0 / 1024, x0 = 0.5;
  const FbmGrid grid{steps, k, 0.5, 1};
  std::vector<double> g(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) g[n] = std::sin(3.0 * n * k);
  const GPath path = GPath::from_components(grid, {g});
  const ReferenceSolution ref = exact_harmonic(path, {x0}, RelaxationTable::build(1.0, k, steps), 16);
  for (std::size_t j = 0; j < ref.nodes(); ++j) {
    const double t = j * 16 * k;
    const double conv = (std::sin(3 * t) - 3 * std::cos(3 * t) + 3 * std::exp(-t)) / 10;
    const double exact = x0 * std::exp(-t) + std::sin(3 * t) - conv;
    EXPECT_NEAR(ref.at(j), exact, 5 * k) << t;
  }
}

namespace {

// sup rms gap between the references at k_m and 2 k_m, and the sup rms error
// of the direct scheme at k = 2^-9, over 40 shared noise paths.
struct ReferenceGap {
  double gap = 0.0;
  double scheme = 0.0;
};

ReferenceGap reference_gap(double h, std::size_t fine_steps) {
  const double fine_k = 1.0 / static_cast<double>(fine_steps);
  const std::size_t stride = fine_steps / 512;
  const RelaxationTable t_fine = RelaxationTable::build(2 - 2 * h, fine_k, fine_steps);
  const RelaxationTable t_coarse = RelaxationTable::build(2 - 2 * h, 2 * fine_k, fine_steps / 2);
  const PhysicalNoiseSampler sampler(fine_steps, fine_k, h, 1);
  const FgleProblem prob = FgleProblem::physical(h, make_force("harmonic"), {1.0});
  StrongErrorAccumulator ref_gap, scheme_err;
  for (std::uint64_t p = 0; p < 40; ++p) {
    const GPath fine = sampler.sample(derive_seed(13, p));
    const ReferenceSolution a = exact_harmonic(fine, {1.0}, t_fine, stride);
    const ReferenceSolution b = exact_harmonic(coarsen_path(fine), {1.0}, t_coarse, stride / 2);
    ref_gap.add(Trajectory{0x1p-9, 512, 1, Scheme::direct, a.values}, b);
    scheme_err.add(solve_direct(prob, subsample_path(fine, stride)), a);
  }
  return {ref_gap.sup(), scheme_err.sup()};
}

}  // namespace

// The reference at k_m and at k_m / 2 must differ by less than 10% of the
// error of the finest scheme step it is compared with.
TEST(ExactHarmonic, FineStepIsConvergedAtDefaultReferenceStep) {
  for (double h : {0.6, 0.8}) {
    const ReferenceGap g = reference_gap(h, 8192);
    EXPECT_LT(g.gap, 0.1 * g.scheme) << "H = " << h << ": ratio " << g.gap / g.scheme;
  }
}

TEST(ExactHarmonic, FineStepIsConvergedAtFinerReferenceStep) {
  for (double h : {0.6, 0.8}) {
    const ReferenceGap g = reference_gap(h, 65536);
    EXPECT_LT(g.gap, 0.1 * g.scheme) << "H = " << h << ": ratio " << g.gap / g.scheme;
  }
}

TEST(ExactHarmonic, RejectsMismatches) {
  const FbmGrid grid{64, 0.01, 0.7, 1};
  const RelaxationTable table = RelaxationTable::build(0.6, 0.01, 64);
  EXPECT_THROW(exact_harmonic(GPath::zero(grid, 1), {1.0, 2.0}, table), MismatchError);
  EXPECT_THROW(exact_harmonic(GPath::zero(grid, 1), {1.0}, RelaxationTable::build(0.6, 0.02, 64)), MismatchError);
  EXPECT_THROW(exact_harmonic(GPath::zero(grid, 1), {1.0}, RelaxationTable::build(0.6, 0.01, 32)), MismatchError);
  EXPECT_THROW(exact_harmonic(GPath::zero(grid, 1), {1.0}, table, 3), MismatchError);
}

TEST(StrongErrorAccumulator, IdenticalTrajectoryHasNoError) {
  const double h = 0.7, k = 0x1p-8;
  const GPath g = PhysicalNoiseSampler(256, k, h, 1).sample(8);
  FgleProblem p = FgleProblem::physical(h, make_force("harmonic"), {1.0});
  const Trajectory t = solve_direct(p, g);
  ReferenceSolution ref{k, 1, 1, t.states};
  StrongErrorAccumulator acc;
  acc.add(t, ref);
  EXPECT_EQ(acc.sup(), 0.0);
  EXPECT_EQ(acc.paths(), 1u);
}

TEST(StrongErrorAccumulator, KnownOffsets) {
  // Errors +1 and -3 at every node: rms = sqrt(5).
  Trajectory t{0.5, 2, 1, Scheme::direct, {1.0, 1.0, 1.0}};
  Trajectory u{0.5, 2, 1, Scheme::direct, {-3.0, -3.0, -3.0}};
  ReferenceSolution ref{0.25, 1, 1, {0.0, 0.0, 0.0, 0.0, 0.0}};
  StrongErrorAccumulator a, b;
  a.add(t, ref);
  b.add(u, ref);
  a.merge(b);
  for (double r : a.rms()) EXPECT_DOUBLE_EQ(r, std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(a.mse_standard_error(0), std::sqrt(32.0 / 2.0));
  const StrongError one_shot = strong_error({t, u}, {ref, ref});
  EXPECT_EQ(one_shot.rms, a.rms());
}

TEST(StrongErrorAccumulator, StandardErrorShrinksWithPaths) {
  const double h = 0.8, fine_k = 0x1p-9;
  const PhysicalNoiseSampler sampler(512, fine_k, h, 1);
  const RelaxationTable table = RelaxationTable::build(2 - 2 * h, fine_k, 512);
  FgleProblem p = FgleProblem::physical(h, make_force("harmonic"), {1.0});
  StrongErrorAccumulator small, large;
  for (std::uint64_t i = 0; i < 1600; ++i) {
    const GPath fine = sampler.sample(derive_seed(5, i));
    const ReferenceSolution ref = exact_harmonic(fine, {1.0}, table, 8);
    const Trajectory t = solve_direct(p, subsample_path(fine, 8));
    if (i < 400) small.add(t, ref);
    large.add(t, ref);
  }
  const std::size_t n = small.nodes() - 1;
  const double ratio = small.mse_standard_error(n) / large.mse_standard_error(n);
  EXPECT_GT(ratio, 1.5);
  EXPECT_LT(ratio, 2.6);
}

TEST(StrongErrorAccumulator, RejectsMismatchedGrids) {
  ReferenceSolution ref{0.25, 1, 1, {0.0, 0.0, 0.0, 0.0, 0.0}};
  StrongErrorAccumulator acc;
  EXPECT_THROW(acc.add(Trajectory{0.3, 2, 1, Scheme::direct, {0.0, 0.0, 0.0}}, ref), MismatchError);
  EXPECT_THROW(acc.add(Trajectory{0.5, 4, 1, Scheme::direct, std::vector<double>(5)}, ref), MismatchError);
  EXPECT_THROW(acc.add(Trajectory{0.25, 2, 2, Scheme::direct, std::vector<double>(6)}, ref), MismatchError);
  acc.add(Trajectory{0.5, 2, 1, Scheme::direct, {0.0, 0.0, 0.0}}, ref);
  EXPECT_THROW(acc.add(Trajectory{0.25, 4, 1, Scheme::direct, std::vector<double>(5)}, ref), MismatchError);
  StrongErrorAccumulator other;
  other.add(Trajectory{0.25, 4, 1, Scheme::direct, std::vector<double>(5)}, ref);
  EXPECT_THROW(acc.merge(other), MismatchError);
  EXPECT_THROW(strong_error({}, {ref}), MismatchError);
}
