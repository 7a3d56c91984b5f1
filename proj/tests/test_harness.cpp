#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fgle/error.hpp"
#include "fgle/forces.hpp"
#include "fgle/harness.hpp"

using namespace fgle;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ConvergenceConfig small_convergence() {
  ConvergenceConfig c;
  c.hursts = {0.8};
  c.steps = {0x1p-6, 0x1p-5, 0x1p-4};
  c.reference_step = 0x1p-9;
  c.paths = 60;
  c.chunk = 7;
  return c;
}

ErgodicityConfig small_ergodicity() {
  ErgodicityConfig c;
  c.step = 0x1p-5;
  c.horizon = 2.0;
  c.paths = 120;
  c.bins = {10};
  c.chunk = 16;
  c.snapshots = {0.0, 0.5, 1.0, 2.0};
  return c;
}

}  // namespace

TEST(TheoreticalOrder, Examples) {
  EXPECT_NEAR(theoretical_order(0.8), 0.6, 1e-15);
  EXPECT_NEAR(theoretical_order(0.6), 0.9, 1e-15);
  EXPECT_NEAR(theoretical_order(0.75), 0.75, 1e-15);
  EXPECT_TRUE(order_has_log_factor(0.75));
  EXPECT_FALSE(order_has_log_factor(0.8));
  EXPECT_THROW(theoretical_order(0.5), DomainError);
  EXPECT_THROW(theoretical_order(1.0), DomainError);
}

TEST(FitLine, ExactAndNoisyLines) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 * v - 1.0);
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.5, 1e-14);
  EXPECT_NEAR(f.intercept, -1.0, 1e-13);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-7);
  EXPECT_EQ(f.points, 5u);

  // y = x + (+1, -1, -1, +1): slope 1, residual sum of squares 4.
  const std::vector<double> x2{0, 1, 2, 3}, y2{1, 0, 1, 4};
  const LineFit g = fit_line(x2, y2);
  EXPECT_NEAR(g.slope, 1.0, 1e-14);
  EXPECT_NEAR(g.intercept, 0.0, 1e-14);
  EXPECT_NEAR(g.r2, 1.0 - 4.0 / 9.0, 1e-14);
  EXPECT_NEAR(g.slope_stderr, std::sqrt(4.0 / 2.0 / 5.0), 1e-14);
  EXPECT_THROW(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST(ParallelChunks, OrderedResultsAndErrors) {
  auto sums = parallel_chunks<long>(103, 10, 4, [](std::size_t b, std::size_t e) {
    long s = 0;
    for (std::size_t i = b; i < e; ++i) s += static_cast<long>(i);
    return s;
  });
  ASSERT_EQ(sums.size(), 11u);
  EXPECT_EQ(sums[0], 45);
  EXPECT_EQ(sums[10], 100 + 101 + 102);
  EXPECT_THROW(parallel_chunks<int>(10, 1, 3,
                                    [](std::size_t b, std::size_t) -> int {
                                      if (b == 5) throw DomainError("boom");
                                      return 0;
                                    }),
               DomainError);
}

TEST(Histogram, MassesSumToOneAndFoldOutliers) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<double> s(5000);
  for (double& v : s) v = z(gen);
  const Histogram h = make_histogram(s, 1, {-3.0}, {3.0}, {12});
  EXPECT_NEAR(std::accumulate(h.masses.begin(), h.masses.end(), 0.0), 1.0, 1e-12);
  std::size_t outside = 0;
  for (double v : s) outside += (v < -3.0 || v >= 3.0);
  EXPECT_EQ(h.outliers, outside);
  EXPECT_EQ(h.samples, 5000u);

  const std::vector<double> one_point(100, 0.3);
  const Histogram spike = make_histogram(one_point, 1, {-1.0}, {1.0}, {4});
  EXPECT_EQ(spike.masses, (std::vector<double>{0.0, 0.0, 1.0, 0.0}));

  const std::vector<double> pts{0.5, 0.5, -0.5, 0.5};
  const Histogram two = make_histogram(pts, 2, {-1.0, -1.0}, {1.0, 1.0}, {2, 2});
  EXPECT_EQ(two.masses, (std::vector<double>{0.0, 0.5, 0.0, 0.5}));
  EXPECT_THROW(make_histogram(pts, 2, {-1.0}, {1.0}, {2}), DomainError);
}

TEST(Gibbs, HarmonicMatchesNormalBinMasses) {
  const GibbsDensity g = gibbs_density(make_force("harmonic"), {-8.0}, {8.0}, {32});
  std::vector<double> expected(32);
  for (std::size_t b = 0; b < 32; ++b) {
    const double lo = b == 0 ? -INFINITY : -8.0 + 0.5 * b;
    const double hi = b == 31 ? INFINITY : -8.0 + 0.5 * (b + 1);
    expected[b] = (std::isinf(hi) ? 1.0 : normal_cdf(hi)) - (std::isinf(lo) ? 0.0 : normal_cdf(lo));
  }
  EXPECT_LE(l1_distance(g.masses, expected), 1e-6);
  EXPECT_NEAR(std::accumulate(g.masses.begin(), g.masses.end(), 0.0), 1.0, 1e-8);
  EXPECT_NEAR(g.normalization * std::exp(-g.shift), std::sqrt(2 * M_PI), 1e-6);
  const double origin[1] = {0.0};
  EXPECT_NEAR(g.density(origin), 1.0 / std::sqrt(2 * M_PI), 1e-8);
  EXPECT_NEAR(g.second_moment_about(origin), 1.0, 1e-7);
}

TEST(Gibbs, NarrowBoxFoldsTails) {
  const GibbsDensity g = gibbs_density(make_force("harmonic"), {-1.0}, {1.0}, {2});
  EXPECT_NEAR(g.masses[0], 0.5, 1e-8);
  EXPECT_NEAR(g.masses[1], 0.5, 1e-8);
  EXPECT_LE(g.outer_lo[0], -8.0);
  EXPECT_LE(g.exterior_mass, 1e-12);
}

TEST(Gibbs, TwoDimensionalHarmonicFactorizes) {
  const GibbsDensity g = gibbs_density(make_force("harmonic", {1.0, 2.0}), {-2.0, -2.0}, {2.0, 2.0}, {4, 4});
  const double p[4] = {normal_cdf(-1.0), normal_cdf(0.0) - normal_cdf(-1.0), normal_cdf(1.0) - normal_cdf(0.0),
                       1.0 - normal_cdf(1.0)};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g.masses[i * 4 + j], p[i] * p[j], 1e-7);
  }
}

TEST(Gibbs, SymmetricWellIsMirrorSymmetric) {
  const GibbsDensity g = gibbs_density(make_force("symmetric_double_well"), {-2.5}, {2.5}, {20});
  for (std::size_t b = 0; b < 10; ++b) EXPECT_NEAR(g.masses[b], g.masses[19 - b], 1e-10);
  // Z = int exp(-x^4/4 + x^2/2) over the real line.
  EXPECT_NEAR(g.normalization * std::exp(-g.shift), 3.9051371698573, 1e-7);
}

TEST(Gibbs, Errors) {
  EXPECT_THROW(gibbs_density(make_force("constant", {1.0}), {-1.0}, {1.0}, {4}), ConfigError);
  EXPECT_THROW(gibbs_density(make_force("zero"), {-1.0}, {1.0}, {4}), DomainError);
}

TEST(Distances, L1AndAsymmetry) {
  const std::vector<double> p{0.25, 0.25, 0.5, 0.0}, q{0.0, 0.0, 0.0, 1.0};
  EXPECT_EQ(l1_distance(p, p), 0.0);
  EXPECT_EQ(l1_distance(p, q), 2.0);
  Histogram h;
  h.lo = {-1.0};
  h.hi = {1.0};
  h.bins = {4};
  h.masses = p;
  EXPECT_DOUBLE_EQ(mirror_asymmetry(h), 0.25 + 0.25);
  h.masses = {0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(mirror_asymmetry(h), 0.0);
  h.lo = {-1.0};
  h.hi = {2.0};
  EXPECT_THROW(mirror_asymmetry(h), DomainError);
}

TEST(Msd, ExplicitValues) {
  // Two paths, three times, one dimension.
  const std::vector<double> states{0, 1, 3, 0, -1, 1};
  const double x0[1] = {0.0};
  const auto m = msd(states, 2, 3, 1, x0);
  EXPECT_EQ(m, (std::vector<double>{0.0, 1.0, 5.0}));
}

TEST(ConvergenceConfig, Validation) {
  EXPECT_NO_THROW(small_convergence().validate());
  auto bad = small_convergence();
  bad.hursts = {0.5};
  bad.scheme = SchemeSelection::fast;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.scheme = SchemeSelection::direct;
  EXPECT_NO_THROW(bad.validate());
  bad = small_convergence();
  bad.steps = {0x1p-6, 0x1p-4};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_convergence();
  bad.reference_step = 0x1p-7;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_convergence();
  bad.paths = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_convergence();
  bad.hursts = {1.0};
  try {
    bad.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "hursts");
  }
}

TEST(ErgodicityConfig, Validation) {
  EXPECT_NO_THROW(small_ergodicity().validate());
  auto bad = small_ergodicity();
  bad.x0 = {0.0, 0.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_ergodicity();
  bad.snapshots = {0.3};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_ergodicity();
  bad.snapshots = {5.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_ergodicity();
  bad.box_lo = {5.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_ergodicity();
  bad.force = "morse";
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(RunConvergence, IndependentOfThreadCount) {
  auto c = small_convergence();
  c.scheme = SchemeSelection::both;
  c.threads = 1;
  const auto a = to_json(run_convergence(c));
  c.threads = 5;
  const auto b = to_json(run_convergence(c));
  EXPECT_EQ(a["rows"].dump(), b["rows"].dump());
  EXPECT_EQ(a["fits"].dump(), b["fits"].dump());
  c.seed = 2;
  EXPECT_NE(to_json(run_convergence(c))["rows"], a["rows"]);
}

TEST(RunConvergence, SmallStudyHasExpectedShape) {
  auto c = small_convergence();
  c.paths = 200;
  const ConvergenceResult r = run_convergence(c);
  ASSERT_EQ(r.rows.size(), 3u);
  ASSERT_EQ(r.fits.size(), 1u);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.sup_error, 0.0);
    EXPECT_LE(row.final_error, row.sup_error);
    EXPECT_EQ(row.paths, 200u);
  }
  EXPECT_GT(r.fits[0].fit.slope, 0.3);
  EXPECT_LT(r.fits[0].fit.slope, 0.9);
  EXPECT_NEAR(r.fits[0].theoretical, 0.6, 1e-15);
}

TEST(SchemeDiscrepancy, SmallOnSharedNoise) {
  const FgleProblem p = FgleProblem::physical(0.75, make_force("harmonic"), {1.0});
  EXPECT_LE(scheme_discrepancy(p, 0x1p-8, 1.0, 1e-9, 3), 1e-6);
}

TEST(RunErgodicity, ReproducibleAndThreadIndependent) {
  auto c = small_ergodicity();
  c.threads = 1;
  const ErgodicityResult a = run_ergodicity(c);
  c.threads = 3;
  const ErgodicityResult b = run_ergodicity(c);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.final_samples, b.final_samples);
  ASSERT_EQ(a.snapshots.size(), 4u);
  EXPECT_EQ(a.snapshots[0].msd, 0.0);
  EXPECT_EQ(a.snapshots[0].variance[0], 0.0);
  EXPECT_EQ(a.final_samples.size(), 120u);
  EXPECT_TRUE(a.has_gibbs);
  EXPECT_NEAR(a.msd_equilibrium, 1.0, 1e-6);
  for (const auto& s : a.snapshots) {
    EXPECT_NEAR(std::accumulate(s.histogram.masses.begin(), s.histogram.masses.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(RunErgodicity, DirectAndFastAgree) {
  auto c = small_ergodicity();
  c.eps = 1e-10;
  const ErgodicityResult fast = run_ergodicity(c);
  c.scheme = Scheme::direct;
  const ErgodicityResult direct = run_ergodicity(c);
  ASSERT_EQ(fast.final_samples.size(), direct.final_samples.size());
  for (std::size_t i = 0; i < fast.final_samples.size(); ++i) {
    EXPECT_NEAR(fast.final_samples[i], direct.final_samples[i], 1e-7);
  }
}

TEST(RunErgodicity, DefaultSnapshotsAreLogSpaced) {
  auto c = small_ergodicity();
  c.snapshots.clear();
  c.paths = 10;
  const ErgodicityResult r = run_ergodicity(c);
  ASSERT_GE(r.snapshots.size(), 2u);
  EXPECT_EQ(r.snapshots.front().time, 0.0);
  EXPECT_EQ(r.snapshots.back().time, 2.0);
  for (std::size_t i = 1; i < r.snapshots.size(); ++i) EXPECT_GT(r.snapshots[i].index, r.snapshots[i - 1].index);
}
