#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fgle/error.hpp"
#include "fgle/mittag.hpp"
#include "oracles.hpp"

using namespace fgle;

namespace {

struct Reference {
  double alpha;
  double x;
  double value;  // E_alpha(-x), 80+ digit series
};

const Reference kReferences[] = {
    {0.5, 1.0, 0.42758357615580700441},  {0.5, 10.0, 0.056140992743822585858}, {0.5, 30.0, 0.018795888861416751497},
    {0.3, 2.0, 0.29023222616787535504},  {0.8, 5.0, 0.057595384762152244264},  {0.8, 30.0, 0.0075758607992192086547},
    {0.9, 50.0, 0.0021753530768569760498}, {0.6, 0.1, 0.89659400596900926582},  {0.25, 3.0, 0.21900442756040679925},
    {0.4, 20.0, 0.033010897961757260022}, {0.7, 40.0, 0.0085261702309107443824},
};

}  // namespace

TEST(MittagLeffler, HighPrecisionReferences) {
  for (const auto& r : kReferences) {
    EXPECT_NEAR(mittag_leffler(r.alpha, -r.x), r.value, 1e-10) << r.alpha << " " << r.x;
  }
  EXPECT_NEAR(mittag_leffler(0.5, -1.0), std::exp(1.0) * std::erfc(1.0), 1e-12);
}

TEST(MittagLeffler, ZeroArgumentIsOne) {
  for (double a : {0.1, 0.37, 0.5, 0.99, 1.0}) EXPECT_EQ(mittag_leffler(a, 0.0), 1.0);
  EXPECT_EQ(mittag_leffler(1.0, -1.0), mittag_leffler(1.0, -1.0));
  EXPECT_NEAR(mittag_leffler(1.0, -1.0), 0.3678794412, 1e-10);
}

TEST(MittagLeffler, UnitAlphaIsExponential) {
  for (int i = 0; i <= 2000; ++i) {
    const double t = 20.0 * i / 2000;
    EXPECT_NEAR(e_alpha1(1.0, t), std::exp(-t), 1e-10) << t;
  }
}

TEST(MittagLeffler, AgreesWithLaplaceIntegral) {
  for (double a : {0.2, 0.4, 0.5, 0.75, 0.9}) {
    for (double t : {0.05, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      EXPECT_NEAR(e_alpha1(a, t), oracle::ml_relaxation(a, t), 1e-9) << a << " " << t;
    }
  }
}

TEST(MittagLeffler, RegimesAgreeAroundCrossover) {
  for (double a : {0.3, 0.5, 0.8}) {
    const double c = ml_crossover(a);
    ASSERT_GT(c, 0.0);
    for (int i = 0; i <= 60; ++i) {
      const double x = c / 2 * std::pow(4.0, i / 60.0);
      const MlEvaluation s = ml_series(a, x), as = ml_asymptotic(a, x);
      EXPECT_LE(std::abs(s.value - as.value), 1e-6) << a << " " << x;
    }
  }
}

TEST(MittagLeffler, RegimeSelection) {
  const MlParams p = MlParams::for_alpha(0.5);
  EXPECT_EQ(mittag_leffler_eval(p, 0.0).regime, MlRegime::exact);
  EXPECT_EQ(mittag_leffler_eval(p, -p.crossover / 2).regime, MlRegime::series);
  EXPECT_EQ(mittag_leffler_eval(p, -p.crossover * 2).regime, MlRegime::asymptotic);
  EXPECT_LE(mittag_leffler_eval(p, -p.crossover * 2).error_estimate, 1e-8);
}

TEST(MittagLeffler, BoundedAndNonincreasing) {
  for (double a : {0.1, 0.3, 0.5, 0.8, 0.95, 1.0}) {
    double previous = 1.0;
    for (int i = 1; i <= 4000; ++i) {
      const double x = 1e-4 * std::pow(1e7, i / 4000.0);
      if (a == 1.0 && x > 700) break;
      const double v = mittag_leffler(a, -x);
      EXPECT_GT(v, 0.0) << a << " " << x;
      EXPECT_LE(v, previous) << a << " " << x;
      previous = v;
    }
  }
}

TEST(MittagLeffler, RelaxationScanIsMonotone) {
  const auto values = e_alpha1_values(0.5, 64.0 / 8192, 8192);
  ASSERT_EQ(values.size(), 8193u);
  EXPECT_EQ(values[0], 1.0);
  for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LE(values[i], values[i - 1]);
}

TEST(MittagLeffler, Increments) {
  const auto inc = e_alpha1_increments(1.0, 1.0, 1);
  ASSERT_EQ(inc.size(), 1u);
  EXPECT_NEAR(inc[0], std::exp(-1.0) - 1.0, 1e-14);
  const auto values = e_alpha1_values(0.6, 0.01, 300);
  const auto incs = e_alpha1_increments(0.6, 0.01, 300);
  for (std::size_t i = 1; i <= 300; ++i) EXPECT_EQ(incs[i - 1], values[i] - values[i - 1]);
}

TEST(MittagLeffler, DomainErrors) {
  EXPECT_THROW(mittag_leffler(0.0, -1.0), DomainError);
  EXPECT_THROW(mittag_leffler(1.2, -1.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.5, 0.1), DomainError);
  EXPECT_THROW(e_alpha1(0.5, -1.0), DomainError);
}
