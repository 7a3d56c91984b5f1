#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fgle/error.hpp"
#include "fgle/forces.hpp"

using namespace fgle;

namespace {

std::vector<double> drift(const ForceField& f, std::vector<double> x) {
  std::vector<double> out(f.dim);
  f.drift(x, out);
  return out;
}

}  // namespace

TEST(Forces, Examples) {
  EXPECT_DOUBLE_EQ(drift(make_force("harmonic"), {2.0})[0], -2.0);
  EXPECT_DOUBLE_EQ(drift(make_force("harmonic", {3.0}), {2.0})[0], -6.0);
  EXPECT_DOUBLE_EQ(drift(make_force("symmetric_double_well"), {1.0})[0], 0.0);
  EXPECT_DOUBLE_EQ(drift(make_force("symmetric_double_well"), {-1.0})[0], 0.0);
  EXPECT_DOUBLE_EQ(drift(make_force("asymmetric_double_well"), {1.0})[0], 0.0);
  EXPECT_DOUBLE_EQ(drift(make_force("asymmetric_double_well"), {-2.0})[0], 0.0);
  // dV/dx = x r^2 - 2x - 2xy = 0 and dV/dy = y r^2 - x^2 = 0.2 * 0.04 at (0, 0.2).
  const auto b = drift(make_force("double_well_2d"), {0.0, 0.2});
  EXPECT_DOUBLE_EQ(b[0], 0.0);
  EXPECT_NEAR(b[1], -0.008, 1e-15);
  EXPECT_EQ(drift(make_force("zero", {2}), {1.0, 2.0}), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(drift(make_force("constant", {0.5, -1.0}), {7.0, 8.0}), (std::vector<double>{0.5, -1.0}));
  EXPECT_EQ(make_force("harmonic", {1.0, 3.0}).dim, 3u);
}

TEST(Forces, DriftIsMinusGradientOfPotential) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& name : force_names()) {
    if (name == "constant") continue;
    const ForceField f = make_force(name);
    if (!f.has_potential()) continue;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(f.dim);
      for (auto& v : x) v = u(gen);
      const auto b = drift(f, x);
      for (std::size_t d = 0; d < f.dim; ++d) {
        const double h = 1e-5;
        auto xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const double grad = (f.potential(xp) - f.potential(xm)) / (2 * h);
        EXPECT_NEAR(b[d], -grad, 1e-6 * std::max(1.0, std::abs(grad))) << name;
      }
    }
  }
}

TEST(Forces, Errors) {
  EXPECT_THROW(make_force("morse"), ConfigError);
  EXPECT_THROW(make_force("symmetric_double_well", {1.0}), ConfigError);
  EXPECT_THROW(make_force("harmonic", {1.0, 2.5}), ConfigError);
  EXPECT_THROW(make_force("constant"), ConfigError);
  try {
    make_force("morse");
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "force.name");
  }
}

TEST(Forces, ConstantHasNoPotential) {
  EXPECT_FALSE(make_force("constant", {1.0}).has_potential());
  EXPECT_TRUE(make_force("double_well_2d").has_potential());
}
