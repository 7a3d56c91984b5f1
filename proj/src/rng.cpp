#include "fgle/rng.hpp"

#include <cmath>
#include <numbers>

namespace fgle {

std::pair<double, double> NormalSampler::pair() noexcept {
  const double u1 = engine_.uniform_open();
  const double u2 = engine_.uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace fgle
