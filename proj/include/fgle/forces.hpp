#pragma once

// Force fields b(x) = -grad V(x) for the potentials used in the experiments.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fgle {

struct ForceField {
  std::string name;
  std::size_t dim = 1;
  std::vector<double> params;
  /// V(x); empty for fields given only through b (e.g. "constant").
  std::function<double(std::span<const double>)> potential;
  /// Writes b(x) into out (both of length dim).
  std::function<void(std::span<const double>, std::span<double>)> drift;

  bool has_potential() const noexcept { return static_cast<bool>(potential); }
};

/// Registered names and meaning of params:
///   harmonic                 V = kappa|x|^2/2, params {} or {kappa} or {kappa, dim}
///   symmetric_double_well    V = x^4/4 - x^2/2
///   asymmetric_double_well   V = x^4/4 + x^3/3 - x^2
///   double_well_2d           V = (x^2+y^2)^2/4 - x^2 - x^2 y
///   zero                     b = 0,        params {} or {dim}
///   constant                 b = c,        params {c_1, ..., c_d}
/// Throws ConfigError for unknown names or wrong parameter counts.
ForceField make_force(const std::string& name, const std::vector<double>& params = {});

std::vector<std::string> force_names();

}  // namespace fgle
