#include "fgle/forces.hpp"

#include <cmath>

#include "fgle/error.hpp"

namespace fgle {

namespace {

void expect_arity(const std::string& name, const std::vector<double>& params, std::size_t lo, std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    throw ConfigError("force.params", name + " takes " + std::to_string(lo) + ".." + std::to_string(hi) +
                                          " parameters, got " + std::to_string(params.size()));
  }
}

std::size_t dim_param(double value) {
  if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("force.params", "dimension must be a positive integer");
  return static_cast<std::size_t>(value);
}

}  // namespace

ForceField make_force(const std::string& name, const std::vector<double>& params) {
  ForceField f;
  f.name = name;
  f.params = params;

  if (name == "harmonic") {
    expect_arity(name, params, 0, 2);
    const double kappa = params.empty() ? 1.0 : params[0];
    f.dim = params.size() == 2 ? dim_param(params[1]) : 1;
    f.potential = [kappa](std::span<const double> x) {
      double r2 = 0.0;
      for (double xi : x) r2 += xi * xi;
      return 0.5 * kappa * r2;
    };
    f.drift = [kappa](std::span<const double> x, std::span<double> out) {
      for (std::size_t d = 0; d < x.size(); ++d) out[d] = -kappa * x[d];
    };
  } else if (name == "symmetric_double_well") {
    expect_arity(name, params, 0, 0);
    f.potential = [](std::span<const double> x) {
      const double x2 = x[0] * x[0];
      return 0.25 * x2 * x2 - 0.5 * x2;
    };
    f.drift = [](std::span<const double> x, std::span<double> out) { out[0] = x[0] - x[0] * x[0] * x[0]; };
  } else if (name == "asymmetric_double_well") {
    expect_arity(name, params, 0, 0);
    f.potential = [](std::span<const double> x) {
      const double x2 = x[0] * x[0];
      return 0.25 * x2 * x2 + x2 * x[0] / 3.0 - x2;
    };
    f.drift = [](std::span<const double> x, std::span<double> out) {
      out[0] = -(x[0] * x[0] * x[0] + x[0] * x[0] - 2.0 * x[0]);
    };
  } else if (name == "double_well_2d") {
    expect_arity(name, params, 0, 0);
    f.dim = 2;
    f.potential = [](std::span<const double> p) {
      const double x = p[0], y = p[1], r2 = x * x + y * y;
      return 0.25 * r2 * r2 - x * x - x * x * y;
    };
    f.drift = [](std::span<const double> p, std::span<double> out) {
      const double x = p[0], y = p[1], r2 = x * x + y * y;
      out[0] = -(x * r2 - 2.0 * x - 2.0 * x * y);
      out[1] = -(y * r2 - x * x);
    };
  } else if (name == "zero") {
    expect_arity(name, params, 0, 1);
    f.dim = params.empty() ? 1 : dim_param(params[0]);
    f.potential = [](std::span<const double>) { return 0.0; };
    f.drift = [](std::span<const double>, std::span<double> out) {
      for (double& v : out) v = 0.0;
    };
  } else if (name == "constant") {
    if (params.empty()) throw ConfigError("force.params", "constant force needs one value per dimension");
    f.dim = params.size();
    f.drift = [c = params](std::span<const double>, std::span<double> out) {
      for (std::size_t d = 0; d < out.size(); ++d) out[d] = c[d];
    };
  } else {
    throw ConfigError("force.name", "unknown potential '" + name + "'");
  }
  return f;
}

std::vector<std::string> force_names() {
  return {"harmonic", "symmetric_double_well", "asymmetric_double_well", "double_well_2d", "zero", "constant"};
}

}  // namespace fgle
