#include "fgle/soe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "fgle/error.hpp"

namespace fgle {

namespace {

constexpr double kDomainSlack = 1e-12;

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  t.front() = lo;
  t.back() = hi;
  return t;
}

struct Nodes {
  std::vector<double> s;
  std::vector<double> w;
};

// Gauss rule of the discrete measure sum_j mass_j delta(x - x_j), from the
// Lanczos process on diag(x) with full reorthogonalization. Returns up to
// `order` nodes; fewer if the measure has fewer support points.
Nodes discrete_gauss(const std::vector<double>& x, const std::vector<double>& mass, std::size_t order) {
  const std::size_t n = x.size();
  const double scale = *std::max_element(x.begin(), x.end());
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  std::vector<double> xs(n);
  for (std::size_t j = 0; j < n; ++j) xs[j] = x[j] / scale;

  std::vector<std::vector<double>> basis;
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = std::sqrt(mass[j] / total);

  std::vector<double> diag, sub;
  order = std::min(order, n);
  for (std::size_t k = 0; k < order; ++k) {
    basis.push_back(v);
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j) a += xs[j] * v[j] * v[j];
    diag.push_back(a);
    if (k + 1 == order) break;
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = xs[j] * v[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += q[j] * r[j];
        for (std::size_t j = 0; j < n; ++j) r[j] -= dot * q[j];
      }
    }
    double beta = 0.0;
    for (double value : r) beta += value * value;
    beta = std::sqrt(beta);
    if (!(beta > 1e-14)) break;
    sub.push_back(beta);
    for (std::size_t j = 0; j < n; ++j) v[j] = r[j] / beta;
  }

  const Eigen::Index m = static_cast<Eigen::Index>(diag.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), m);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(sub.data(), m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);

  const double x_min = *std::min_element(x.begin(), x.end());
  Nodes out;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double first = solver.eigenvectors()(0, i);
    const double weight = total * first * first;
    if (!(weight > 0.0)) continue;
    out.s.push_back(std::max(solver.eigenvalues()[i] * scale, x_min));
    out.w.push_back(weight);
  }
  return out;
}

// Candidate under evaluation: fixed exponentials summed into `tail_sum`
// (one value per grid point) plus a small set of lumped nodes.
double max_error(const std::vector<double>& target, const std::vector<double>& tail_sum,
                 const std::vector<double>& t, const Nodes& lumped) {
  double err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double value = tail_sum[i];
    for (std::size_t l = 0; l < lumped.s.size(); ++l) value += lumped.w[l] * std::exp(-lumped.s[l] * t[i]);
    err = std::max(err, std::abs(value - target[i]));
  }
  return err;
}

double max_error(const SoeKernel& kernel, const std::vector<double>& t) {
  double err = 0.0;
  for (double ti : t) {
    double value = 0.0;
    for (std::size_t l = 0; l < kernel.size(); ++l) value += kernel.weights[l] * std::exp(-kernel.exponents[l] * ti);
    err = std::max(err, std::abs(value - std::pow(ti, kernel.alpha - 1.0)));
  }
  return err;
}

// Greedily removes the node whose largest contribution on [delta, T] is
// smallest while the error on `t` stays within `limit`.
void drop_negligible(SoeKernel& kernel, const std::vector<double>& t, double limit) {
  while (kernel.size() > 1) {
    std::size_t best = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < kernel.size(); ++l) {
      const double peak = kernel.weights[l] * std::exp(-kernel.exponents[l] * kernel.delta);
      if (peak < smallest) {
        smallest = peak;
        best = l;
      }
    }
    SoeKernel trial = kernel;
    trial.exponents.erase(trial.exponents.begin() + static_cast<std::ptrdiff_t>(best));
    trial.weights.erase(trial.weights.begin() + static_cast<std::ptrdiff_t>(best));
    if (max_error(trial, t) > limit) return;
    kernel = std::move(trial);
  }
}

void sort_by_exponent(SoeKernel& kernel) {
  std::vector<std::size_t> order(kernel.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return kernel.exponents[a] < kernel.exponents[b]; });
  SoeKernel sorted = kernel;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.exponents[i] = kernel.exponents[order[i]];
    sorted.weights[i] = kernel.weights[order[i]];
  }
  kernel = std::move(sorted);
}

}  // namespace

SoeKernel build_soe(double alpha, double eps, double delta, double horizon, const SoeOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("SOE needs 0 < alpha < 1, got " + std::to_string(alpha));
  if (!(delta > 0.0 && delta < horizon) || !std::isfinite(horizon)) {
    throw DomainError("SOE needs 0 < delta < T");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("SOE tolerance must lie in (0, 1)");
  if (options.certification_points < 2) throw DomainError("certification grid needs at least 2 points");

  const double beta = 1.0 - alpha;
  const double g = std::tgamma(beta);

  // Right truncation: int_{smax}^inf e^{-delta s} s^{-alpha} ds / g is below
  // eps / 1000 at the worst point t = delta.
  double smax = 1.0 / delta;
  while (std::exp(-delta * smax) * std::pow(smax, -alpha) / (delta * g) > 1e-3 * eps) smax *= 1.05;
  const double umax = std::log(smax);
  // Left of ulow, t s < e^{-40} for every t <= T, so those terms are constants.
  const double ulow = std::log(1.0 / horizon) - 40.0;
  // Lumping cutoffs are scanned over [ucut_lo, ucut_hi].
  const double ucut_hi = std::log(1.0 / horizon) + 8.0;
  const double ucut_lo = std::log(1.0 / horizon) - 20.0;

  const std::vector<double> coarse = geometric_grid(delta, horizon, 400);
  const std::vector<double> trial = geometric_grid(delta, horizon, 2000);
  const std::vector<double> fine = geometric_grid(delta, horizon, options.certification_points);
  auto targets = [alpha](const std::vector<double>& t) {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = std::pow(t[i], alpha - 1.0);
    return y;
  };
  const std::vector<double> coarse_target = targets(coarse);
  const std::vector<double> trial_target = targets(trial);

  std::size_t fewest_rejected = 0;
  for (double h = 0.7; h >= 0.02; h *= 0.93) {
    const auto j_lo = static_cast<long>(std::floor(ulow / h));
    const auto j_hi = static_cast<long>(std::ceil(umax / h));
    const auto j_cut_lo = std::max(j_lo + 1, static_cast<long>(std::floor(ucut_lo / h)));
    const auto j_cut_hi = std::min(j_hi, static_cast<long>(std::ceil(ucut_hi / h)));
    if (static_cast<std::size_t>(j_hi - j_cut_hi + 1) > options.node_budget) break;

    auto node_s = [h](long j) { return std::exp(h * static_cast<double>(j)); };
    auto node_w = [h, beta, g](long j) { return h * std::exp(beta * h * static_cast<double>(j)) / g; };

    // Discrete measure below the cutoff: nodes j_lo..j-1 plus the geometric
    // sum of every trapezoid node left of j_lo, placed at s = e^{(j_lo-1)h}.
    std::vector<double> left_s{node_s(j_lo - 1)};
    std::vector<double> left_w{h * std::exp(beta * h * static_cast<double>(j_lo - 1)) / (g * -std::expm1(-beta * h))};
    for (long j = j_lo; j < j_cut_lo; ++j) {
      left_s.push_back(node_s(j));
      left_w.push_back(node_w(j));
    }

    // Suffix sums of the nodes at or above the cutoff, on both grids.
    std::vector<double> coarse_sum(coarse.size(), 0.0), trial_sum(trial.size(), 0.0);
    for (long j = j_hi; j >= j_cut_hi; --j) {
      const double s = node_s(j), w = node_w(j);
      for (std::size_t i = 0; i < coarse.size(); ++i) coarse_sum[i] += w * std::exp(-s * coarse[i]);
      for (std::size_t i = 0; i < trial.size(); ++i) trial_sum[i] += w * std::exp(-s * trial[i]);
    }
    std::vector<double> below_s = left_s, below_w = left_w;
    for (long j = j_cut_lo; j < j_cut_hi; ++j) {
      below_s.push_back(node_s(j));
      below_w.push_back(node_w(j));
    }

    std::size_t best_count = std::numeric_limits<std::size_t>::max();
    SoeKernel best;
    for (long c = j_cut_hi; c >= j_cut_lo; --c) {
      const std::size_t upper = static_cast<std::size_t>(j_hi - c + 1);
      if (upper + 1 >= best_count) break;
      // Measure of nodes strictly below c.
      const std::size_t below_count = left_s.size() + static_cast<std::size_t>(c - j_cut_lo);
      std::vector<double> xs(below_s.begin(), below_s.begin() + static_cast<std::ptrdiff_t>(below_count));
      std::vector<double> ms(below_w.begin(), below_w.begin() + static_cast<std::ptrdiff_t>(below_count));
      for (std::size_t q = 1; q <= options.max_lump_order && upper + q < best_count; ++q) {
        const Nodes lumped = discrete_gauss(xs, ms, q);
        if (lumped.s.size() < q && q > 1) break;
        if (max_error(coarse_target, coarse_sum, coarse, lumped) > 0.8 * eps) continue;
        if (max_error(trial_target, trial_sum, trial, lumped) > 0.8 * eps) continue;
        best_count = upper + lumped.s.size();
        best = SoeKernel{alpha, delta, horizon, eps, lumped.s, lumped.w};
        for (long j = c; j <= j_hi; ++j) {
          best.exponents.push_back(node_s(j));
          best.weights.push_back(node_w(j));
        }
        break;
      }
      // Move node c-1 from the lumped measure into the explicit sum.
      if (c > j_cut_lo) {
        const double s = node_s(c - 1), w = node_w(c - 1);
        for (std::size_t i = 0; i < coarse.size(); ++i) coarse_sum[i] += w * std::exp(-s * coarse[i]);
        for (std::size_t i = 0; i < trial.size(); ++i) trial_sum[i] += w * std::exp(-s * trial[i]);
      }
    }
    if (best_count == std::numeric_limits<std::size_t>::max()) continue;

    if (options.drop_negligible) drop_negligible(best, trial, 0.9 * eps);
    sort_by_exponent(best);
    if (best.size() > options.node_budget) {
      fewest_rejected = best.size();
      continue;
    }
    if (max_error(best, fine) <= eps) return best;
  }
  throw CertificationError("no SOE kernel for alpha=" + std::to_string(alpha) + ", eps=" + std::to_string(eps) +
                           " on [" + std::to_string(delta) + ", " + std::to_string(horizon) + "] within " +
                           std::to_string(options.node_budget) + " nodes" +
                           (fewest_rejected ? " (smallest candidate had " + std::to_string(fewest_rejected) + ")"
                                            : std::string()));
}

double eval_soe(const SoeKernel& kernel, double t) {
  if (!(t >= kernel.delta * (1.0 - kDomainSlack) && t <= kernel.horizon * (1.0 + kDomainSlack))) {
    throw DomainError("SOE evaluated at t=" + std::to_string(t) + " outside its certified window");
  }
  double value = 0.0;
  for (std::size_t l = 0; l < kernel.size(); ++l) value += kernel.weights[l] * std::exp(-kernel.exponents[l] * t);
  return value;
}

double certify_soe(const SoeKernel& kernel, std::size_t grid_size) {
  if (grid_size < 2) throw DomainError("certification grid needs at least 2 points");
  return max_error(kernel, geometric_grid(kernel.delta, kernel.horizon, grid_size));
}

SchemeKernel make_scheme_kernel(SoeKernel soe, double step) {
  if (!(step > 0.0)) throw DomainError("scheme step must be positive");
  if (std::abs(soe.delta - step) > 1e-12 * step) {
    throw MismatchError("SOE window starts at " + std::to_string(soe.delta) + " but the step is " +
                        std::to_string(step));
  }
  return SchemeKernel{std::move(soe), step};
}

double eval_scheme_kernel(const SchemeKernel& kernel, double t) {
  if (!(t > 0.0)) throw DomainError("scheme kernel needs t > 0");
  const double alpha = kernel.soe.alpha;
  if (t <= kernel.step) return std::pow(t, alpha - 1.0) / std::tgamma(alpha);
  return eval_soe(kernel.soe, t) / std::tgamma(alpha);
}

double scheme_tolerance(double step, double hurst) {
  if (!(step > 0.0)) throw DomainError("step must be positive");
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("scheme tolerance needs 1/2 < H < 1");
  return std::pow(step, std::min(1.5 - hurst, 3.0 - 3.0 * hurst));
}

nlohmann::json to_json(const SoeKernel& kernel) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t l = 0; l < kernel.size(); ++l) nodes.push_back({{"s", kernel.exponents[l]}, {"w", kernel.weights[l]}});
  return {{"alpha", kernel.alpha},
          {"delta", kernel.delta},
          {"T", kernel.horizon},
          {"eps", kernel.tolerance},
          {"nodes", std::move(nodes)}};
}

SoeKernel soe_from_json(const nlohmann::json& doc) {
  auto number = [&doc](const char* key) {
    if (!doc.contains(key) || !doc[key].is_number()) throw ConfigError(key, "missing or not a number");
    return doc[key].get<double>();
  };
  SoeKernel kernel;
  kernel.alpha = number("alpha");
  kernel.delta = number("delta");
  kernel.horizon = number("T");
  kernel.tolerance = number("eps");
  if (!(kernel.alpha > 0.0 && kernel.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (!(kernel.delta > 0.0 && kernel.delta < kernel.horizon)) throw ConfigError("delta", "need 0 < delta < T");
  if (!(kernel.tolerance > 0.0)) throw ConfigError("eps", "must be positive");
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw ConfigError("nodes", "must be a nonempty array");
  }
  for (std::size_t l = 0; l < doc["nodes"].size(); ++l) {
    const auto& node = doc["nodes"][l];
    const std::string where = "nodes[" + std::to_string(l) + "]";
    if (!node.is_object() || !node.contains("s") || !node.contains("w") || !node["s"].is_number() ||
        !node["w"].is_number()) {
      throw ConfigError(where, "needs numeric s and w");
    }
    const double s = node["s"].get<double>(), w = node["w"].get<double>();
    if (!(s > 0.0) || !(w > 0.0)) throw ConfigError(where, "s and w must be positive");
    kernel.exponents.push_back(s);
    kernel.weights.push_back(w);
  }
  const double err = certify_soe(kernel);
  if (err > kernel.tolerance) {
    throw CertificationError("stored SOE kernel has error " + std::to_string(err) + " above its eps " +
                             std::to_string(kernel.tolerance));
  }
  return kernel;
}

}  // namespace fgle
