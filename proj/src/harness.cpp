#include "fgle/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fgle/analytic.hpp"
#include "fgle/error.hpp"
#include "fgle/fbm.hpp"
#include "fgle/rng.hpp"

namespace fgle {

namespace {

bool is_power_of_two_ratio(double big, double small, std::size_t* ratio) {
  const double r = big / small;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n == 0 || std::abs(r - static_cast<double>(n)) > 1e-9 * r || (n & (n - 1)) != 0) return false;
  if (ratio) *ratio = n;
  return true;
}

std::size_t grid_steps(double horizon, double step, const char* field) {
  const double r = horizon / step;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n < 2 || std::abs(r - static_cast<double>(n)) > 1e-9 * r) {
    throw ConfigError(field, "horizon must be an integer multiple (>= 2) of the step");
  }
  return n;
}

std::vector<Scheme> selected(SchemeSelection s) {
  switch (s) {
    case SchemeSelection::direct:
      return {Scheme::direct};
    case SchemeSelection::fast:
      return {Scheme::fast};
    case SchemeSelection::both:
      return {Scheme::direct, Scheme::fast};
  }
  return {};
}

const char* selection_name(SchemeSelection s) {
  switch (s) {
    case SchemeSelection::direct:
      return "direct";
    case SchemeSelection::fast:
      return "fast";
    case SchemeSelection::both:
      return "both";
  }
  return "?";
}

}  // namespace

std::size_t default_threads() noexcept {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs at least two (x, y) pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("line fit needs distinct x values");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.slope_stderr = x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  return fit;
}

double theoretical_order(double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("theoretical order is stated for 1/2 < H < 1");
  return std::min(1.5 - hurst, 3.0 - 3.0 * hurst);
}

bool order_has_log_factor(double hurst) noexcept { return std::abs(hurst - 0.75) < 1e-12; }

void ConvergenceConfig::validate() const {
  if (hursts.empty()) throw ConfigError("hursts", "needs at least one Hurst index");
  for (double h : hursts) {
    if (!(h >= 0.5 && h < 1.0)) throw ConfigError("hursts", "each H must lie in [1/2, 1)");
    if (h == 0.5 && scheme != SchemeSelection::direct) {
      throw ConfigError("hursts", "H = 1/2 gives alpha = 1, which only the direct scheme supports");
    }
  }
  if (steps.size() < 2) throw ConfigError("steps", "needs at least two step sizes");
  std::vector<double> sorted = steps;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (std::abs(sorted[i] / sorted[i - 1] - 2.0) > 1e-12) throw ConfigError("steps", "step sizes must be dyadic");
  }
  if (!(reference_step > 0.0)) throw ConfigError("reference_step", "must be positive");
  std::size_t ratio = 0;
  if (!is_power_of_two_ratio(sorted.front(), reference_step, &ratio) || ratio < 4) {
    throw ConfigError("reference_step", "every step must be a power-of-two multiple >= 4 of the reference step");
  }
  if (!(horizon > 0.0)) throw ConfigError("horizon", "must be positive");
  grid_steps(horizon, sorted.back(), "horizon");
  if (paths == 0) throw ConfigError("paths", "must be positive");
  if (eps < 0.0 || eps >= 1.0) throw ConfigError("eps", "must lie in [0, 1)");
}

ConvergenceResult run_convergence(const ConvergenceConfig& config) {
  config.validate();
  ConvergenceResult result;
  result.config = config;
  std::vector<double> steps = config.steps;
  std::sort(steps.begin(), steps.end());
  const std::vector<Scheme> schemes = selected(config.scheme);
  const double kf = config.reference_step;
  const std::size_t fine_steps = grid_steps(config.horizon, kf, "reference_step");
  std::size_t ref_stride = 0;
  is_power_of_two_ratio(steps.front(), kf, &ref_stride);

  for (std::size_t hi = 0; hi < config.hursts.size(); ++hi) {
    const double hurst = config.hursts[hi];
    const FgleProblem problem = FgleProblem::physical(hurst, make_force("harmonic"), {config.x0});
    const PhysicalNoiseSampler sampler(fine_steps, kf, hurst, 1);
    const RelaxationTable table = RelaxationTable::build(problem.alpha, kf, fine_steps);

    std::vector<std::size_t> strides(steps.size());
    std::vector<SchemeKernel> kernels(steps.size());
    std::vector<double> eps(steps.size(), 0.0);
    for (std::size_t ki = 0; ki < steps.size(); ++ki) {
      is_power_of_two_ratio(steps[ki], kf, &strides[ki]);
      if (std::find(schemes.begin(), schemes.end(), Scheme::fast) != schemes.end()) {
        eps[ki] = config.eps > 0.0 ? config.eps : scheme_tolerance(steps[ki], hurst);
        kernels[ki] = scheme_kernel_for(problem.alpha, steps[ki], config.horizon, eps[ki]);
      }
    }

    const std::size_t slots = schemes.size() * steps.size();
    auto partials = parallel_chunks<std::vector<StrongErrorAccumulator>>(
        config.paths, config.chunk, config.threads, [&](std::size_t begin, std::size_t end) {
          std::vector<StrongErrorAccumulator> acc(slots);
          for (std::size_t p = begin; p < end; ++p) {
            const GPath fine = sampler.sample(derive_seed(derive_seed(config.seed, hi), p));
            const ReferenceSolution ref = exact_harmonic(fine, problem.x0, table, ref_stride);
            for (std::size_t ki = 0; ki < steps.size(); ++ki) {
              const GPath coarse = subsample_path(fine, strides[ki]);
              for (std::size_t si = 0; si < schemes.size(); ++si) {
                const Trajectory traj = schemes[si] == Scheme::direct ? solve_direct(problem, coarse)
                                                                      : solve_fast(problem, coarse, kernels[ki]);
                acc[si * steps.size() + ki].add(traj, ref);
              }
            }
          }
          return acc;
        });
    std::vector<StrongErrorAccumulator> total(slots);
    for (const auto& part : partials) {
      for (std::size_t s = 0; s < slots; ++s) total[s].merge(part[s]);
    }

    for (std::size_t si = 0; si < schemes.size(); ++si) {
      std::vector<double> lx, ly;
      for (std::size_t ki = 0; ki < steps.size(); ++ki) {
        const auto& acc = total[si * steps.size() + ki];
        ConvergenceRow row;
        row.hurst = hurst;
        row.scheme = schemes[si];
        row.step = steps[ki];
        row.sup_error = acc.sup();
        row.final_error = acc.rms().back();
        row.sup_time = static_cast<double>(acc.sup_index()) * steps[ki];
        row.paths = acc.paths();
        row.modes = schemes[si] == Scheme::fast ? kernels[ki].soe.size() : 0;
        row.eps = schemes[si] == Scheme::fast ? eps[ki] : 0.0;
        result.rows.push_back(row);
        lx.push_back(std::log(row.step));
        ly.push_back(std::log(row.sup_error));
      }
      ConvergenceFit fit;
      fit.hurst = hurst;
      fit.scheme = schemes[si];
      fit.fit = fit_line(lx, ly);
      // H = 1/2 is the memoryless Euler case with classical order 1.
      fit.theoretical = hurst == 0.5 ? 1.0 : theoretical_order(hurst);
      fit.log_factor = order_has_log_factor(hurst);
      result.fits.push_back(fit);
    }
  }
  return result;
}

double scheme_discrepancy(const FgleProblem& problem, double step, double horizon, double eps, std::uint64_t seed) {
  if (!problem.is_physical()) throw DomainError("scheme discrepancy samples G and needs the physical parameter map");
  const std::size_t steps = grid_steps(horizon, step, "horizon");
  const GPath noise = PhysicalNoiseSampler(steps, step, problem.hurst, problem.dim).sample(seed);
  const SchemeKernel kernel = scheme_kernel_for(problem.alpha, step, horizon, eps);
  const Trajectory direct = solve_direct(problem, noise);
  const Trajectory fast = solve_fast(problem, noise, kernel);
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.states.size(); ++i) worst = std::max(worst, std::abs(direct.states[i] - fast.states[i]));
  return worst;
}

Histogram make_histogram(std::span<const double> samples, std::size_t dims, const std::vector<double>& lo,
                         const std::vector<double>& hi, const std::vector<std::size_t>& bins) {
  if (dims == 0 || lo.size() != dims || hi.size() != dims || bins.size() != dims) {
    throw DomainError("histogram box and bins must have one entry per dimension");
  }
  for (std::size_t d = 0; d < dims; ++d) {
    if (!(lo[d] < hi[d]) || bins[d] == 0) throw DomainError("histogram needs lo < hi and at least one bin");
  }
  if (samples.size() % dims != 0) throw DomainError("sample count is not a multiple of the dimension");
  Histogram h;
  h.dims = dims;
  h.lo = lo;
  h.hi = hi;
  h.bins = bins;
  std::size_t cells = 1;
  for (std::size_t b : bins) cells *= b;
  std::vector<std::size_t> counts(cells, 0);
  h.samples = samples.size() / dims;
  for (std::size_t p = 0; p < h.samples; ++p) {
    std::size_t index = 0;
    bool outside = false;
    for (std::size_t d = 0; d < dims; ++d) {
      const double x = samples[p * dims + d];
      const double u = (x - lo[d]) / h.bin_width(d);
      long b = static_cast<long>(std::floor(u));
      if (x < lo[d] || x > hi[d] || std::isnan(x)) outside = true;
      b = std::clamp(b, 0L, static_cast<long>(bins[d]) - 1);
      index = index * bins[d] + static_cast<std::size_t>(b);
    }
    if (outside) ++h.outliers;
    ++counts[index];
  }
  h.masses.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    h.masses[c] = h.samples ? static_cast<double>(counts[c]) / static_cast<double>(h.samples) : 0.0;
  }
  return h;
}

namespace {

// Simpson weights for m (even) sub-intervals of [a, b].
void simpson_nodes(double a, double b, std::size_t m, std::vector<double>& x, std::vector<double>& w) {
  x.resize(m + 1);
  w.resize(m + 1);
  const double h = (b - a) / static_cast<double>(m);
  for (std::size_t i = 0; i <= m; ++i) {
    x[i] = a + h * static_cast<double>(i);
    w[i] = (i == 0 || i == m) ? h / 3.0 : (i % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
  }
}

std::size_t even_count(double length, double per_unit) {
  auto m = static_cast<std::size_t>(std::ceil(length * per_unit));
  m = std::max<std::size_t>(m, 8);
  return m + (m % 2);
}

// Integrals of f over every cell of the tensor grid given by per-axis edges.
std::vector<double> cell_integrals(const std::vector<std::vector<double>>& edges,
                                   const std::function<double(std::span<const double>)>& f, double per_unit) {
  const std::size_t dims = edges.size();
  std::vector<std::size_t> counts(dims);
  std::size_t cells = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    counts[d] = edges[d].size() - 1;
    cells *= counts[d];
  }
  std::vector<double> out(cells, 0.0);
  std::vector<double> x0, w0, x1, w1, point(dims);
  for (std::size_t c = 0; c < cells; ++c) {
    if (dims == 1) {
      simpson_nodes(edges[0][c], edges[0][c + 1], even_count(edges[0][c + 1] - edges[0][c], per_unit), x0, w0);
      double s = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) {
        point[0] = x0[i];
        s += w0[i] * f(point);
      }
      out[c] = s;
    } else {
      const std::size_t i0 = c / counts[1], i1 = c % counts[1];
      simpson_nodes(edges[0][i0], edges[0][i0 + 1], even_count(edges[0][i0 + 1] - edges[0][i0], per_unit), x0, w0);
      simpson_nodes(edges[1][i1], edges[1][i1 + 1], even_count(edges[1][i1 + 1] - edges[1][i1], per_unit), x1, w1);
      double s = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) {
        point[0] = x0[i];
        double row = 0.0;
        for (std::size_t j = 0; j < x1.size(); ++j) {
          point[1] = x1[j];
          row += w1[j] * f(point);
        }
        s += w0[i] * row;
      }
      out[c] = s;
    }
  }
  return out;
}

}  // namespace

GibbsDensity gibbs_density(const ForceField& force, const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<std::size_t>& bins) {
  if (!force.has_potential()) throw ConfigError("force", "'" + force.name + "' has no potential, so no Gibbs density");
  const std::size_t dims = force.dim;
  if (dims > 2) throw DomainError("Gibbs densities are implemented for one and two dimensions");
  if (lo.size() != dims || hi.size() != dims || bins.size() != dims) {
    throw DomainError("Gibbs box and bins must have one entry per dimension");
  }
  GibbsDensity g;
  g.dims = dims;
  g.lo = lo;
  g.hi = hi;
  g.bins = bins;
  g.potential = force.potential;

  // Minimum of V over a sample grid of the box, used to keep exp(-V) in range.
  std::vector<double> p(dims);
  double vmin = std::numeric_limits<double>::infinity();
  const std::size_t probe = dims == 1 ? 2001 : 201;
  for (std::size_t i = 0; i < probe; ++i) {
    p[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / static_cast<double>(probe - 1);
    if (dims == 1) {
      vmin = std::min(vmin, g.potential(p));
      continue;
    }
    for (std::size_t j = 0; j < probe; ++j) {
      p[1] = lo[1] + (hi[1] - lo[1]) * static_cast<double>(j) / static_cast<double>(probe - 1);
      vmin = std::min(vmin, g.potential(p));
    }
  }
  g.shift = vmin;
  auto weight = [&g](std::span<const double> x) { return std::exp(-(g.potential(x) - g.shift)); };

  // Widen the outer box until exp(-(V - Vmin)) on its boundary is below 1e-14.
  g.outer_lo = lo;
  g.outer_hi = hi;
  double boundary = 0.0;
  for (int iter = 0;; ++iter) {
    if (iter > 400) throw DomainError("potential does not confine: no outer box found for the Gibbs density");
    boundary = 0.0;
    std::vector<double> q(dims);
    const std::size_t samples = dims == 1 ? 1 : 401;
    for (std::size_t d = 0; d < dims; ++d) {
      for (double edge : {g.outer_lo[d], g.outer_hi[d]}) {
        for (std::size_t s = 0; s < samples; ++s) {
          q[d] = edge;
          if (dims == 2) {
            const std::size_t o = 1 - d;
            q[o] = g.outer_lo[o] + (g.outer_hi[o] - g.outer_lo[o]) * static_cast<double>(s) / static_cast<double>(samples - 1);
          }
          boundary = std::max(boundary, weight(q));
        }
      }
    }
    if (boundary <= 1e-14) break;
    for (std::size_t d = 0; d < dims; ++d) {
      g.outer_lo[d] -= 0.25;
      g.outer_hi[d] += 0.25;
    }
  }

  std::vector<std::vector<double>> edges(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double w = (hi[d] - lo[d]) / static_cast<double>(bins[d]);
    edges[d].push_back(g.outer_lo[d]);
    for (std::size_t b = 1; b < bins[d]; ++b) edges[d].push_back(lo[d] + w * static_cast<double>(b));
    edges[d].push_back(g.outer_hi[d]);
  }

  double per_unit = dims == 1 ? 256.0 : 48.0;
  std::vector<double> previous = cell_integrals(edges, weight, per_unit);
  for (int refine = 0;; ++refine) {
    per_unit *= 2.0;
    std::vector<double> current = cell_integrals(edges, weight, per_unit);
    const double z_prev = std::accumulate(previous.begin(), previous.end(), 0.0);
    const double z = std::accumulate(current.begin(), current.end(), 0.0);
    double worst = 0.0;
    for (std::size_t c = 0; c < current.size(); ++c) worst = std::max(worst, std::abs(current[c] - previous[c]) / z);
    if (std::abs(z - z_prev) <= 1e-8 * z && worst <= 1e-9) {
      g.normalization = z;
      g.masses.resize(current.size());
      for (std::size_t c = 0; c < current.size(); ++c) g.masses[c] = current[c] / z;
      break;
    }
    if (refine >= 5) throw DomainError("Simpson quadrature of the Gibbs density did not converge");
    previous = std::move(current);
  }

  // Tail bound: the boundary density times the boundary measure, taking the
  // decay length outside the box to be at most one unit.
  double perimeter = 2.0;
  if (dims == 2) perimeter = 2.0 * ((g.outer_hi[0] - g.outer_lo[0]) + (g.outer_hi[1] - g.outer_lo[1]));
  g.exterior_mass = boundary * perimeter / g.normalization;
  return g;
}

double GibbsDensity::density(std::span<const double> x) const {
  return std::exp(-(potential(x) - shift)) / normalization;
}

double GibbsDensity::second_moment_about(std::span<const double> x0) const {
  std::vector<std::vector<double>> edges(dims);
  for (std::size_t d = 0; d < dims; ++d) edges[d] = {outer_lo[d], outer_hi[d]};
  std::vector<double> center(x0.begin(), x0.end());
  auto f = [this, &center](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    return r2 * std::exp(-(potential(x) - shift));
  };
  const auto parts = cell_integrals(edges, f, dims == 1 ? 2048.0 : 96.0);
  return parts[0] / normalization;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("L1 distance needs equal bin counts");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

double mirror_asymmetry(const Histogram& histogram) {
  if (histogram.dims != 1) throw DomainError("mirror asymmetry is defined for 1D histograms");
  if (std::abs(histogram.lo[0] + histogram.hi[0]) > 1e-12 * (histogram.hi[0] - histogram.lo[0])) {
    throw DomainError("mirror asymmetry needs a box symmetric about 0");
  }
  const std::size_t b = histogram.bins[0];
  double s = 0.0;
  for (std::size_t i = 0; i < b / 2; ++i) s += std::abs(histogram.masses[i] - histogram.masses[b - 1 - i]);
  return s;
}

void ErgodicityConfig::validate() const {
  const ForceField f = make_force(force, force_params);
  if (!(hurst > 0.5 && hurst < 1.0)) throw ConfigError("hurst", "must lie in (1/2, 1)");
  if (x0.size() != f.dim) throw ConfigError("x0", "needs one value per dimension of the force");
  if (!(step > 0.0)) throw ConfigError("step", "must be positive");
  grid_steps(horizon, step, "horizon");
  if (paths == 0) throw ConfigError("paths", "must be positive");
  if (eps < 0.0 || eps >= 1.0) throw ConfigError("eps", "must lie in [0, 1)");
  if (bins.size() != f.dim || box_lo.size() != f.dim || box_hi.size() != f.dim) {
    throw ConfigError("bins", "bins, box_lo and box_hi need one entry per dimension");
  }
  for (std::size_t d = 0; d < f.dim; ++d) {
    if (bins[d] == 0) throw ConfigError("bins", "must be positive");
    if (!(box_lo[d] < box_hi[d])) throw ConfigError("box_lo", "must be below box_hi");
  }
  for (double t : snapshots) {
    if (!(t >= 0.0 && t <= horizon * (1.0 + 1e-12))) throw ConfigError("snapshots", "times must lie in [0, T]");
    const double r = t / step;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r)) {
      throw ConfigError("snapshots", "time " + std::to_string(t) + " is not on the grid");
    }
  }
}

std::vector<double> msd(std::span<const double> states, std::size_t paths, std::size_t times, std::size_t dims,
                        std::span<const double> x0) {
  if (states.size() != paths * times * dims || x0.size() != dims) throw DomainError("MSD input has wrong shape");
  std::vector<double> out(times, 0.0);
  if (paths == 0) return out;
  for (std::size_t t = 0; t < times; ++t) {
    double s = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double e = states[(p * times + t) * dims + d] - x0[d];
        s += e * e;
      }
    }
    out[t] = s / static_cast<double>(paths);
  }
  return out;
}

ErgodicityResult run_ergodicity(const ErgodicityConfig& config) {
  config.validate();
  ErgodicityResult result;
  result.config = config;
  const ForceField force = make_force(config.force, config.force_params);
  const FgleProblem problem = FgleProblem::physical(config.hurst, force, config.x0);
  const std::size_t dims = problem.dim;
  const std::size_t steps = grid_steps(config.horizon, config.step, "horizon");

  std::vector<std::size_t> indices;
  if (config.snapshots.empty()) {
    indices.push_back(0);
    for (int i = 0; i < 48; ++i) {
      const double frac = static_cast<double>(i) / 47.0;
      indices.push_back(static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(steps), frac))));
    }
  } else {
    for (double t : config.snapshots) indices.push_back(static_cast<std::size_t>(std::llround(t / config.step)));
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  const std::size_t times = indices.size();

  SchemeKernel kernel;
  if (config.scheme == Scheme::fast) {
    const double eps = config.eps > 0.0 ? config.eps : scheme_tolerance(config.step, config.hurst);
    kernel = scheme_kernel_for(problem.alpha, config.step, config.horizon, eps);
    result.modes = kernel.soe.size();
  }
  const PhysicalNoiseSampler sampler(steps, config.step, config.hurst, dims);

  std::vector<double> states(config.paths * times * dims);
  parallel_chunks<int>(config.paths, config.chunk, config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GPath noise = sampler.sample(derive_seed(config.seed, p));
      double* out = states.data() + p * times * dims;
      if (config.scheme == Scheme::fast) {
        const auto snap = solve_fast_snapshots(problem, noise, kernel, indices);
        std::copy(snap.begin(), snap.end(), out);
      } else {
        const Trajectory traj = solve_direct(problem, noise);
        for (std::size_t t = 0; t < times; ++t) {
          for (std::size_t d = 0; d < dims; ++d) out[t * dims + d] = traj.at(indices[t], d);
        }
      }
    }
    return 0;
  });

  result.has_gibbs = force.has_potential();
  if (result.has_gibbs) {
    result.gibbs = gibbs_density(force, config.box_lo, config.box_hi, config.bins);
    result.msd_equilibrium = result.gibbs.second_moment_about(config.x0);
  }
  const bool symmetric_1d =
      dims == 1 && std::abs(config.box_lo[0] + config.box_hi[0]) <= 1e-12 * (config.box_hi[0] - config.box_lo[0]);

  std::vector<double> sample(config.paths * dims);
  const double np = static_cast<double>(config.paths);
  for (std::size_t t = 0; t < times; ++t) {
    Snapshot snap;
    snap.index = indices[t];
    snap.time = static_cast<double>(indices[t]) * config.step;
    for (std::size_t p = 0; p < config.paths; ++p) {
      for (std::size_t d = 0; d < dims; ++d) sample[p * dims + d] = states[(p * times + t) * dims + d];
    }
    snap.mean.assign(dims, 0.0);
    snap.variance.assign(dims, 0.0);
    double sum_sq = 0.0, sum_quad = 0.0;
    for (std::size_t p = 0; p < config.paths; ++p) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        snap.mean[d] += sample[p * dims + d];
        const double e = sample[p * dims + d] - config.x0[d];
        r2 += e * e;
      }
      sum_sq += r2;
      sum_quad += r2 * r2;
    }
    for (std::size_t d = 0; d < dims; ++d) snap.mean[d] /= np;
    for (std::size_t p = 0; p < config.paths; ++p) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double e = sample[p * dims + d] - snap.mean[d];
        snap.variance[d] += e * e;
      }
    }
    for (std::size_t d = 0; d < dims; ++d) snap.variance[d] /= config.paths > 1 ? np - 1.0 : 1.0;
    snap.msd = sum_sq / np;
    if (config.paths > 1) {
      const double var = std::max(0.0, (sum_quad / np - snap.msd * snap.msd) * np / (np - 1.0));
      snap.msd_stderr = std::sqrt(var / np);
    }
    snap.histogram = make_histogram(sample, dims, config.box_lo, config.box_hi, config.bins);
    if (result.has_gibbs) snap.l1 = l1_distance(snap.histogram.masses, result.gibbs.masses);
    if (symmetric_1d) snap.asymmetry = mirror_asymmetry(snap.histogram);
    result.snapshots.push_back(std::move(snap));
  }
  result.final_samples = sample;

  if (result.has_gibbs) {
    std::vector<double> lx, ly;
    for (const auto& s : result.snapshots) {
      if (s.time < config.tail_start || s.time <= 0.0) continue;
      const double gap = std::abs(result.msd_equilibrium - s.msd);
      if (!(gap > 3.0 * s.msd_stderr)) break;
      lx.push_back(std::log(s.time));
      ly.push_back(std::log(gap));
      result.msd_gap_times.push_back(s.time);
    }
    if (lx.size() >= 3) {
      result.msd_gap_fit = fit_line(lx, ly);
    } else {
      result.msd_gap_fit.slope = std::numeric_limits<double>::quiet_NaN();
      result.msd_gap_fit.points = lx.size();
    }
  }
  return result;
}

nlohmann::json to_json(const ConvergenceConfig& c) {
  return {{"H", c.hursts},     {"k", c.steps},         {"k_ref", c.reference_step},
          {"T", c.horizon},    {"n_paths", c.paths},   {"scheme", selection_name(c.scheme)},
          {"eps", c.eps},      {"x0", c.x0},           {"seed", c.seed},
          {"chunk", c.chunk}};
}

namespace {

nlohmann::json fit_json(const LineFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r2", f.r2},
          {"slope_stderr", f.slope_stderr},
          {"points", f.points},
          {"band", {f.slope - 2.0 * f.slope_stderr, f.slope + 2.0 * f.slope_stderr}}};
}

}  // namespace

nlohmann::json to_json(const ConvergenceResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"H", row.hurst},
                    {"scheme", scheme_name(row.scheme)},
                    {"k", row.step},
                    {"sup_error", row.sup_error},
                    {"final_error", row.final_error},
                    {"sup_time", row.sup_time},
                    {"n_paths", row.paths},
                    {"modes", row.modes},
                    {"eps", row.eps}});
  }
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : r.fits) {
    nlohmann::json j = fit_json(f.fit);
    j["H"] = f.hurst;
    j["scheme"] = scheme_name(f.scheme);
    j["theoretical_order"] = f.theoretical;
    j["log_factor"] = f.log_factor;
    fits.push_back(std::move(j));
  }
  return {{"config", to_json(r.config)}, {"rows", rows}, {"fits", fits}};
}

nlohmann::json to_json(const ErgodicityConfig& c) {
  return {{"problem", {{"force", c.force}, {"params", c.force_params}}},
          {"H", c.hurst},
          {"x0", c.x0},
          {"k", c.step},
          {"T", c.horizon},
          {"n_paths", c.paths},
          {"scheme", scheme_name(c.scheme)},
          {"eps", c.eps},
          {"snapshots", c.snapshots},
          {"bins", c.bins},
          {"box", {{"lo", c.box_lo}, {"hi", c.box_hi}}},
          {"tail_start", c.tail_start},
          {"seed", c.seed},
          {"chunk", c.chunk}};
}

nlohmann::json to_json(const ErgodicityResult& r) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : r.snapshots) {
    nlohmann::json j = {{"t", s.time},          {"index", s.index},         {"mean", s.mean},
                        {"variance", s.variance}, {"msd", s.msd},           {"msd_stderr", s.msd_stderr},
                        {"outliers", s.histogram.outliers}};
    if (s.l1 >= 0.0) j["l1_gibbs"] = s.l1;
    if (s.asymmetry >= 0.0) j["asymmetry"] = s.asymmetry;
    snaps.push_back(std::move(j));
  }
  nlohmann::json out = {{"config", to_json(r.config)}, {"modes", r.modes}, {"snapshots", snaps}};
  if (!r.snapshots.empty()) {
    const auto& last = r.snapshots.back();
    out["final"] = {{"t", last.time}, {"variance", last.variance}, {"msd", last.msd}};
    if (last.l1 >= 0.0) out["final"]["l1_gibbs"] = last.l1;
    if (last.asymmetry >= 0.0) out["final"]["asymmetry"] = last.asymmetry;
  }
  if (r.has_gibbs) {
    out["gibbs"] = {{"outer_lo", r.gibbs.outer_lo},
                    {"outer_hi", r.gibbs.outer_hi},
                    {"exterior_mass", r.gibbs.exterior_mass},
                    {"msd_equilibrium", r.msd_equilibrium}};
    nlohmann::json fit = fit_json(r.msd_gap_fit);
    fit["window"] = r.msd_gap_times;
    out["msd_gap_fit"] = std::move(fit);
  }
  return out;
}

}  // namespace fgle
