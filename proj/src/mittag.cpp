#include "fgle/mittag.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fgle/error.hpp"

namespace fgle {

namespace {

constexpr double kAccuracyLimit = 1e-8;
constexpr double kCrossoverTarget = 1e-10;
constexpr double kDoublePeakLimit = 10.0;
constexpr long kMaxBits = 1L << 16;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("Mittag-Leffler order must lie in (0, 1], got " + std::to_string(alpha));
  }
}

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

// alpha = p/q with small q, if alpha is that rational to rounding.
struct Rational {
  long p = 0;
  long q = 0;
};

Rational as_rational(double alpha) {
  for (long q = 1; q <= 64; ++q) {
    const double scaled = alpha * static_cast<double>(q);
    const double p = std::round(scaled);
    if (std::abs(scaled - p) <= 1e-13 * static_cast<double>(q)) return {static_cast<long>(p), q};
  }
  return {};
}

struct Mpfr {
  explicit Mpfr(mpfr_prec_t bits) { mpfr_init2(v, bits); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_t v;
};

// Gamma(1 + n p/q) for n < q per order, kept on a geometric precision grid.
struct GammaTable {
  mpfr_prec_t bits = 0;
  std::vector<std::unique_ptr<Mpfr>> values;
};

std::mutex& gamma_cache_mutex() {
  static std::mutex m;
  return m;
}

// Caller holds gamma_cache_mutex().
const GammaTable& gamma_table(Rational r, mpfr_prec_t bits) {
  static std::map<std::pair<long, long>, GammaTable> cache;
  GammaTable& table = cache[{r.p, r.q}];
  if (table.bits >= bits) return table;
  mpfr_prec_t target = 128;
  while (target < bits) target = target * 19 / 16;
  table.bits = target;
  table.values.clear();
  Mpfr arg(target);
  for (long n = 0; n < r.q; ++n) {
    auto g = std::make_unique<Mpfr>(target);
    mpfr_set_si(arg.v, n * r.p, MPFR_RNDN);
    mpfr_div_si(arg.v, arg.v, r.q, MPFR_RNDN);
    mpfr_add_ui(arg.v, arg.v, 1, MPFR_RNDN);
    mpfr_gamma(g->v, arg.v, MPFR_RNDN);
    table.values.push_back(std::move(g));
  }
  return table;
}

// Series in MPFR. For a = p/q the terms obey
//   t_{n+q} = t_n x^q q^p / prod_{j=1..p} (n p + j q),
// so only the first q terms need a gamma function.
double series_mpfr(double alpha, double x, std::size_t terms, mpfr_prec_t bits) {
  const Rational r = as_rational(alpha);
  // x^q q^p is exact at this width; a short operand keeps each multiply cheap.
  const mpfr_prec_t factor_bits = std::min<mpfr_prec_t>(bits, 53 * r.q + 64 * (r.p + 1));
  Mpfr sum(bits), xp(bits), xv(bits), term(bits), arg(bits), a(bits), factor(std::max<mpfr_prec_t>(factor_bits, 64));
  mpfr_set_zero(sum.v, 1);
  mpfr_set_ui(xp.v, 1, MPFR_RNDN);
  mpfr_set_d(xv.v, x, MPFR_RNDN);
  if (r.q > 0) {
    mpfr_set_si(a.v, r.p, MPFR_RNDN);
    mpfr_div_si(a.v, a.v, r.q, MPFR_RNDN);
  } else {
    mpfr_set_d(a.v, alpha, MPFR_RNDN);
  }

  auto first_terms = [&](mpfr_ptr out, std::size_t n) {
    mpfr_mul_ui(arg.v, a.v, static_cast<unsigned long>(n), MPFR_RNDN);
    mpfr_add_ui(arg.v, arg.v, 1, MPFR_RNDN);
    mpfr_gamma(out, arg.v, MPFR_RNDN);
    mpfr_div(out, xp.v, out, MPFR_RNDN);
  };
  auto accumulate = [&](mpfr_srcptr t, std::size_t n) {
    if (n % 2 == 0) {
      mpfr_add(sum.v, sum.v, t, MPFR_RNDN);
    } else {
      mpfr_sub(sum.v, sum.v, t, MPFR_RNDN);
    }
  };

  if (r.q == 0) {
    for (std::size_t n = 0; n <= terms; ++n) {
      first_terms(term.v, n);
      accumulate(term.v, n);
      mpfr_mul(xp.v, xp.v, xv.v, MPFR_RNDN);
    }
    return mpfr_get_d(sum.v, MPFR_RNDN);
  }

  const auto q = static_cast<std::size_t>(r.q);
  const auto p = static_cast<std::uint64_t>(r.p);
  std::vector<std::unique_ptr<Mpfr>> ring;
  for (std::size_t i = 0; i < q; ++i) ring.push_back(std::make_unique<Mpfr>(bits));
  {
    std::lock_guard lock(gamma_cache_mutex());
    const GammaTable& table = gamma_table(r, bits);
    for (std::size_t n = 0; n < q && n <= terms; ++n) {
      mpfr_div(ring[n]->v, xp.v, table.values[n]->v, MPFR_RNDN);
      accumulate(ring[n]->v, n);
      mpfr_mul(xp.v, xp.v, xv.v, MPFR_RNDN);
    }
  }
  // xp = x^q here.
  mpfr_set(factor.v, xp.v, MPFR_RNDN);
  for (std::uint64_t j = 0; j < p; ++j) mpfr_mul_ui(factor.v, factor.v, static_cast<unsigned long>(q), MPFR_RNDN);

  // Past the peak every later term of a residue class is smaller, so a term
  // only needs enough bits to stay below the sum's rounding.
  const double past_peak = std::pow(x, 1.0 / alpha) / alpha + static_cast<double>(q);
  for (std::size_t n = q; n <= terms; ++n) {
    mpfr_ptr t = ring[n % q]->v;  // holds t_{n-q}
    const auto m = static_cast<std::uint64_t>(n - q);
    if (static_cast<double>(n) > past_peak && !mpfr_zero_p(t)) {
      const mpfr_prec_t need = std::max<mpfr_prec_t>(64, mpfr_get_exp(t) + 80);
      if (need + 64 < mpfr_get_prec(t)) mpfr_prec_round(t, need, MPFR_RNDN);
    }
    mpfr_mul(t, t, factor.v, MPFR_RNDN);
    std::uint64_t product = 1;
    for (std::uint64_t j = 1; j <= p; ++j) {
      const std::uint64_t f = m * p + j * q;
      std::uint64_t next;
      if (__builtin_mul_overflow(product, f, &next) || next > std::numeric_limits<unsigned long>::max()) {
        mpfr_div_ui(t, t, static_cast<unsigned long>(product), MPFR_RNDN);
        product = f;
      } else {
        product = next;
      }
    }
    mpfr_div_ui(t, t, static_cast<unsigned long>(product), MPFR_RNDN);
    accumulate(t, n);
  }
  return mpfr_get_d(sum.v, MPFR_RNDN);
}

std::mutex& crossover_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

MlParams MlParams::for_alpha(double alpha) {
  MlParams p;
  p.alpha = alpha;
  p.crossover = ml_crossover(alpha);
  return p;
}

MlEvaluation ml_series(double alpha, double x, double series_tol) {
  check_alpha(alpha);
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("series needs finite x >= 0");
  if (x == 0.0) return {1.0, 0.0, MlRegime::series};

  // Locate the peak and the last term above tolerance in log space.
  const double lx = std::log(x);
  const double ltol = std::log(series_tol);
  double lpeak = 0.0;
  std::size_t terms = 0;
  for (std::size_t n = 1;; ++n) {
    const double lt = static_cast<double>(n) * lx - std::lgamma(1.0 + static_cast<double>(n) * alpha);
    if (lt > lpeak) lpeak = lt;
    // Terms decrease monotonically once n alpha exceeds x^{1/alpha}.
    if (lt < ltol - 5.0 && lt < lpeak && std::pow(static_cast<double>(n) * alpha, alpha) > x) {
      terms = n;
      break;
    }
    if (n > 100000000) throw AccuracyError("Mittag-Leffler series does not terminate");
  }
  const double peak = std::exp(lpeak);

  if (peak <= kDoublePeakLimit) {
    CompensatedSum sum;
    for (std::size_t n = 0; n <= terms; ++n) {
      const double mag = std::exp(static_cast<double>(n) * lx - std::lgamma(1.0 + static_cast<double>(n) * alpha));
      sum.add(n % 2 == 0 ? mag : -mag);
    }
    return {sum.value(), 4.0 * std::numeric_limits<double>::epsilon() * peak * std::sqrt(static_cast<double>(terms)),
            MlRegime::series};
  }

  const long bits = static_cast<long>(std::ceil(lpeak / std::numbers::ln2)) + 80;
  if (bits > kMaxBits) {
    throw AccuracyError("Mittag-Leffler series at x=" + std::to_string(x) + " needs " + std::to_string(bits) +
                        " bits of precision");
  }
  const double value = series_mpfr(alpha, x, terms, static_cast<mpfr_prec_t>(std::max(bits, 128L)));
  const double rounding = std::exp(lpeak + std::log(static_cast<double>(terms)) - (bits - 8) * std::numbers::ln2);
  return {value, rounding + 1e-17, MlRegime::series};
}

MlEvaluation ml_asymptotic(double alpha, double x) {
  check_alpha(alpha);
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("asymptotic expansion needs finite x > 0");
  const double tail = std::exp(-std::pow(x, 1.0 / alpha));
  if (alpha == 1.0) return {0.0, tail, MlRegime::asymptotic};

  const Rational r = as_rational(alpha);
  const double lx = std::log(x);
  auto log_bound = [&](std::size_t m) {
    const double ma = static_cast<double>(m) * alpha;
    return -static_cast<double>(m) * lx + std::lgamma(ma) - std::log(std::numbers::pi);
  };

  CompensatedSum sum;
  double previous = log_bound(1);
  std::size_t m = 1;
  for (; m < 100000; ++m) {
    const double next = log_bound(m + 1);
    if (next > previous) break;  // m is the smallest term
    // term_m = (-1)^{m+1} x^{-m} Gamma(m a) sin(pi m a) / pi
    double sine;
    if (r.q > 0) {
      const long num = (static_cast<long>(m) * r.p) % (2 * r.q);
      sine = std::sin(std::numbers::pi * static_cast<double>(num) / static_cast<double>(r.q));
      if (num % r.q == 0) sine = 0.0;
    } else {
      const double ma = static_cast<double>(m) * alpha;
      const double f = ma - 2.0 * std::floor(ma / 2.0);
      sine = std::sin(std::numbers::pi * f);
    }
    const double term = std::exp(previous) * sine;
    sum.add(m % 2 == 1 ? term : -term);
    previous = next;
    if (previous < -745.0) break;
  }
  return {sum.value(), std::exp(previous) + tail, MlRegime::asymptotic};
}

double ml_crossover(double alpha) {
  check_alpha(alpha);
  if (alpha == 1.0) return std::numeric_limits<double>::infinity();
  {
    std::lock_guard lock(crossover_mutex());
    static std::map<double, double> cache;
    if (auto it = cache.find(alpha); it != cache.end()) return it->second;
    double x = 0.25;
    while (ml_asymptotic(alpha, x).error_estimate > kCrossoverTarget) x *= 1.01;
    cache.emplace(alpha, 2.0 * x);
    return 2.0 * x;
  }
}

MlEvaluation mittag_leffler_eval(const MlParams& params, double z) {
  check_alpha(params.alpha);
  if (!(z <= 0.0) || !std::isfinite(z)) throw DomainError("Mittag-Leffler evaluation needs finite z <= 0");
  if (params.series_tol > 1e-12 || !(params.series_tol > 0.0)) throw DomainError("series_tol must lie in (0, 1e-12]");
  const double x = -z;
  if (x == 0.0) return {1.0, 0.0, MlRegime::exact};
  if (params.alpha == 1.0) return {std::exp(z), 0.0, MlRegime::exact};
  const double crossover = params.crossover > 0.0 ? params.crossover : ml_crossover(params.alpha);
  const MlEvaluation e = x <= crossover ? ml_series(params.alpha, x, params.series_tol) : ml_asymptotic(params.alpha, x);
  if (e.error_estimate > kAccuracyLimit) {
    throw AccuracyError("Mittag-Leffler E_" + std::to_string(params.alpha) + "(" + std::to_string(z) +
                        ") has estimated error " + std::to_string(e.error_estimate));
  }
  return e;
}

double mittag_leffler(const MlParams& params, double z) { return mittag_leffler_eval(params, z).value; }

double mittag_leffler(double alpha, double z) { return mittag_leffler(MlParams::for_alpha(alpha), z); }

double e_alpha1(double alpha, double t) {
  if (!(t >= 0.0)) throw DomainError("relaxation function needs t >= 0");
  return mittag_leffler(alpha, -std::pow(t, alpha));
}

std::vector<double> e_alpha1_values(double alpha, double step, std::size_t steps) {
  if (!(step > 0.0)) throw DomainError("step must be positive");
  const MlParams params = MlParams::for_alpha(alpha);
  std::vector<double> e(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    e[i] = mittag_leffler(params, -std::pow(static_cast<double>(i) * step, alpha));
  }
  return e;
}

std::vector<double> e_alpha1_increments(double alpha, double step, std::size_t steps) {
  const std::vector<double> e = e_alpha1_values(alpha, step, steps);
  std::vector<double> de(steps);
  for (std::size_t i = 1; i <= steps; ++i) de[i - 1] = e[i] - e[i - 1];
  return de;
}

}  // namespace fgle
