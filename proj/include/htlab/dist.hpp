#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "htlab/errors.hpp"
#include "htlab/quadrature.hpp"
#include "htlab/rng.hpp"

namespace htlab::dist {

enum class SvFamily { constant, log_power };
enum class SignMode { symmetric, positive, two_point };

/// Scalar law with a regularly varying magnitude tail:
///   P(|X| > x) = x^{-alpha} * L(x)  for x at or above the support edge,
/// where L is constant or 1 + c log x. A sample is
///   sign * magnitude - centering + shift,
/// with the sign drawn per `sign`, the centering equal to the mean of
/// sign * magnitude when `centered` is set (alpha > 1 only), and `shift`
/// an unconditional offset.
struct HeavyTailLaw {
  double alpha = 1.0;
  SvFamily family = SvFamily::constant;
  double log_c = 1.0;   // c in L(x) = 1 + c log x, log_power family only
  double shift = 0.0;
  SignMode sign = SignMode::symmetric;
  double sign_q = 0.5;  // P(sign = +1), two_point mode only
  bool centered = false;
};

inline void check(const HeavyTailLaw& law) {
  if (!(law.alpha > 0.0) || !(law.alpha < 2.0))
    throw invalid_law("heavy-tail index alpha must lie in (0, 2)");
  if (law.family == SvFamily::log_power && !(law.log_c > 0.0))
    throw invalid_law("log_power family needs c > 0");
  if (law.sign == SignMode::two_point &&
      !(law.sign_q >= 0.0 && law.sign_q <= 1.0))
    throw invalid_law("two_point sign probability must lie in [0, 1]");
  if (law.centered && !(law.alpha > 1.0))
    throw invalid_law("centering requires a finite mean (alpha > 1)");
  if (!std::isfinite(law.shift)) throw invalid_law("shift must be finite");
}

namespace detail {

/// Safeguarded Newton iteration for a strictly decreasing g on [lo, hi]
/// with g(lo) >= target >= g(hi); returns y with g(y) = target.
template <class G, class DG>
double solve_decreasing(G&& g, DG&& dg, double target, double lo, double hi) {
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gy = g(y);
    if (gy > target)
      lo = y;
    else
      hi = y;
    const double d = dg(y);
    double next = (d < 0.0) ? y - (gy - target) / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  return y;
}

/// log of the support edge for the log_power family: the point where the
/// decreasing branch of x^{-alpha} (1 + c log x) crosses 1.
inline double log_support_edge(double alpha, double c) {
  if (c <= alpha) return 0.0;
  const double y_peak = 1.0 / alpha - 1.0 / c;
  auto g = [&](double y) { return std::log1p(c * y) - alpha * y; };
  auto dg = [&](double y) { return c / (1.0 + c * y) - alpha; };
  double hi = y_peak + 1.0;
  while (g(hi) > 0.0) hi *= 2.0;
  return solve_decreasing(g, dg, 0.0, y_peak, hi);
}

}  // namespace detail

/// Lower edge of the magnitude support (1 unless the slowly varying factor
/// pushes the usable branch outward).
inline double support_edge(const HeavyTailLaw& law) {
  check(law);
  if (law.family == SvFamily::constant) return 1.0;
  thread_local double ka = -1.0, kc = -1.0, kv = 1.0;
  if (ka != law.alpha || kc != law.log_c) {
    kv = std::exp(detail::log_support_edge(law.alpha, law.log_c));
    ka = law.alpha;
    kc = law.log_c;
  }
  return kv;
}

/// P(|X| > x) for the magnitude of the un-shifted, un-centered sample.
/// Equals 1 below the support edge; nonincreasing and right-continuous.
inline double ccdf(const HeavyTailLaw& law, double x) {
  const double x0 = support_edge(law);
  if (!(x > x0)) return 1.0;
  if (law.family == SvFamily::constant) return std::pow(x, -law.alpha);
  const double v = std::pow(x, -law.alpha) * (1.0 + law.log_c * std::log(x));
  return std::min(1.0, v);
}

/// Magnitude quantile: the x >= support edge with ccdf(x) = u, u in (0, 1].
inline double heavy_quantile(const HeavyTailLaw& law, double u) {
  check(law);
  if (!(u > 0.0 && u <= 1.0)) throw invalid_law("quantile level must lie in (0, 1]");
  if (law.family == SvFamily::constant) return std::pow(u, -1.0 / law.alpha);
  const double y0 = detail::log_support_edge(law.alpha, law.log_c);
  const double target = std::log(u);
  const double a = law.alpha, c = law.log_c;
  auto g = [&](double y) { return std::log1p(c * y) - a * y; };
  auto dg = [&](double y) { return c / (1.0 + c * y) - a; };
  if (g(y0) <= target) return std::exp(y0);
  double hi = std::max(y0 + 1.0, -target / a + 1.0);
  while (g(hi) > target) hi *= 2.0;
  return std::exp(detail::solve_decreasing(g, dg, target, y0, hi));
}

/// Mean of the magnitude (alpha > 1). The log_power family integrates the
/// tail by tanh-sinh quadrature to 1e-10; the constant family is analytic.
inline double magnitude_mean(const HeavyTailLaw& law) {
  check(law);
  if (!(law.alpha > 1.0))
    throw unsupported_regime("magnitude mean needs alpha > 1");
  if (law.family == SvFamily::constant) return law.alpha / (law.alpha - 1.0);
  thread_local double ka = -1.0, kc = -1.0, kv = 0.0;
  if (ka != law.alpha || kc != law.log_c) {
    const double a = law.alpha, c = law.log_c;
    const double x0 = support_edge(law);
    const double lx0 = std::log(x0);
    // E|X| = x0 + int_{x0}^inf ccdf(x) dx, transformed by x = x0 / t
    auto integrand = [&](double t) {
      return std::pow(t, a - 2.0) * (1.0 + c * (lx0 - std::log(t)));
    };
    kv = x0 + std::pow(x0, 1.0 - a) * tanh_sinh(integrand, 0.0, 1.0, 1e-11);
    ka = a;
    kc = c;
  }
  return kv;
}

/// Mean subtracted from sign * magnitude when the law is centered.
inline double centering_offset(const HeavyTailLaw& law) {
  if (!law.centered) return 0.0;
  switch (law.sign) {
    case SignMode::symmetric:
      return 0.0;
    case SignMode::positive:
      return magnitude_mean(law);
    case SignMode::two_point:
      return (2.0 * law.sign_q - 1.0) * magnitude_mean(law);
  }
  return 0.0;
}

/// One draw by inverse transform: magnitude from the first uniform, then a
/// sign uniform when the sign mode needs one.
inline double sample_heavy(const HeavyTailLaw& law, Rng& rng) {
  check(law);
  const double mag = heavy_quantile(law, rng.uniform());
  double s = 1.0;
  if (law.sign == SignMode::symmetric)
    s = rng.uniform() < 0.5 ? -1.0 : 1.0;
  else if (law.sign == SignMode::two_point)
    s = rng.uniform() < law.sign_q ? 1.0 : -1.0;
  return s * mag - centering_offset(law) + law.shift;
}

/// b_n = inf{x >= 0 : ccdf(x) <= 2 / (n (n+1))}, the natural scale of the
/// largest of n(n+1)/2 magnitudes. n = 1 gives level 1, attained already at
/// x = 0. The root-finding result is nudged to the exactly minimal double.
inline double quantile_b_n(const HeavyTailLaw& law, std::uint64_t n) {
  check(law);
  if (n == 0) throw invalid_law("b_n needs n >= 1");
  if (n == 1) return 0.0;
  const double pairs = 0.5 * static_cast<double>(n) * (static_cast<double>(n) + 1.0);
  const double tau = 1.0 / pairs;
  double b = (law.family == SvFamily::constant)
                 ? std::pow(pairs, 1.0 / law.alpha)
                 : heavy_quantile(law, tau);
  while (ccdf(law, b) > tau) b = std::nextafter(b, std::numeric_limits<double>::infinity());
  for (int k = 0; k < 256; ++k) {
    const double lo = std::nextafter(b, 0.0);
    if (!(lo < b) || ccdf(law, lo) > tau) break;
    b = lo;
  }
  return b;
}

/// Frechet CDF exp(-x^{-alpha}) on x > 0, 0 elsewhere.
inline double frechet_cdf(double alpha, double x) {
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw invalid_law("Frechet shape must lie in (0, 2)");
  if (!(x > 0.0)) return 0.0;
  return std::exp(-std::pow(x, -alpha));
}

/// Stable law in the parameterization with characteristic function
///   exp(-|t|^a [1 - i b tan(pi a / 2) sgn t])            for a != 1,
///   exp(-|t|   [1 + i b (2/pi) sgn t log |t|])           for a  = 1,
/// extended by scale * Z + location.
struct StableLaw {
  double index;
  double skewness = 0.0;
  double scale = 1.0;
  double location = 0.0;
};

inline void check(const StableLaw& law) {
  if (!(law.index > 0.0) || !(law.index < 2.0))
    throw invalid_law("stable index must lie in (0, 2)");
  if (!(law.skewness >= -1.0 && law.skewness <= 1.0))
    throw invalid_law("stable skewness must lie in [-1, 1]");
  if (!(law.scale > 0.0)) throw invalid_law("stable scale must be positive");
}

/// Chambers-Mallows-Stuck transform of one uniform angle V on
/// (-pi/2, pi/2) and one standard exponential W, drawn in that order.
inline double sample_stable(const StableLaw& law, Rng& rng) {
  check(law);
  const double a = law.index;
  const double b = law.skewness;
  const double V = M_PI * (rng.uniform() - 0.5);
  const double W = rng.exponential();
  double z;
  if (a == 1.0) {
    const double xi = 0.5 * M_PI + b * V;
    z = (2.0 / M_PI) *
        (xi * std::tan(V) - b * std::log((0.5 * M_PI * W * std::cos(V)) / xi));
  } else {
    const double ta = std::tan(0.5 * M_PI * a);
    const double B = std::atan(b * ta) / a;
    const double S = std::pow(1.0 + b * b * ta * ta, 0.5 / a);
    z = S * std::sin(a * (V + B)) / std::pow(std::cos(V), 1.0 / a) *
        std::pow(std::cos(V - a * (V + B)) / W, (1.0 - a) / a);
  }
  return law.scale * z + law.location;
}

/// Monte Carlo reference for one-sided stable limits of heavy-tailed sums:
/// m realizations of c_k^{-1} sum_{i<=k} X_i with X = |sample| ^ power,
/// the power chosen so X has tail index `tail_index`, and
/// c_k = inf{x : P(X > x) <= 1/k}. Requires tail_index in (0, 1).
inline std::vector<double> stable_reference_sample(double tail_index,
                                                   std::size_t m,
                                                   std::size_t summands,
                                                   const HeavyTailLaw& law,
                                                   Rng& rng) {
  check(law);
  if (!(tail_index > 0.0 && tail_index < 1.0))
    throw unsupported_regime("one-sided stable reference needs tail index in (0, 1)");
  if (m == 0 || summands == 0)
    throw invalid_law("reference needs at least one realization and one summand");
  const double power = law.alpha / tail_index;
  const double c_k =
      std::pow(heavy_quantile(law, 1.0 / static_cast<double>(summands)), power);
  std::vector<double> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < summands; ++i)
      acc += std::pow(std::abs(sample_heavy(law, rng)), power);
    out.push_back(acc / c_k);
  }
  return out;
}

}  // namespace htlab::dist
