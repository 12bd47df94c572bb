#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "htlab/dist.hpp"
#include "htlab/limits.hpp"
#include "htlab/rng.hpp"

using namespace htlab;
using dist::HeavyTailLaw;
using dist::SignMode;
using dist::SvFamily;

namespace {

const HeavyTailLaw kLogHalf{.alpha = 0.5, .family = SvFamily::log_power, .log_c = 1.0};

double ks_against(std::vector<double> s, double (*cdf)(double)) {
  std::sort(s.begin(), s.end());
  const double m = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, f - static_cast<double>(i) / m);
    d = std::max(d, static_cast<double>(i + 1) / m - f);
  }
  return d;
}

}  // namespace

TEST_CASE("law validation rejects out-of-range parameters") {
  CHECK_THROWS_AS(dist::check(HeavyTailLaw{.alpha = 0.0}), invalid_law);
  CHECK_THROWS_AS(dist::check(HeavyTailLaw{.alpha = 2.0}), invalid_law);
  CHECK_THROWS_AS(dist::check(HeavyTailLaw{.alpha = -1.0}), invalid_law);
  CHECK_THROWS_AS(
      dist::check(HeavyTailLaw{.family = SvFamily::log_power, .log_c = 0.0}),
      invalid_law);
  CHECK_THROWS_AS(
      dist::check(HeavyTailLaw{.sign = SignMode::two_point, .sign_q = 1.5}),
      invalid_law);
  CHECK_THROWS_AS(dist::check(HeavyTailLaw{.alpha = 0.9, .centered = true}),
                  invalid_law);
  CHECK_THROWS_AS(dist::check(HeavyTailLaw{.shift = 1.0 / 0.0}), invalid_law);
  CHECK_NOTHROW(dist::check(HeavyTailLaw{.alpha = 1.3, .centered = true}));
}

TEST_CASE("constant family tail functions are exact power laws") {
  HeavyTailLaw law{.alpha = 0.5};
  CHECK(dist::support_edge(law) == 1.0);
  CHECK(dist::ccdf(law, 0.5) == 1.0);
  CHECK(dist::ccdf(law, 1.0) == 1.0);
  CHECK(dist::ccdf(law, 100.0) == Catch::Approx(0.1).epsilon(1e-14));
  CHECK(dist::heavy_quantile(law, 0.1) == Catch::Approx(100.0).epsilon(1e-14));
  CHECK(dist::heavy_quantile(law, 1.0) == 1.0);
  CHECK_THROWS_AS(dist::heavy_quantile(law, 0.0), invalid_law);
  CHECK_THROWS_AS(dist::heavy_quantile(law, 1.5), invalid_law);
}

TEST_CASE("log-slowed tail matches root-found references") {
  // x^{-1/2} (1 + log x) crosses 1 on its decreasing branch at the support
  // edge; reference values root-found at 30-digit precision.
  CHECK(dist::support_edge(kLogHalf) ==
        Catch::Approx(12.3402023625439488).epsilon(1e-13));
  CHECK(dist::ccdf(kLogHalf, std::exp(1.0)) == 1.0);  // below the edge
  CHECK(dist::ccdf(kLogHalf, 20.0) ==
        Catch::Approx(0.893472898355650906).epsilon(1e-13));
  CHECK(dist::heavy_quantile(kLogHalf, 0.01) ==
        Catch::Approx(2471258.90905262509).epsilon(1e-10));
  for (double u : {1.0, 0.5, 0.05, 1e-4}) {
    const double x = dist::heavy_quantile(kLogHalf, u);
    CHECK(dist::ccdf(kLogHalf, x) == Catch::Approx(u).epsilon(1e-10));
  }
}

TEST_CASE("magnitude mean agrees with the closed form") {
  CHECK(dist::magnitude_mean(HeavyTailLaw{.alpha = 1.5}) ==
        Catch::Approx(3.0).epsilon(1e-14));
  // alpha = 3/2, c = 1 puts the edge at 1, where
  //   E|X| = 1 + (alpha - 1)^{-1} + c (alpha - 1)^{-2} = 7 exactly.
  HeavyTailLaw log15{.alpha = 1.5, .family = SvFamily::log_power, .log_c = 1.0};
  CHECK(dist::support_edge(log15) == 1.0);
  CHECK(dist::magnitude_mean(log15) == Catch::Approx(7.0).epsilon(1e-9));
  CHECK_THROWS_AS(dist::magnitude_mean(HeavyTailLaw{.alpha = 0.9}),
                  unsupported_regime);
}

TEST_CASE("centering offset follows the sign mode") {
  HeavyTailLaw law{.alpha = 1.5, .centered = true};
  CHECK(dist::centering_offset(law) == 0.0);
  law.sign = SignMode::positive;
  CHECK(dist::centering_offset(law) == Catch::Approx(3.0).epsilon(1e-14));
  law.sign = SignMode::two_point;
  law.sign_q = 0.8;
  CHECK(dist::centering_offset(law) == Catch::Approx(1.8).epsilon(1e-13));
  law.centered = false;
  CHECK(dist::centering_offset(law) == 0.0);
}

TEST_CASE("samples decompose into sign, magnitude, centering, and shift") {
  HeavyTailLaw law{.alpha = 1.5,
                   .shift = 5.0,
                   .sign = SignMode::two_point,
                   .sign_q = 0.8,
                   .centered = true};
  const double offset = dist::centering_offset(law);
  CHECK(offset == Catch::Approx(1.8).epsilon(1e-13));
  Rng rng(99);
  Rng replay = rng;
  for (int t = 0; t < 200; ++t) {
    const double got = dist::sample_heavy(law, rng);
    const double mag = dist::heavy_quantile(law, replay.uniform());
    const double s = replay.uniform() < 0.8 ? 1.0 : -1.0;
    CHECK(got == s * mag - offset + 5.0);
  }
}

TEST_CASE("magnitudes exceed a quantile with the right frequency") {
  HeavyTailLaw law{.alpha = 0.7};
  Rng rng(1234);
  const int N = 20000;
  const double u = 0.05;
  const double cut = dist::heavy_quantile(law, u);
  int above = 0, positive = 0;
  for (int t = 0; t < N; ++t) {
    const double x = dist::sample_heavy(law, rng);
    if (std::abs(x) > cut) ++above;
    if (x > 0.0) ++positive;
  }
  const double sd_above = std::sqrt(N * u * (1.0 - u));
  CHECK(std::abs(above - N * u) < 3.0 * sd_above);
  CHECK(std::abs(positive - N * 0.5) < 3.0 * std::sqrt(N * 0.25));
}

TEST_CASE("positive sign mode never emits negative values") {
  HeavyTailLaw law{.alpha = 0.9, .sign = SignMode::positive};
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) CHECK(dist::sample_heavy(law, rng) >= 1.0);
}

TEST_CASE("b_n is the exact upper quantile of the pair count") {
  HeavyTailLaw unit{.alpha = 1.0};
  CHECK(dist::quantile_b_n(unit, 20) == Catch::Approx(210.0).epsilon(1e-14));
  CHECK(dist::quantile_b_n(HeavyTailLaw{.alpha = 0.5}, 10) ==
        Catch::Approx(3025.0).epsilon(1e-12));
  CHECK(dist::quantile_b_n(kLogHalf, 10) ==
        Catch::Approx(622125.527729227005).epsilon(1e-9));
  CHECK(dist::quantile_b_n(unit, 1) == 0.0);  // level 1 is met everywhere
  for (const auto& law : {unit, kLogHalf}) {
    for (std::uint64_t n : {2ull, 17ull, 300ull}) {
      const double b = dist::quantile_b_n(law, n);
      const double tau = 2.0 / (static_cast<double>(n) * (n + 1.0));
      CHECK(dist::ccdf(law, b) <= tau);
      const double below = std::nextafter(b, 0.0);
      CHECK(dist::ccdf(law, below) > tau);
    }
  }
  CHECK_THROWS_AS(dist::quantile_b_n(unit, 0), invalid_law);
}

TEST_CASE("Frechet CDF endpoints and monotonicity") {
  CHECK(dist::frechet_cdf(1.0, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(dist::frechet_cdf(0.5, 0.0) == 0.0);
  CHECK(dist::frechet_cdf(0.5, -3.0) == 0.0);
  double prev = 0.0;
  for (double x = 0.1; x < 20.0; x += 0.3) {
    const double f = dist::frechet_cdf(0.8, x);
    CHECK(f >= prev);
    prev = f;
  }
  CHECK_THROWS_AS(dist::frechet_cdf(2.0, 1.0), invalid_law);
}

TEST_CASE("stable sampler validation") {
  CHECK_THROWS_AS(dist::check(dist::StableLaw{.index = 2.0}), invalid_law);
  CHECK_THROWS_AS(dist::check(dist::StableLaw{.index = 0.5, .skewness = 1.5}),
                  invalid_law);
  CHECK_THROWS_AS(
      dist::check(dist::StableLaw{.index = 0.5, .scale = 0.0}), invalid_law);
}

TEST_CASE("half-index totally skewed stable sampler hits the known CDF") {
  // index 1/2, skewness 1 in this parameterization has the closed CDF
  // erfc(1 / sqrt(2x)) on x > 0.
  Rng rng(2024);
  std::vector<double> s(100000);
  for (auto& v : s) v = dist::sample_stable({.index = 0.5, .skewness = 1.0}, rng);
  const double d = ks_against(std::move(s), [](double x) {
    return x > 0.0 ? std::erfc(1.0 / std::sqrt(2.0 * x)) : 0.0;
  });
  CHECK(d < 0.01);
}

TEST_CASE("normalized heavy sums converge to the one-sided stable law") {
  // Sum of N unit-Pareto powers over its own quantile scale against an
  // independently scaled stable draw; the scale constant is
  // (Gamma(1 - a) cos(pi a / 2))^{1/a}.
  dist::HeavyTailLaw unit{.alpha = 1.0};
  struct Case {
    double tail;
    std::size_t m, summands;
    double tol;
  };
  for (const auto& c : {Case{0.3, 4000, 3000, 0.035}, Case{0.5, 4000, 3000, 0.035},
                        Case{0.8, 2000, 50000, 0.10}}) {
    Rng r1(7), r2(8);
    auto sums = dist::stable_reference_sample(c.tail, c.m, c.summands, unit, r1);
    std::vector<double> ref(c.m);
    const double scale = std::pow(
        std::tgamma(1.0 - c.tail) * std::cos(M_PI * c.tail / 2.0), 1.0 / c.tail);
    for (auto& v : ref)
      v = scale * dist::sample_stable({.index = c.tail, .skewness = 1.0}, r2);
    CHECK(limits::ks_two_sample(sums, ref) < c.tol);
  }
}

TEST_CASE("reference sampler rejects unusable tail indices") {
  dist::HeavyTailLaw unit{.alpha = 1.0};
  Rng rng(1);
  CHECK_THROWS_AS(dist::stable_reference_sample(1.0, 10, 10, unit, rng),
                  unsupported_regime);
  CHECK_THROWS_AS(dist::stable_reference_sample(0.0, 10, 10, unit, rng),
                  unsupported_regime);
  CHECK_THROWS_AS(dist::stable_reference_sample(0.5, 0, 10, unit, rng),
                  invalid_law);
}

TEST_CASE("seeded streams are deterministic and independent") {
  Rng a = Rng::stream(42, 3, 7);
  Rng b(Rng::stream_seed(42, 3, 7));
  for (int t = 0; t < 64; ++t) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng::stream_seed(42, 3, 7) != Rng::stream_seed(42, 3, 8));
  CHECK(Rng::stream_seed(42, 3, 7) != Rng::stream_seed(42, 4, 7));
  CHECK(Rng::stream_seed(42, 3, 7) != Rng::stream_seed(43, 3, 7));
  Rng u(11);
  for (int t = 0; t < 1000; ++t) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}
