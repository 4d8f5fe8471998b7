#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numeric>

#include "prefext/analytics.hpp"
#include "prefext/diagnostics.hpp"
#include "prefext/error.hpp"
#include "prefext/experiments.hpp"

using namespace prefext;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

double binom_oracle(double x, double y) {
  const big bx(x), by(y);
  const big v = boost::math::tgamma(bx + 1) / (boost::math::tgamma(by + 1) * boost::math::tgamma(bx - by + 1));
  return static_cast<double>(v);
}

// c(n, k) from its defining product over draws, in 50-digit arithmetic.
double c_oracle(std::uint64_t n, double k, const ModelConfig& cfg) {
  const big lb = big(cfg.l) + big(cfg.beta);
  const big z = big(cfg.initial_mass());
  big v = 1;
  for (std::uint32_t i = 0; i < cfg.l; ++i) {
    const big a = (z + k + i) / lb, b = (z + i) / lb;
    v *= boost::math::tgamma(a) / boost::math::tgamma(b);
  }
  for (std::uint64_t m = 0; m < n * cfg.l; ++m) {
    const big s = z + big(m) + big(cfg.beta) * big(m / cfg.l);
    v *= (s + k) / s;
  }
  return static_cast<double>(v);
}

}  // namespace

TEST_CASE("gen_binom values") {
  CHECK(gen_binom(5, 2) == 10.0);
  CHECK(gen_binom(7.3, 0) == 1.0);
  CHECK(gen_binom(-0.5, 0) == 1.0);
  for (auto [x, y] : {std::pair{2.5, 1.5}, std::pair{10.25, 3.5}, std::pair{0.3, 0.7}, std::pair{1e4 + 0.5, 2.2},
                      std::pair{-0.5, 2.0}, std::pair{-2.7, 0.5}, std::pair{3.0, 4.5}}) {
    CAPTURE(x);
    CAPTURE(y);
    CHECK(gen_binom(x, y) == doctest::Approx(binom_oracle(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("gen_binom poles") {
  CHECK_THROWS_AS(gen_binom(-1, 0.5), DomainError);
  CHECK_THROWS_AS(gen_binom(2, -1), DomainError);
  CHECK_THROWS_AS(gen_binom(2, 3), DomainError);
  CHECK_THROWS_AS(gen_binom(-3, -2), DomainError);
  CHECK_THROWS_AS(gen_binom(-2.5, 0.5), DomainError);
}

TEST_CASE("c(n, 0) = 1 and the draw recurrence") {
  for (auto cfg : {ModelConfig::standard(1, 1.0), ModelConfig::standard(3, 1.0), ModelConfig::standard(3, 3.0),
                   ModelConfig::standard(2, 0.35, LoopMode::Model0)}) {
    for (std::uint64_t n : {0u, 1u, 7u, 1000u}) CHECK(c_norm(n, 0.0, cfg) == 1.0);
    for (double k : {0.5, 1.0, 2.0, 2.75}) {
      for (std::uint64_t n : {0u, 1u, 5u, 40u}) {
        double ratio = 1.0;
        for (std::uint32_t i = 0; i < cfg.l; ++i) {
          const double s = cfg.total_mass(n * cfg.l + i);
          ratio *= (s + k) / s;
        }
        CHECK(c_norm(n + 1, k, cfg) / c_norm(n, k, cfg) == doctest::Approx(ratio).epsilon(1e-12));
        CHECK(c_norm(n, k, cfg) == doctest::Approx(c_oracle(n, k, cfg)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("c(n, k) n^{-kl/(l+beta)} tends to 1") {
  const auto cfg = ModelConfig::standard(3, 1.0);
  const double n = 1e6;
  const double ratio = c_norm(1'000'000, 2.0, cfg) * std::pow(n, -2.0 * 3 / 4);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
  // Large n stays finite.
  CHECK(std::isfinite(log_c_norm(100'000'000, 5.0, cfg)));
}

TEST_CASE("mixed moment special cases") {
  const auto cfg = ModelConfig::standard(1, 1.0);
  CHECK(mixed_moment({{0, 0, 0}, cfg}) == 1.0);
  for (double kappa : {0.5, 1.0, 2.0, 2.5}) {
    CHECK(sum_moment(1, kappa, cfg) == doctest::Approx(mixed_moment({{kappa}, cfg})).epsilon(1e-13));
  }
  CHECK(sum_moment(3, 0.0, cfg) == 1.0);
  // E zeta_1 for the toy model: Gamma(2) * 2 / c(0, 1) = sqrt(pi).
  CHECK(mixed_moment({{1.0}, cfg}) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK_THROWS_AS(mixed_moment({{-1.0}, cfg}), DomainError);
  CHECK_THROWS_AS(mixed_moment({{1.0}, ModelConfig::standard(1, 0.0)}), DomainError);
}

TEST_CASE("sum moment equals its multinomial expansion") {
  for (auto cfg : {ModelConfig::standard(1, 1.0), ModelConfig::standard(3, 1.0), ModelConfig::standard(2, 2.5),
                   ModelConfig::standard(2, 0.7, LoopMode::Model0)}) {
    for (std::size_t r = 1; r <= 3; ++r) {
      for (int kappa = 1; kappa <= 3; ++kappa) {
        double expansion = 0.0;
        std::vector<double> k(r, 0.0);
        // All compositions of kappa into r parts.
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
          if (i + 1 == r) {
            k[i] = left;
            double coef = std::tgamma(kappa + 1.0);
            for (double v : k) coef /= std::tgamma(v + 1.0);
            expansion += coef * mixed_moment({k, cfg});
            return;
          }
          for (int v = 0; v <= left; ++v) {
            k[i] = v;
            rec(i + 1, left - v);
          }
        };
        rec(0, kappa);
        CAPTURE(r);
        CAPTURE(kappa);
        CHECK(sum_moment(r, kappa, cfg) == doctest::Approx(expansion).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("reference setting moment factors") {
  CHECK(sum_moment(4, 2.0, ModelConfig::standard(1, 1.0)) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(sum_moment(4, 4.0 / 3.0, ModelConfig::standard(3, 1.0)) == doctest::Approx(9.800114876402594).epsilon(1e-10));
  CHECK(sum_moment(4, 2.0, ModelConfig::standard(3, 3.0)) == doctest::Approx(138.2584865661269).epsilon(1e-10));
}

TEST_CASE("martingale one-step identity is exact") {
  Stream rng(2024);
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    ModelConfig cfg;
    cfg.l = 1 + static_cast<std::uint32_t>(rng() % 3);
    cfg.beta = 0.2 + 3.0 * rng.uniform();
    cfg.loop_mode = rng() % 2 ? LoopMode::Model1 : LoopMode::Model0;
    cfg.initial_weights = {cfg.beta + static_cast<double>(rng() % 3), cfg.beta + 0.5};
    UrnState urn(cfg);
    urn.advance(rng() % 30, rng);
    std::vector<double> k(1 + rng() % std::min<std::size_t>(urn.colours(), 4));
    for (double& v : k) v = 3.0 * rng.uniform();
    const auto counts = urn.counts();
    const double now = martingale_value(counts, k, urn.time(), cfg);
    const double next = martingale_one_step(counts, k, urn.time(), cfg);
    worst = std::max(worst, std::fabs(next / now - 1.0));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("martingale at graph times uses c(n, k)") {
  const auto cfg = ModelConfig::standard(3, 1.0);
  const std::vector<double> counts{10.0, 6.0};
  const std::vector<double> k{1.5, 0.5};
  const double expect =
      gen_binom(10.5, 1.5) * gen_binom(5.5, 0.5) / c_norm(4, 2.0, cfg);
  CHECK(martingale_value(counts, k, 12, cfg) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("mixed moments against simulation") {
  // r=1, k=1, (1,1) and r=2, k=(1,1), (3,1): n^{-kl/(l+beta)} prod D_i(n).
  const std::uint64_t n = 10'000;
  {
    const auto cfg = ModelConfig::standard(1, 1.0);
    const auto mc = moment_mc(cfg, {1.0}, n, 30'000, 31);
    CHECK(std::fabs(mc.mean - mixed_moment({{1.0}, cfg})) < 3 * mc.se);
  }
  {
    const auto cfg = ModelConfig::standard(3, 1.0);
    const auto mc = moment_mc(cfg, {1.0, 1.0}, n, 30'000, 32);
    CHECK(std::fabs(mc.mean - mixed_moment({{1.0, 1.0}, cfg})) < 3 * mc.se);
  }
}

TEST_CASE("sum moment against simulation") {
  const auto cfg = ModelConfig::standard(1, 1.0);
  const std::uint64_t n = 10'000;
  stats::Running acc;
  for (int i = 0; i < 30'000; ++i) {
    Stream rng = Stream::derive(33, i);
    TrackedUrnState t(cfg, 4);
    run_to(t, n, rng);
    const auto d = t.graph_prefix();
    const double s = std::accumulate(d.begin(), d.end(), 0.0);
    acc.add(s * s / static_cast<double>(n));
  }
  const auto mc = acc.summary();
  CHECK(std::fabs(mc.mean - sum_moment(4, 2.0, cfg)) < 3 * mc.se);
}
