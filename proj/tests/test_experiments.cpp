#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "prefext/analytics.hpp"
#include "prefext/error.hpp"
#include "prefext/experiments.hpp"

using namespace prefext;

TEST_CASE("replications are deterministic and ordered") {
  const auto cfg = ModelConfig::standard(1, 1.0);
  StoppingLaw law{1.0};
  ReplicationOptions opts;
  opts.r = 3;
  opts.reps = 700;
  opts.seed = 42;
  std::vector<ReplicationRecord> a, b;
  run_replications(cfg, law, opts, [&](const ReplicationRecord& r) { a.push_back(r); });
  opts.threads = 3;
  run_replications(cfg, law, opts, [&](const ReplicationRecord& r) { b.push_back(r); });
  REQUIRE(a.size() == 700);
  REQUIRE(b.size() == 700);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == i);
    CHECK(a[i].n == b[i].n);
    CHECK(a[i].prefix == b[i].prefix);
    CHECK(a[i].norm1 == std::accumulate(a[i].prefix.begin(), a[i].prefix.end(), 0.0));
    // One initial vertex: vertex k exists iff N >= k - 1.
    for (std::size_t k = 0; k < 3; ++k) {
      if (a[i].n + 1 < k + 1) CHECK(a[i].prefix[k] == 0.0);
    }
  }
}

TEST_CASE("full replications report the maximum weight") {
  const auto cfg = ModelConfig::standard(2, 1.0);
  StoppingLaw law{2.0};
  ReplicationOptions opts;
  opts.r = 2;
  opts.reps = 200;
  opts.full = true;
  opts.snapshot = true;
  run_replications(cfg, law, opts, [&](const ReplicationRecord& r) {
    REQUIRE(r.snapshot.size() == r.n + 1);
    CHECK(r.max_weight == *std::max_element(r.snapshot.begin(), r.snapshot.end()));
    CHECK(r.prefix[0] == r.snapshot[0]);
    CHECK(std::accumulate(r.snapshot.begin(), r.snapshot.end(), 0.0) ==
          doctest::Approx(cfg.total_mass(r.n * cfg.l) - cfg.beta));
  });
}

TEST_CASE("mean of N matches direct sampling") {
  StoppingLaw law{2.0};
  ReplicationOptions opts;
  opts.r = 1;
  opts.reps = 100'000;
  opts.seed = 3;
  stats::Running via_runs, direct;
  run_replications(ModelConfig::standard(1, 1.0), law, opts,
                   [&](const ReplicationRecord& r) { via_runs.add(static_cast<double>(r.n)); });
  Stream rng(77);
  for (int i = 0; i < 100'000; ++i) direct.add(static_cast<double>(sample_n(law, rng)));
  const double se = std::hypot(via_runs.summary().se, direct.summary().se);
  CHECK(std::fabs(via_runs.mean() - direct.mean()) < 3 * se);
}

TEST_CASE("lp trajectory basics") {
  const auto cfg = ModelConfig::standard(1, 1.0);
  Stream a(1), b(1);
  const auto inf = lp_trajectory(cfg, kInfinity, {10, 100, 1000}, a);
  const auto big = lp_trajectory(cfg, 60.0, {10, 100, 1000}, b);
  REQUIRE(inf.values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(inf.values[i] > 0.0);
    CHECK(big.values[i] == doctest::Approx(inf.values[i]).epsilon(0.1));
  }
  Stream c(2);
  CHECK_THROWS_AS(lp_trajectory(cfg, 0.5, {10}, c), DomainError);
  CHECK_THROWS_AS(lp_trajectory(cfg, 2.0, {10, 10}, c), DomainError);
  CHECK_THROWS_AS(lp_trajectory(cfg, 2.0, {100}, c, LpKind::Norm, 50), CapacityError);
}

TEST_CASE("martingale trajectory") {
  const auto cfg = ModelConfig::standard(1, 1.0);
  Stream rng(4);
  const auto zero = martingale_trajectory(cfg, {0.0, 0.0}, {1, 10, 100}, rng);
  for (double v : zero.values) CHECK(v == 1.0);

  stats::Running early, late;
  for (int i = 0; i < 10'000; ++i) {
    Stream s = Stream::derive(5, i);
    const auto t = martingale_trajectory(cfg, {1.0}, {100, 10'000}, s);
    early.add(t.values[0]);
    late.add(t.values[1]);
  }
  const double se = std::hypot(early.summary().se, late.summary().se);
  CHECK(std::fabs(early.mean() - late.mean()) < 3 * se);
  CHECK(early.mean() == doctest::Approx(mixed_moment({{1.0}, cfg})).epsilon(0.02));

  // A single path settles: the remaining fluctuation is about 1/sqrt(D_1(n)).
  Stream one(6);
  const auto t = martingale_trajectory(ModelConfig::standard(3, 1.0), {1.0}, {1000, 1'000'000, 10'000'000}, one);
  CHECK(std::fabs(t.values[2] / t.values[1] - 1.0) < 0.01);
}

TEST_CASE("Hill estimator") {
  Stream rng(8);
  std::vector<double> x(100'000);
  for (double& v : x) v = std::pow(rng.uniform_open_zero(), -0.5);
  const auto h = hill_estimate(x, 1000);
  CHECK(h.alpha == doctest::Approx(2.0).epsilon(0.1));
  CHECK(default_hill_k(100'000) == 1000);
  const auto constant = hill_estimate(std::vector<double>(50, 3.0), 10);
  CHECK(constant.gamma == 0.0);
  CHECK(std::isinf(constant.alpha));
  CHECK_THROWS_AS(hill_estimate({1.0, 2.0}, 2), DomainError);
  CHECK_THROWS_AS(hill_estimate({1.0, -2.0, 3.0}, 1), DomainError);
  CHECK_THROWS_AS(hill_estimate(std::vector<double>{}, 1), DomainError);
}

TEST_CASE("zipf ranks") {
  const auto z = zipf_ranks({5, 1, 3});
  REQUIRE(z.size() == 3);
  CHECK(z[0] == std::pair<std::size_t, double>{1, 5});
  CHECK(z[1] == std::pair<std::size_t, double>{2, 3});
  CHECK(z[2] == std::pair<std::size_t, double>{3, 1});
  CHECK(zipf_ranks({}).empty());
}

TEST_CASE("edge list ingestion") {
  std::istringstream empty("");
  CHECK(zipf_from_edgelist(empty).empty());

  std::istringstream toy("# toy\n1 2\n3,2\n2\t1  # trailing\n\n");
  const auto deg = in_degrees_from_edgelist(toy);
  CHECK(deg == std::vector<double>{1.0, 2.0});

  std::istringstream a("1 2\n3 2\n2 1\n4 2\n4 1\n"), b("4 1\n2 1\n1 2\n4 2\n3 2\n");
  CHECK(zipf_from_edgelist(a) == zipf_from_edgelist(b));

  std::istringstream bad("1 2\n1 2 3\n");
  try {
    zipf_from_edgelist(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream junk("1 x\n");
  CHECK_THROWS_AS(zipf_from_edgelist(junk), ParseError);
}

TEST_CASE("degree pmf") {
  Stream rng(9);
  const auto p0 = empirical_degree_pmf(ModelConfig::standard(1, 1.0), 0, rng);
  REQUIRE(p0.size() == 2);
  CHECK(p0[1] == 1.0);
  const auto p = empirical_degree_pmf(ModelConfig::standard(1, 1.0), 100'000, rng);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Power law with exponent -(2 + beta): binned ratios stay within a factor of 3.
  const double c10 = (p[10] + p[11] + p[12]) / (std::pow(10.0, -3) + std::pow(11.0, -3) + std::pow(12.0, -3));
  const double c30 = (p[30] + p[31] + p[32]) / (std::pow(30.0, -3) + std::pow(31.0, -3) + std::pow(32.0, -3));
  CHECK(c30 / c10 > 1.0 / 3.0);
  CHECK(c30 / c10 < 3.0);
}

TEST_CASE("simulated Zipf plot is close to linear at the top") {
  Stream rng(10);
  const auto cfg = ModelConfig::standard(1, 1.0);
  UrnState urn(cfg);
  run_to(urn, 100'000, rng);
  auto w = urn.graph_weights();
  for (double& d : w) d -= cfg.beta;
  const auto z = zipf_ranks(w);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < 100 && z[i].second > 0; ++i) {
    x.push_back(std::log(static_cast<double>(z[i].first)));
    y.push_back(std::log(z[i].second));
  }
  const auto fit = fit_line(x, y);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r2 >= 0.98);
}
