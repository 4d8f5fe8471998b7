#include "prefext/diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "prefext/analytics.hpp"
#include "prefext/error.hpp"
#include "prefext/experiments.hpp"
#include "prefext/spectral.hpp"
#include "prefext/stats.hpp"
#include "prefext/stopping.hpp"

namespace prefext {

WeightLaw graph_step_law(const ModelConfig& cfg, std::span<const double> weights) {
  WeightLaw law;
  std::vector<std::size_t> targets;
  const std::size_t n = weights.size();
  std::function<void(double)> rec = [&](double prob) {
    if (targets.size() == cfg.l) {
      // Add whole hit counts once so both laws build bit-identical keys.
      std::vector<double> hits(n + 1, 0.0);
      for (std::size_t t : targets) hits[t] += 1.0;
      std::vector<double> next(weights.begin(), weights.end());
      next.push_back(cfg.beta);
      for (std::size_t k = 0; k <= n; ++k) next[k] += hits[k];
      law[next] += prob;
      return;
    }
    const auto p = attachment_probabilities(cfg, weights, targets);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] <= 0.0) continue;
      targets.push_back(k);
      rec(prob * p[k]);
      targets.pop_back();
    }
  };
  if (n == 0) throw InvalidState("graph needs at least one vertex");
  rec(1.0);
  return law;
}

WeightLaw urn_block_law(const ModelConfig& cfg, std::span<const double> weights) {
  const bool loops = cfg.loop_mode == LoopMode::Model1;
  std::vector<double> urn(weights.begin(), weights.end());
  if (loops) urn.push_back(cfg.beta);
  std::vector<double> hits(urn.size(), 0.0);
  WeightLaw law;
  std::function<void(std::uint32_t, double)> rec = [&](std::uint32_t drawn, double prob) {
    if (drawn == cfg.l) {
      std::vector<double> next(weights.begin(), weights.end());
      // Model 0: the fresh colour immigrates now; Model 1: it was already present.
      next.push_back(cfg.beta);
      for (std::size_t k = 0; k < hits.size(); ++k) next[k] += hits[k];
      law[next] += prob;
      return;
    }
    const double total = std::accumulate(urn.begin(), urn.end(), 0.0) + drawn;
    for (std::size_t k = 0; k < urn.size(); ++k) {
      if (urn[k] + hits[k] <= 0.0) continue;
      const double p = (urn[k] + hits[k]) / total;
      hits[k] += 1.0;
      rec(drawn + 1, prob * p);
      hits[k] -= 1.0;
    }
  };
  rec(0, 1.0);
  return law;
}

double martingale_one_step(std::span<const double> counts, std::span<const double> k,
                           std::uint64_t m, const ModelConfig& cfg) {
  const std::size_t r = k.size();
  if (counts.size() < r) throw InvalidState("fewer counts than exponents");
  const double total = cfg.total_mass(m);
  std::vector<double> next(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(r));
  const std::size_t s = cfg.initial_colours();
  auto immigrate = [&](std::vector<double>& v) {
    if ((m + 1) % cfg.l != 0) return;
    const std::uint64_t colour = s + (m + 1) / cfg.l - 1;
    if (colour < r) v[colour] += cfg.beta;
  };
  double expectation = 0.0;
  double tracked = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    tracked += next[i];
    if (next[i] <= 0.0) continue;
    auto v = next;
    v[i] += 1.0;
    immigrate(v);
    expectation += next[i] / total * martingale_value(v, k, m + 1, cfg);
  }
  const double rest = (total - tracked) / total;
  if (rest > 0.0) {
    auto v = next;
    immigrate(v);
    expectation += rest * martingale_value(v, k, m + 1, cfg);
  }
  return expectation;
}

// ---------------------------------------------------------------------------
// Property suite

namespace {

std::string fmt(const char* label, double v) {
  std::ostringstream o;
  o.precision(6);
  o << label << "=" << v;
  return o.str();
}

ModelConfig random_config(Stream& rng) {
  ModelConfig cfg;
  cfg.l = 1 + static_cast<std::uint32_t>(rng() % 3);
  cfg.beta = 0.25 + 3.0 * rng.uniform();
  cfg.loop_mode = rng() % 2 ? LoopMode::Model1 : LoopMode::Model0;
  const std::size_t n0 = 1 + rng() % 3;
  cfg.initial_weights.clear();
  for (std::size_t i = 0; i < n0; ++i) {
    cfg.initial_weights.push_back(static_cast<double>(rng() % 4) + cfg.beta);
  }
  return cfg;
}

DiagnosticResult deterministic_total(std::uint64_t seed) {
  Stream rng(seed);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const auto cfg = random_config(rng);
    UrnState urn(cfg);
    for (std::uint64_t checkpoint : {1ull, 7ull, 100ull, 10'000ull, 100'000ull}) {
      urn.advance(checkpoint - urn.time(), rng);
      const auto counts = urn.counts();
      const double sum = std::accumulate(counts.begin(), counts.end(), 0.0);
      const double expect = cfg.total_mass(urn.time());
      worst = std::max(worst, std::fabs(sum - expect) / expect);
    }
  }
  // Summing 10^5 counts in double loses about n * eps.
  return {"deterministic_total", worst <= 1e-10, fmt("max_rel_err", worst)};
}

DiagnosticResult duality(std::uint64_t seed) {
  Stream rng(seed);
  double worst = 0.0;
  for (int c = 0; c < 30; ++c) {
    auto cfg = random_config(rng);
    std::vector<double> w = cfg.initial_weights;
    const std::size_t extra = rng() % 3;
    for (std::size_t i = 0; i < extra; ++i) w.push_back(cfg.beta + static_cast<double>(rng() % 3));
    const auto g = graph_step_law(cfg, w);
    const auto u = urn_block_law(cfg, w);
    if (g.size() != u.size()) return {"duality", false, "support sizes differ"};
    for (const auto& [state, p] : g) {
      auto it = u.find(state);
      if (it == u.end()) return {"duality", false, "support mismatch"};
      worst = std::max(worst, std::fabs(p - it->second));
    }
  }
  return {"duality", worst <= 1e-12, fmt("max_abs_diff", worst)};
}

DiagnosticResult martingale_exact(std::uint64_t seed) {
  Stream rng(seed);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    auto cfg = random_config(rng);
    UrnState urn(cfg);
    urn.advance(rng() % 40, rng);
    const std::size_t present = std::min<std::size_t>(urn.colours(), 3);
    std::vector<double> k(1 + rng() % present);
    for (double& v : k) v = 2.5 * rng.uniform();
    const auto counts = urn.counts();
    const double now = martingale_value(counts, k, urn.time(), cfg);
    const double next = martingale_one_step(counts, k, urn.time(), cfg);
    worst = std::max(worst, std::fabs(next - now) / now);
  }
  return {"martingale_exact", worst <= 1e-10, fmt("max_rel_err", worst)};
}

DiagnosticResult tracked_equivalence(std::uint64_t seed, double scale) {
  // Distribution of C_1 after 30 draws: full urn vs per-draw tracked vs advance.
  const auto cfg = ModelConfig::standard(2, 1.5);
  const auto reps = static_cast<std::uint64_t>(20'000 * scale);
  std::vector<std::uint64_t> full(64, 0), step(64, 0), jump(64, 0);
  for (std::uint64_t i = 0; i < reps; ++i) {
    Stream a = Stream::derive(seed, 3 * i);
    Stream b = Stream::derive(seed, 3 * i + 1);
    Stream c = Stream::derive(seed, 3 * i + 2);
    UrnState u(cfg);
    u.advance(30, a);
    TrackedUrnState t(cfg, 2);
    for (int d = 0; d < 30; ++d) t.step(b);
    TrackedUrnState f(cfg, 2);
    f.advance(30, c);
    ++full[static_cast<std::size_t>(u.count(0) - 3.5)];
    ++step[static_cast<std::size_t>(t.tracked()[0] - 3.5)];
    ++jump[static_cast<std::size_t>(f.tracked()[0] - 3.5)];
  }
  const auto s1 = stats::chi2_two_sample(full, step);
  const auto s2 = stats::chi2_two_sample(full, jump);
  const bool ok = s1.pvalue > 0.01 && s2.pvalue > 0.01;
  return {"tracked_equivalence", ok,
          fmt("p_step", s1.pvalue) + " " + fmt("p_advance", s2.pvalue)};
}

DiagnosticResult divergence(std::uint64_t seed, double scale) {
  const auto cfg = ModelConfig::standard(1, 1.0);
  const auto reps = static_cast<std::uint64_t>(1000 * scale);
  std::vector<double> medians;
  for (std::uint64_t n : {100ull, 1000ull, 10'000ull}) {
    std::vector<double> v(reps);
    for (std::uint64_t i = 0; i < reps; ++i) {
      Stream rng = Stream::derive(seed + n, i);
      TrackedUrnState t(cfg, 2);
      run_to(t, n, rng);
      v[i] = t.graph_prefix()[1];
    }
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(reps / 2), v.end());
    medians.push_back(v[reps / 2]);
  }
  const bool ok = medians[0] < medians[1] && medians[1] < medians[2];
  return {"divergence", ok,
          fmt("median_1e2", medians[0]) + " " + fmt("median_1e3", medians[1]) + " " +
              fmt("median_1e4", medians[2])};
}

DiagnosticResult stopping_tail(std::uint64_t seed, double scale) {
  const auto reps = static_cast<std::uint64_t>(200'000 * scale);
  bool ok = true;
  std::string detail;
  for (double alpha : {1.0, 2.0}) {
    StoppingLaw law{alpha};
    Stream rng(seed + static_cast<std::uint64_t>(alpha));
    std::uint64_t ge4 = 0, ge10 = 0;
    for (std::uint64_t i = 0; i < reps; ++i) {
      const auto n = sample_n(law, rng);
      ge4 += n >= 4;
      ge10 += n >= 10;
    }
    for (auto [k, hits] : {std::pair{4.0, ge4}, std::pair{10.0, ge10}}) {
      const double p = std::pow(k, -alpha);
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(reps));
      const double z = (static_cast<double>(hits) / static_cast<double>(reps) - p) / se;
      ok = ok && std::fabs(z) < 3.0;
      detail += fmt("z", z) + " ";
    }
  }
  return {"stopping_tail", ok, detail};
}

DiagnosticResult tail_regular_variation() {
  StoppingLaw law{1.0};
  double worst = 0.0;
  for (auto [l, beta] : {std::pair{1u, 1.0}, std::pair{3u, 1.0}, std::pair{3u, 3.0}}) {
    const double idx = law.alpha * (l + beta) / l;
    for (double lambda : {2.0, 5.0, 10.0}) {
      const double t = 1e5;
      const double ratio = tail_prob_power(law, lambda * t, l, beta) / tail_prob_power(law, t, l, beta);
      worst = std::max(worst, std::fabs(ratio / std::pow(lambda, -idx) - 1.0));
    }
  }
  return {"tail_regular_variation", worst < 0.01, fmt("max_rel_err", worst)};
}

DiagnosticResult simplex_samples(std::uint64_t seed, double scale) {
  const auto params = spectral_params(4, ModelConfig::standard(1, 1.0));
  Stream rng(seed);
  const auto reps = static_cast<std::uint64_t>(200'000 * scale);
  std::uint64_t bad = 0;
  for (std::uint64_t i = 0; i < reps; ++i) bad += !stick_break_sample(params, rng).valid(1e-12);
  return {"simplex_samples", bad == 0, fmt("invalid", static_cast<double>(bad))};
}

DiagnosticResult density_normalisation() {
  using boost::math::quadrature::gauss_kronrod;
  double worst = 0.0;
  for (auto pairs : {std::vector<BetaPair>{{1.5, 2.0}, {0.8, 1.2}},
                     std::vector<BetaPair>{{1.0, 5.0}, {2.0, 2.0}},
                     std::vector<BetaPair>{{2.0, 3.0}, {1.0, 2.0}}}) {
    GenDirichlet g{pairs};
    auto inner = [&](double y1) {
      auto f = [&](double y2) {
        return gen_dirichlet_density(SimplexPoint{{y1, y2, 1.0 - y1 - y2}}, g);
      };
      return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0 - y1, 15, 1e-10);
    };
    const double total = gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 15, 1e-10);
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  return {"density_normalisation", worst < 1e-3, fmt("max_abs_err", worst)};
}

DiagnosticResult moment_closure(std::uint64_t seed, double scale) {
  const auto cfg = ModelConfig::standard(1, 1.0);
  const std::uint64_t n = 10'000;
  const auto reps = static_cast<std::uint64_t>(20'000 * scale);
  stats::Running acc;
  const double norm = std::pow(static_cast<double>(n), cfg.growth_exponent());
  for (std::uint64_t i = 0; i < reps; ++i) {
    Stream rng = Stream::derive(seed, i);
    TrackedUrnState t(cfg, 1);
    run_to(t, n, rng);
    acc.add(t.graph_prefix()[0] / norm);
  }
  // E[D_1(n)] = c(n, 1) E[zeta_1] exactly.
  const double expect = mixed_moment({{1.0}, cfg}) * c_norm(n, 1.0, cfg) / norm;
  const auto s = acc.summary();
  const double z = (s.mean - expect) / s.se;
  return {"moment_closure", std::fabs(z) < 3.0, fmt("z", z)};
}

DiagnosticResult hill_pareto(std::uint64_t seed) {
  Stream rng(seed);
  std::vector<double> x(100'000);
  for (double& v : x) v = std::pow(rng.uniform_open_zero(), -0.5);
  const auto h = hill_estimate(x, 1000);
  return {"hill_pareto", std::fabs(h.alpha - 2.0) < 0.2, fmt("alpha", h.alpha)};
}

}  // namespace

std::vector<std::string> diagnostic_names() {
  return {"deterministic_total", "duality",       "martingale_exact",     "tracked_equivalence",
          "divergence",          "stopping_tail", "tail_regular_variation", "simplex_samples",
          "density_normalisation", "moment_closure", "hill_pareto"};
}

std::vector<DiagnosticResult> run_diagnostics(std::uint64_t seed, double scale, unsigned) {
  if (!(scale > 0.0)) throw DomainError("scale must be > 0");
  std::vector<DiagnosticResult> out;
  out.push_back(deterministic_total(seed));
  out.push_back(duality(seed + 1));
  out.push_back(martingale_exact(seed + 2));
  out.push_back(tracked_equivalence(seed + 3, scale));
  out.push_back(divergence(seed + 4, scale));
  out.push_back(stopping_tail(seed + 5, scale));
  out.push_back(tail_regular_variation());
  out.push_back(simplex_samples(seed + 6, scale));
  out.push_back(density_normalisation());
  out.push_back(moment_closure(seed + 7, scale));
  out.push_back(hill_pareto(seed + 8));
  return out;
}

}  // namespace prefext
