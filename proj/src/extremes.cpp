#include "prefext/extremes.hpp"

#include <cmath>
#include <numeric>

#include "prefext/analytics.hpp"
#include "prefext/error.hpp"
#include "prefext/parallel.hpp"

namespace prefext {

double index_of(const ModelConfig& cfg, const StoppingLaw& law) {
  law.validate();
  return law.alpha * (static_cast<double>(cfg.l) + cfg.beta) / static_cast<double>(cfg.l);
}

ApproximationReport breiman_approx(const ExtremeEventSpec& ev, const ModelConfig& cfg,
                                   const StoppingLaw& law, const SpectralMethod& method) {
  cfg.validate();
  cfg.require_positive_beta();
  law.validate();
  if (!(ev.t > 0.0)) throw DomainError("threshold t must be > 0");
  ApproximationReport rep;
  rep.tail_factor = tail_prob_power(law, ev.t, cfg.l, cfg.beta);
  rep.moment_factor = sum_moment(ev.r, index_of(cfg, law), cfg);
  if (ev.r == 1) {
    // The direction of a scalar is always 1.
    rep.spectral_factor = contains(ev.sphere_event, std::vector<double>{1.0}) ? 1.0 : 0.0;
  } else {
    const auto s = spectral_prob(ev.sphere_event, spectral_params(ev.r, cfg), method);
    rep.spectral_factor = s.value;
    rep.spectral_se = s.se;
  }
  rep.approx_prob = rep.tail_factor * rep.moment_factor * rep.spectral_factor;
  return rep;
}

void wilson_interval(std::uint64_t hits, std::uint64_t n, double* low, double* high, double z) {
  if (n == 0) {
    *low = 0.0;
    *high = 1.0;
    return;
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  *low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  *high = hits == n ? 1.0 : std::min(1.0, centre + half);
}

namespace {

constexpr std::uint64_t kRepChunk = 4096;

}  // namespace

EmpiricalEstimate empirical_extreme_prob(const ExtremeEventSpec& ev, const ModelConfig& cfg,
                                         const StoppingLaw& law, std::uint64_t reps,
                                         std::uint64_t seed, unsigned threads) {
  cfg.validate();
  law.validate();
  if (reps < 1) throw DomainError("reps must be >= 1");
  if (ev.r < 1) throw DomainError("r must be >= 1");
  if (!(ev.t >= 0.0)) throw DomainError("threshold t must be >= 0");
  const double z = cfg.initial_mass();
  const double lb = static_cast<double>(cfg.l) + cfg.beta;

  const std::uint64_t chunks = (reps + kRepChunk - 1) / kRepChunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  std::vector<std::uint64_t> simulated(chunks, 0);
  parallel_chunks(chunks, resolve_threads(threads), [&](std::uint64_t c) {
    const std::uint64_t first = c * kRepChunk;
    const std::uint64_t last = std::min(reps, first + kRepChunk);
    std::vector<double> x(ev.r);
    for (std::uint64_t i = first; i < last; ++i) {
      Stream rng = Stream::derive(seed, i);
      const std::uint64_t n = sample_n(law, rng);
      // The whole graph weighs z + n (l + beta) at time n.
      if (z + static_cast<double>(n) * lb <= ev.t) continue;
      ++simulated[c];
      TrackedUrnState state(cfg, ev.r);
      run_to(state, n, rng);
      const auto d = state.graph_prefix();
      const double norm = std::accumulate(d.begin(), d.end(), 0.0);
      if (!(norm > ev.t)) continue;
      for (std::size_t k = 0; k < ev.r; ++k) x[k] = d[k] / norm;
      if (contains(ev.sphere_event, x)) ++hits[c];
    }
  });
  EmpiricalEstimate out;
  out.reps = reps;
  out.hits = std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
  out.simulated = std::accumulate(simulated.begin(), simulated.end(), std::uint64_t{0});
  out.prob = static_cast<double>(out.hits) / static_cast<double>(reps);
  wilson_interval(out.hits, reps, &out.ci_low, &out.ci_high);
  return out;
}

}  // namespace prefext
