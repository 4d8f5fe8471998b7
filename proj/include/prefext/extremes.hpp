#pragma once

#include <cstdint>

#include "prefext/model.hpp"
#include "prefext/spectral.hpp"
#include "prefext/stopping.hpp"

namespace prefext {

/// {|D^r(N)|_1 > t and D^r(N) / |D^r(N)|_1 in A*}, A* in (D_1, ..., D_r) order.
struct ExtremeEventSpec {
  std::size_t r = 4;
  double t = 150.0;
  SphereEvent sphere_event = event::Descending{};
};

struct ApproximationReport {
  double approx_prob = 0.0;
  double tail_factor = 0.0;
  double moment_factor = 0.0;
  double spectral_factor = 0.0;
  double spectral_se = 0.0;
};

/// alpha (l + beta) / l.
double index_of(const ModelConfig& cfg, const StoppingLaw& law);

/// P(N^{l/(l+beta)} > t) * E|zeta^r|_1^{index} * S(A*).
ApproximationReport breiman_approx(const ExtremeEventSpec& ev, const ModelConfig& cfg,
                                   const StoppingLaw& law,
                                   const SpectralMethod& method = SpectralMethod::quadrature());

struct EmpiricalEstimate {
  double prob = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t reps = 0;
  /// Replications that needed simulation (the rest were certain misses).
  std::uint64_t simulated = 0;
};

/// Wilson score interval at z = 1.96.
void wilson_interval(std::uint64_t hits, std::uint64_t n, double* low, double* high,
                     double z = 1.959963984540054);

/// Fraction of replications with |D^r(N)|_1 > t and direction in A*.
/// Replication i uses Stream::derive(seed, i); deterministic for any thread count.
EmpiricalEstimate empirical_extreme_prob(const ExtremeEventSpec& ev, const ModelConfig& cfg,
                                         const StoppingLaw& law, std::uint64_t reps,
                                         std::uint64_t seed, unsigned threads = 1);

}  // namespace prefext
