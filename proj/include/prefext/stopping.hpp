#pragma once

#include <cstdint>

#include "prefext/rng.hpp"

namespace prefext {

enum class StoppingKind { FlooredPareto };

/// Observation time N with P(N >= k) = k^-alpha on k = 1, 2, ...
struct StoppingLaw {
  double alpha = 1.0;
  StoppingKind kind = StoppingKind::FlooredPareto;

  void validate() const;
};

/// N = floor(u^(-1/alpha)) for u in (0, 1]; saturates at UINT64_MAX.
std::uint64_t n_from_uniform(const StoppingLaw& law, double u);
std::uint64_t sample_n(const StoppingLaw& law, Stream& rng);

/// P(N >= k), exact.
double tail_prob(const StoppingLaw& law, double k);

/// P(N^(l/(l+beta)) > t) = (floor(t^((l+beta)/l)) + 1)^-alpha. Requires t >= 1.
double tail_prob_power(const StoppingLaw& law, double t, std::uint32_t l, double beta);

}  // namespace prefext
