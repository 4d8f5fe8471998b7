#include "prefext/stopping.hpp"

#include <cmath>
#include <limits>

#include "prefext/error.hpp"

namespace prefext {

void StoppingLaw::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha", "must be finite and > 0");
}

std::uint64_t n_from_uniform(const StoppingLaw& law, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("uniform must lie in (0, 1]");
  const double y = std::pow(u, -1.0 / law.alpha);
  if (!(y < 1.8446744073709552e19)) return std::numeric_limits<std::uint64_t>::max();
  const auto n = static_cast<std::uint64_t>(std::floor(y));
  return n < 1 ? 1 : n;
}

std::uint64_t sample_n(const StoppingLaw& law, Stream& rng) {
  return n_from_uniform(law, rng.uniform_open_zero());
}

double tail_prob(const StoppingLaw& law, double k) {
  if (k <= 1.0) return 1.0;
  return std::pow(std::ceil(k), -law.alpha);
}

double tail_prob_power(const StoppingLaw& law, double t, std::uint32_t l, double beta) {
  if (!(t >= 1.0)) throw DomainError("tail_prob_power needs t >= 1");
  if (l < 1 || !(beta >= 0.0)) throw DomainError("tail_prob_power needs l >= 1 and beta >= 0");
  const double power = (static_cast<double>(l) + beta) / static_cast<double>(l);
  const double threshold = std::floor(std::pow(t, power));
  return std::pow(threshold + 1.0, -law.alpha);
}

}  // namespace prefext
