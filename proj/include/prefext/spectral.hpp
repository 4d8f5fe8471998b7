#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "prefext/model.hpp"
#include "prefext/rng.hpp"

namespace prefext {

struct BetaPair {
  double a;
  double b;
};

/// Stick-breaking law on the (r-1)-simplex. The natural vector y of the law
/// is built from independent fractions B_k ~ Beta(a_k, b_k), k = r, ..., 2:
///   y = (B_r, (1-B_r) B_{r-1}, ..., prod_{k>=2} (1-B_k)).
/// For the network, y is the normalised prefix in reversed order
/// (D_r, ..., D_1) / |D^r|_1; B_k is D_k's share of D_1 + ... + D_k.
struct GenDirichlet {
  /// (a_r, b_r), (a_{r-1}, b_{r-1}), ..., (a_2, b_2).
  std::vector<BetaPair> pairs;

  std::size_t r() const noexcept { return pairs.size() + 1; }
  /// (a_k, b_k) for 2 <= k <= r.
  const BetaPair& pair(std::size_t k) const { return pairs.at(r() - k); }

  /// Dir(alpha_1, ..., alpha_r) in the same convention: pairs
  /// (alpha_k, alpha_1 + ... + alpha_{k-1}).
  static GenDirichlet dirichlet(std::span<const double> alpha);
  void validate() const;
};

struct SimplexPoint {
  std::vector<double> x;

  /// Coordinates >= 0 and summing to 1 within `tol`.
  bool valid(double tol = 1e-12) const;
  SimplexPoint reversed() const;
};

/// Parameters of the limit direction of (D_1, ..., D_r) (beta > 0, r >= 2):
/// (C_k(0), sum_{i<k} C_i(0)) for k <= s and (beta, z + (l+beta)(k-1-s) + l)
/// for k > s.
GenDirichlet spectral_params(std::size_t r, const ModelConfig& cfg);

/// One draw of y (stick order; reverse it for (D_1, ..., D_r) order).
SimplexPoint stick_break_sample(const GenDirichlet& params, Stream& rng);

/// Density of y with respect to Lebesgue measure on (y_1, ..., y_{r-1}).
/// Zero off the simplex; boundary points evaluate to the limit (0 or +inf).
double gen_dirichlet_density(const SimplexPoint& y, const GenDirichlet& params);

double beta_sample(double a, double b, Stream& rng);
std::vector<double> dirichlet_sample(std::span<const double> alpha, Stream& rng);

struct MixtureComponent {
  double weight;
  /// Dirichlet parameters for (D_1, ..., D_r) order.
  std::vector<double> alpha;
};

/// Law of the limit direction as a Dirichlet mixture over the urn compositions
/// of the first r colours at the moment colour r arrives. Weights are exact
/// (forward recursion over compositions); throws CapacityError when more than
/// `cap` compositions are reachable.
std::vector<MixtureComponent> dirichlet_mixture(std::size_t r, const ModelConfig& cfg,
                                                std::size_t cap = 1'000'000);
/// Draw in (D_1, ..., D_r) order.
SimplexPoint mixture_sample(std::span<const MixtureComponent> mixture, Stream& rng);

namespace event {
/// x_1 >= x_2 >= ... >= x_r.
struct Descending {};
struct Full {};
struct Empty {};
/// x_i >= c, 1-based i.
struct CoordinateThreshold {
  std::size_t i;
  double c;
};
/// Arbitrary region; only the Monte Carlo method can evaluate it.
struct Custom {
  std::function<bool(std::span<const double>)> contains;
  std::string name = "custom";
};
}  // namespace event

using SphereEvent = std::variant<event::Descending, event::Full, event::Empty,
                                 event::CoordinateThreshold, event::Custom>;

/// Coordinates the event is stated in. Forward: (D_1, ..., D_r) order, i.e.
/// the reverse of the stick-breaking vector. StickOrder: the natural vector y.
enum class Orientation { Forward, StickOrder };

bool contains(const SphereEvent& ev, std::span<const double> x);
/// "descending", "full", "empty", "coord:i:c".
SphereEvent parse_event(const std::string& text);
std::string describe(const SphereEvent& ev);

enum class SpectralMethodKind { MonteCarlo, Quadrature };

struct SpectralMethod {
  SpectralMethodKind kind = SpectralMethodKind::Quadrature;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tolerance = 1e-10;

  static SpectralMethod monte_carlo(std::uint64_t samples, std::uint64_t seed, unsigned threads = 1);
  static SpectralMethod quadrature(double tolerance = 1e-10);
};

struct SpectralResult {
  double value = 0.0;
  /// Binomial standard error (MC) or the quadrature error estimate.
  double se = 0.0;
  SpectralMethodKind method = SpectralMethodKind::Quadrature;
  std::uint64_t samples = 0;
};

/// P(y in A*) for the event stated in `orientation` coordinates. Quadrature
/// supports r <= 4 and the built-in events; otherwise DomainError.
SpectralResult spectral_prob(const SphereEvent& ev, const GenDirichlet& params,
                             const SpectralMethod& method,
                             Orientation orientation = Orientation::Forward);

}  // namespace prefext
