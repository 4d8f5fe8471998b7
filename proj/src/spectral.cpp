#include "prefext/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "prefext/error.hpp"
#include "prefext/parallel.hpp"

namespace prefext {

// ---------------------------------------------------------------------------
// Parameters and samplers

GenDirichlet GenDirichlet::dirichlet(std::span<const double> alpha) {
  if (alpha.size() < 2) throw DomainError("Dirichlet needs r >= 2");
  GenDirichlet out;
  for (std::size_t k = alpha.size(); k >= 2; --k) {
    const double below = std::accumulate(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(k - 1), 0.0);
    out.pairs.push_back({alpha[k - 1], below});
  }
  out.validate();
  return out;
}

void GenDirichlet::validate() const {
  if (pairs.empty()) throw DomainError("generalised Dirichlet needs r >= 2");
  for (const auto& p : pairs) {
    if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
      throw DomainError("Beta parameters must be finite and > 0");
    }
  }
}

bool SimplexPoint::valid(double tol) const {
  double sum = 0.0;
  for (double v : x) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::fabs(sum - 1.0) <= tol;
}

SimplexPoint SimplexPoint::reversed() const { return SimplexPoint{{x.rbegin(), x.rend()}}; }

GenDirichlet spectral_params(std::size_t r, const ModelConfig& cfg) {
  if (r < 2) throw DomainError("spectral_params needs r >= 2");
  cfg.validate();
  cfg.require_positive_beta();
  const auto initial = cfg.initial_urn();
  const std::size_t s = initial.size();
  const double z = cfg.initial_mass();
  const double l = cfg.l;
  GenDirichlet out;
  for (std::size_t k = r; k >= 2; --k) {
    if (k <= s) {
      const double below =
          std::accumulate(initial.begin(), initial.begin() + static_cast<std::ptrdiff_t>(k - 1), 0.0);
      out.pairs.push_back({initial[k - 1], below});
    } else {
      out.pairs.push_back({cfg.beta, z + (l + cfg.beta) * static_cast<double>(k - 1 - s) + l});
    }
  }
  out.validate();
  return out;
}

double beta_sample(double a, double b, Stream& rng) {
  for (;;) {
    const double x = std::gamma_distribution<double>(a, 1.0)(rng);
    const double y = std::gamma_distribution<double>(b, 1.0)(rng);
    if (x + y > 0.0) return x / (x + y);
  }
}

std::vector<double> dirichlet_sample(std::span<const double> alpha, Stream& rng) {
  std::vector<double> g(alpha.size());
  for (;;) {
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = alpha[i] > 0.0 ? std::gamma_distribution<double>(alpha[i], 1.0)(rng) : 0.0;
      total += g[i];
    }
    if (total > 0.0) {
      for (double& v : g) v /= total;
      return g;
    }
  }
}

SimplexPoint stick_break_sample(const GenDirichlet& params, Stream& rng) {
  SimplexPoint y;
  y.x.resize(params.r());
  double remaining = 1.0;
  for (std::size_t j = 0; j < params.pairs.size(); ++j) {
    const double b = beta_sample(params.pairs[j].a, params.pairs[j].b, rng);
    y.x[j] = remaining * b;
    remaining *= 1.0 - b;
  }
  y.x.back() = remaining;
  return y;
}

namespace {

double xlogy(double p, double x) { return p == 0.0 ? 0.0 : p * std::log(x); }

}  // namespace

double gen_dirichlet_density(const SimplexPoint& y, const GenDirichlet& params) {
  const std::size_t r = params.r();
  if (y.x.size() != r) throw InvalidState("density: dimension mismatch");
  if (!y.valid(1e-9)) return 0.0;
  // Stick j has fraction y_j / T_j, T_j = y_j + ... + y_r; Jacobian prod 1/T_j.
  double log_density = 0.0;
  double tail = 0.0;
  std::vector<double> t(r);
  for (std::size_t j = r; j-- > 0;) {
    tail += y.x[j];
    t[j] = tail;
  }
  t[0] = 1.0;
  for (std::size_t j = 0; j + 1 < r; ++j) {
    const auto& p = params.pairs[j];
    log_density -= std::log(boost::math::beta(p.a, p.b));
    log_density += xlogy(p.a - 1.0, y.x[j]);
    const double next = j + 1 < r ? t[j + 1] : 0.0;
    log_density += xlogy(p.b - 1.0, next);
    log_density += xlogy(1.0 - p.a - p.b, t[j]);
  }
  if (std::isnan(log_density)) return 0.0;
  return std::exp(log_density);
}

// ---------------------------------------------------------------------------
// Mixture

std::vector<MixtureComponent> dirichlet_mixture(std::size_t r, const ModelConfig& cfg,
                                                std::size_t cap) {
  if (r < 2) throw DomainError("dirichlet_mixture needs r >= 2");
  cfg.validate();
  cfg.require_positive_beta();
  const auto initial = cfg.initial_urn();
  const std::size_t s = initial.size();
  if (r <= s) {
    return {MixtureComponent{1.0, {initial.begin(), initial.begin() + static_cast<std::ptrdiff_t>(r)}}};
  }
  const std::uint64_t draws = checked_mul(r - s, cfg.l);
  const double immigrant = cfg.beta;
  auto mass_of = [&](std::size_t k, std::uint32_t hits) {
    return (k < s ? initial[k] : immigrant) + static_cast<double>(hits);
  };

  std::map<std::vector<std::uint32_t>, double> layer;
  layer[std::vector<std::uint32_t>(s, 0)] = 1.0;
  for (std::uint64_t m = 0; m < draws; ++m) {
    const double total = cfg.total_mass(m);
    std::map<std::vector<std::uint32_t>, double> next;
    for (const auto& [hits, w] : layer) {
      for (std::size_t k = 0; k < hits.size(); ++k) {
        const double c = mass_of(k, hits[k]);
        if (c <= 0.0) continue;
        auto moved = hits;
        ++moved[k];
        next[moved] += w * c / total;
      }
      if (next.size() > cap) {
        throw CapacityError("mixture has more than " + std::to_string(cap) +
                            " compositions; use the stick-breaking (MC) route");
      }
    }
    if ((m + 1) % cfg.l == 0) {
      std::map<std::vector<std::uint32_t>, double> grown;
      for (auto& [hits, w] : next) {
        auto h = hits;
        h.push_back(0);
        grown.emplace(std::move(h), w);
      }
      next.swap(grown);
    }
    layer.swap(next);
  }

  std::vector<MixtureComponent> out;
  out.reserve(layer.size());
  for (const auto& [hits, w] : layer) {
    MixtureComponent comp{w, std::vector<double>(r)};
    for (std::size_t k = 0; k < r; ++k) comp.alpha[k] = mass_of(k, hits[k]);
    out.push_back(std::move(comp));
  }
  return out;
}

SimplexPoint mixture_sample(std::span<const MixtureComponent> mixture, Stream& rng) {
  if (mixture.empty()) throw InvalidState("empty mixture");
  double u = rng.uniform();
  std::size_t pick = mixture.size() - 1;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    if (u < mixture[i].weight) {
      pick = i;
      break;
    }
    u -= mixture[i].weight;
  }
  return SimplexPoint{dirichlet_sample(mixture[pick].alpha, rng)};
}

// ---------------------------------------------------------------------------
// Events

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

bool contains(const SphereEvent& ev, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const event::Descending&) {
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
              if (x[i] < x[i + 1]) return false;
            }
            return true;
          },
          [](const event::Full&) { return true; },
          [](const event::Empty&) { return false; },
          [&](const event::CoordinateThreshold& e) {
            if (e.i < 1 || e.i > x.size()) throw DomainError("coordinate index out of range");
            return x[e.i - 1] >= e.c;
          },
          [&](const event::Custom& e) { return e.contains(x); },
      },
      ev);
}

SphereEvent parse_event(const std::string& text) {
  if (text == "descending") return event::Descending{};
  if (text == "full") return event::Full{};
  if (text == "empty") return event::Empty{};
  if (text.rfind("coord:", 0) == 0) {
    std::istringstream in(text.substr(6));
    std::size_t i = 0;
    char sep = 0;
    double c = 0.0;
    if (in >> i >> sep >> c && sep == ':' && in.peek() == std::char_traits<char>::eof() && i >= 1) {
      return event::CoordinateThreshold{i, c};
    }
  }
  throw DomainError("unknown event '" + text + "' (descending, full, empty, coord:i:c)");
}

std::string describe(const SphereEvent& ev) {
  return std::visit(overloaded{
                        [](const event::Descending&) { return std::string("descending"); },
                        [](const event::Full&) { return std::string("full"); },
                        [](const event::Empty&) { return std::string("empty"); },
                        [](const event::CoordinateThreshold& e) {
                          std::ostringstream o;
                          o << "coord:" << e.i << ":" << e.c;
                          return o.str();
                        },
                        [](const event::Custom& e) { return e.name; },
                    },
                    ev);
}

// ---------------------------------------------------------------------------
// Probabilities

SpectralMethod SpectralMethod::monte_carlo(std::uint64_t samples, std::uint64_t seed,
                                           unsigned threads) {
  SpectralMethod m;
  m.kind = SpectralMethodKind::MonteCarlo;
  m.samples = samples;
  m.seed = seed;
  m.threads = threads;
  return m;
}

SpectralMethod SpectralMethod::quadrature(double tolerance) {
  SpectralMethod m;
  m.kind = SpectralMethodKind::Quadrature;
  m.tolerance = tolerance;
  return m;
}

namespace {

constexpr std::uint64_t kMcChunk = 1u << 16;

SpectralResult spectral_mc(const SphereEvent& ev, const GenDirichlet& params,
                           const SpectralMethod& method, Orientation orientation) {
  if (method.samples == 0) throw DomainError("Monte Carlo needs samples >= 1");
  const std::uint64_t chunks = (method.samples + kMcChunk - 1) / kMcChunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_chunks(chunks, resolve_threads(method.threads), [&](std::uint64_t c) {
    Stream rng = Stream::derive(method.seed, c);
    const std::uint64_t n = std::min(kMcChunk, method.samples - c * kMcChunk);
    std::uint64_t h = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      auto y = stick_break_sample(params, rng);
      if (orientation == Orientation::Forward) std::reverse(y.x.begin(), y.x.end());
      if (contains(ev, y.x)) ++h;
    }
    hits[c] = h;
  });
  const double total = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::uint64_t{0}));
  const double n = static_cast<double>(method.samples);
  SpectralResult res;
  res.value = total / n;
  res.se = std::sqrt(res.value * (1.0 - res.value) / n);
  res.method = SpectralMethodKind::MonteCarlo;
  res.samples = method.samples;
  return res;
}

// Per-stick interval constraints of a built-in event in stick coordinates.
// Stick j (0-based, j < r-1) has fraction B_j; y_j = B_j T_j, y_{r-1} = T_{r-1}.
struct StickEvent {
  std::size_t r = 0;
  bool monotone = false;
  bool increasing = false;  // y_0 <= y_1 <= ... (forward descending)
  bool threshold = false;
  std::size_t m = 0;  // 0-based stick-order coordinate of the threshold
  double c = 0.0;

  std::pair<double, double> interval(std::size_t j, const std::vector<double>& b) const {
    double lo = 0.0;
    double hi = 1.0;
    if (monotone) {
      if (j >= 1) {
        const double prev = b[j - 1];
        const double ratio = prev < 1.0 ? prev / (1.0 - prev) : INFINITY;
        if (increasing) {
          lo = std::max(lo, ratio);
        } else {
          hi = std::min(hi, ratio);
        }
      }
      // The r - j remaining coordinates all lie on one side of y_j, so they bound its share.
      const double share = 1.0 / static_cast<double>(r - j);
      if (increasing) {
        hi = std::min(hi, share);
      } else {
        lo = std::max(lo, share);
      }
    }
    if (threshold) {
      double t = 1.0;
      for (std::size_t i = 0; i < j; ++i) t *= 1.0 - b[i];
      if (m == j && m < r - 1) lo = std::max(lo, t > 0.0 ? c / t : INFINITY);
      // Sticks before m must leave at least c behind.
      if (j < m) hi = std::min(hi, t > 0.0 ? 1.0 - c / t : -INFINITY);
    }
    return {lo, hi};
  }
};

class StickQuadrature {
 public:
  StickQuadrature(const GenDirichlet& params, StickEvent ev, double tol)
      : params_(params), ev_(ev), tol_(tol), b_(params.pairs.size(), 0.0) {}

  double run(double* error) { return level(0, error); }

 private:
  double level(std::size_t j, double* error) {
    auto [lo, hi] = ev_.interval(j, b_);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (!(hi > lo)) return 0.0;
    const auto& p = params_.pairs[j];
    const double f_lo = lo <= 0.0 ? 0.0 : boost::math::ibeta(p.a, p.b, lo);
    if (j + 1 == params_.pairs.size()) {
      if (hi >= 1.0) return boost::math::ibetac(p.a, p.b, lo);
      return boost::math::ibeta(p.a, p.b, hi) - f_lo;
    }
    const double f_hi = hi >= 1.0 ? 1.0 : boost::math::ibeta(p.a, p.b, hi);
    if (!(f_hi > f_lo)) return 0.0;
    auto inner = [&](double u) {
      b_[j] = boost::math::ibeta_inv(p.a, p.b, u);
      return level(j + 1, nullptr);
    };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        inner, f_lo, f_hi, 12, tol_, &err);
    if (error) *error = err;
    return v;
  }

  const GenDirichlet& params_;
  StickEvent ev_;
  double tol_;
  std::vector<double> b_;
};

SpectralResult spectral_quadrature(const SphereEvent& ev, const GenDirichlet& params,
                                   const SpectralMethod& method, Orientation orientation) {
  const std::size_t r = params.r();
  if (r > 4) throw DomainError("quadrature is unsupported for r > 4; use Monte Carlo");
  SpectralResult res;
  res.method = SpectralMethodKind::Quadrature;

  StickEvent se;
  se.r = r;
  bool trivial = false;
  std::visit(overloaded{
                 [&](const event::Descending&) {
                   se.monotone = true;
                   se.increasing = orientation == Orientation::Forward;
                 },
                 [&](const event::Full&) {
                   trivial = true;
                   res.value = 1.0;
                 },
                 [&](const event::Empty&) {
                   trivial = true;
                   res.value = 0.0;
                 },
                 [&](const event::CoordinateThreshold& e) {
                   if (e.i < 1 || e.i > r) throw DomainError("coordinate index out of range");
                   if (e.c <= 0.0) {
                     trivial = true;
                     res.value = 1.0;
                     return;
                   }
                   se.threshold = true;
                   se.m = orientation == Orientation::Forward ? r - e.i : e.i - 1;
                   se.c = e.c;
                 },
                 [](const event::Custom&) {
                   throw DomainError("custom events are unsupported by quadrature; use Monte Carlo");
                 },
             },
             ev);
  if (trivial) return res;
  double err = 0.0;
  res.value = StickQuadrature(params, se, method.tolerance).run(&err);
  res.se = err;
  return res;
}

}  // namespace

SpectralResult spectral_prob(const SphereEvent& ev, const GenDirichlet& params,
                             const SpectralMethod& method, Orientation orientation) {
  params.validate();
  if (method.kind == SpectralMethodKind::MonteCarlo) {
    return spectral_mc(ev, params, method, orientation);
  }
  return spectral_quadrature(ev, params, method, orientation);
}

}  // namespace prefext
