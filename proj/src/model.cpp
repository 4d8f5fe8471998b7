#include "prefext/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "prefext/error.hpp"

namespace prefext {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw CapacityError("time counter overflow: " + std::to_string(a) + " * " + std::to_string(b));
  }
  return a * b;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw CapacityError("time counter overflow: " + std::to_string(a) + " + " + std::to_string(b));
  }
  return a + b;
}

// ---------------------------------------------------------------------------
// ModelConfig

ModelConfig ModelConfig::standard(std::uint32_t l, double beta, LoopMode mode) {
  ModelConfig cfg;
  cfg.l = l;
  cfg.beta = beta;
  cfg.loop_mode = mode;
  cfg.initial_weights = {static_cast<double>(l) + beta};
  return cfg;
}

void ModelConfig::validate() const {
  if (l < 1) throw ConfigError("l", "must be a positive integer");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be finite and >= 0");
  if (initial_weights.empty()) throw ConfigError("initial_weights", "needs at least one vertex");
  for (double w : initial_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("initial_weights", "weights must be finite and >= 0");
    }
  }
  if (!(initial_mass() > 0.0)) {
    throw ConfigError("initial_weights", "initial urn is empty (sum of weights + j*beta must be > 0)");
  }
}

void ModelConfig::require_positive_beta() const {
  if (!(beta > 0.0)) throw DomainError("closed-form quantities require beta > 0");
}

double ModelConfig::initial_mass() const noexcept {
  return std::accumulate(initial_weights.begin(), initial_weights.end(), 0.0) +
         static_cast<double>(loop_shift()) * beta;
}

std::vector<double> ModelConfig::initial_urn() const {
  std::vector<double> urn = initial_weights;
  if (loop_mode == LoopMode::Model1) urn.push_back(beta);
  return urn;
}

double ModelConfig::total_mass(std::uint64_t m) const noexcept {
  return initial_mass() + static_cast<double>(m) + beta * static_cast<double>(m / l);
}

// ---------------------------------------------------------------------------
// MassSampler

namespace detail {

MassSampler::MassSampler(std::vector<double> initial_bases, double immigrant_mass)
    : initial_(std::move(initial_bases)), immigrant_mass_(immigrant_mass) {
  initial_cumulative_.resize(initial_.size());
  std::partial_sum(initial_.begin(), initial_.end(), initial_cumulative_.begin());
  initial_total_ = initial_cumulative_.empty() ? 0.0 : initial_cumulative_.back();
  hits_.assign(initial_.size(), 0);
}

std::size_t MassSampler::pick(Stream& rng) const {
  const double total_mass = total();
  if (!(total_mass > 0.0)) throw InvalidState("cannot draw from an empty urn");
  double x = rng.uniform() * total_mass;

  const auto unit = static_cast<double>(draws_.size());
  if (x < unit) {
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(x), draws_.size() - 1);
    return draws_[idx];
  }
  x -= unit;
  const std::size_t extra = immigrants();
  if (x < initial_total_ || extra == 0 || !(immigrant_mass_ > 0.0)) {
    // Rounding can push x past the last positive initial base; clamp there.
    auto it = std::upper_bound(initial_cumulative_.begin(), initial_cumulative_.end(), x);
    if (it == initial_cumulative_.end()) {
      it = std::lower_bound(initial_cumulative_.begin(), initial_cumulative_.end(), initial_total_);
    }
    if (it != initial_cumulative_.end()) {
      return static_cast<std::size_t>(it - initial_cumulative_.begin());
    }
    // Only reachable when every base is zero and hits exist.
    return draws_.back();
  }
  x -= initial_total_;
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(x / immigrant_mass_), extra - 1);
  return initial_.size() + idx;
}

void MassSampler::add_hit(std::size_t k) {
  ++hits_[k];
  draws_.push_back(static_cast<std::uint32_t>(k));
}

void MassSampler::reserve(std::size_t draws, std::size_t colours) {
  draws_.reserve(draws);
  hits_.reserve(colours);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// UrnState

UrnState::UrnState(std::vector<double> masses, Immigration imm, std::size_t loop_shift,
                   std::uint64_t max_draws)
    : sampler_(masses, imm.mass),
      immigration_(imm),
      s_(masses.size()),
      loop_shift_(loop_shift),
      z_(std::accumulate(masses.begin(), masses.end(), 0.0)),
      max_draws_(max_draws) {
  if (!(z_ > 0.0)) throw InvalidState("urn must start non-empty");
}

UrnState::UrnState(const ModelConfig& cfg, std::uint64_t max_draws)
    : UrnState(cfg.initial_urn(), Immigration{cfg.l, cfg.beta}, cfg.loop_shift(), max_draws) {
  cfg.validate();
}

UrnState UrnState::classical(std::vector<double> masses, std::uint64_t max_draws) {
  for (double c : masses) {
    if (!(c >= 0.0)) throw InvalidState("ball masses must be non-negative");
  }
  return UrnState(std::move(masses), Immigration{}, 0, max_draws);
}

std::vector<double> UrnState::counts() const {
  std::vector<double> out(sampler_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sampler_.mass(k);
  return out;
}

double UrnState::total() const noexcept {
  const double immigrated =
      immigration_.period == 0 ? 0.0 : static_cast<double>(m_ / immigration_.period);
  return z_ + static_cast<double>(m_) + immigration_.mass * immigrated;
}

std::vector<double> UrnState::draw_distribution() const {
  auto p = counts();
  const double s = total();
  if (!(s > 0.0)) throw InvalidState("empty urn");
  for (double& x : p) x /= s;
  return p;
}

std::size_t UrnState::step(Stream& rng) {
  if (m_ >= max_draws_) {
    throw CapacityError("urn exceeded its draw cap of " + std::to_string(max_draws_));
  }
  const std::size_t k = sampler_.pick(rng);
  sampler_.add_hit(k);
  ++m_;
  if (immigration_.period != 0 && m_ % immigration_.period == 0) sampler_.add_colour();
  return k;
}

void UrnState::advance(std::uint64_t draws, Stream& rng) {
  const std::uint64_t target = checked_add(m_, draws);
  if (target > max_draws_) {
    throw CapacityError("urn would exceed its draw cap of " + std::to_string(max_draws_));
  }
  const std::uint64_t colours_after =
      s_ + (immigration_.period == 0 ? 0 : target / immigration_.period);
  sampler_.reserve(target, colours_after);
  while (m_ < target) step(rng);
}

std::size_t UrnState::graph_vertices() const noexcept {
  const std::size_t n = immigration_.period == 0 ? 0 : m_ / immigration_.period;
  return s_ - loop_shift_ + n;
}

std::vector<double> UrnState::graph_weights() const {
  std::vector<double> w(graph_vertices());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = count(k);
  return w;
}

double UrnState::max_graph_weight() const noexcept {
  double best = 0.0;
  const std::size_t n = graph_vertices();
  for (std::size_t k = 0; k < n; ++k) best = std::max(best, sampler_.mass(k));
  return best;
}

// ---------------------------------------------------------------------------
// TrackedUrnState

TrackedUrnState::TrackedUrnState(std::vector<double> initial, std::size_t r, Immigration imm,
                                 std::size_t loop_shift)
    : tracked_(r, 0.0),
      immigration_(imm),
      s_(initial.size()),
      loop_shift_(loop_shift),
      z_(std::accumulate(initial.begin(), initial.end(), 0.0)) {
  if (r < 1) throw DomainError("tracked prefix length must be >= 1");
  for (std::size_t k = 0; k < initial.size(); ++k) {
    if (k < r) {
      tracked_[k] = initial[k];
    } else {
      tail_ += initial[k];
    }
  }
}

TrackedUrnState::TrackedUrnState(const ModelConfig& cfg, std::size_t r)
    : TrackedUrnState(cfg.initial_urn(), r, Immigration{cfg.l, cfg.beta}, cfg.loop_shift()) {
  cfg.validate();
}

TrackedUrnState TrackedUrnState::collapse(const UrnState& state, std::size_t r) {
  std::vector<double> initial(state.s_);
  for (std::size_t k = 0; k < state.s_; ++k) initial[k] = state.sampler_.base(k);
  TrackedUrnState out(std::move(initial), r, state.immigration_, state.loop_shift_);
  double prefix = 0.0;
  for (std::size_t k = 0; k < r; ++k) {
    out.tracked_[k] = state.count(k);
    prefix += out.tracked_[k];
  }
  out.m_ = state.m_;
  out.tail_ = state.total() - prefix;
  return out;
}

double TrackedUrnState::total_at(std::uint64_t m) const noexcept {
  const double immigrated =
      immigration_.period == 0 ? 0.0 : static_cast<double>(m / immigration_.period);
  return z_ + static_cast<double>(m) + immigration_.mass * immigrated;
}

std::uint64_t TrackedUrnState::colours_present() const noexcept {
  return s_ + (immigration_.period == 0 ? 0 : m_ / immigration_.period);
}

bool TrackedUrnState::all_tracked_present() const noexcept {
  return immigration_.period == 0 || colours_present() >= tracked_.size();
}

std::vector<double> TrackedUrnState::draw_distribution() const {
  const double s = total();
  if (!(s > 0.0)) throw InvalidState("empty urn");
  std::vector<double> p(tracked_.size() + 1);
  for (std::size_t k = 0; k < tracked_.size(); ++k) p[k] = tracked_[k] / s;
  p.back() = tail_ / s;
  return p;
}

void TrackedUrnState::immigrate_after_draw() {
  if (immigration_.period == 0 || m_ % immigration_.period != 0) return;
  const std::uint64_t colour = s_ + m_ / immigration_.period - 1;  // 0-based
  if (colour < tracked_.size()) {
    tracked_[colour] += immigration_.mass;
  } else {
    tail_ += immigration_.mass;
  }
}

std::size_t TrackedUrnState::step(Stream& rng) {
  const double s = total();
  if (!(s > 0.0)) throw InvalidState("cannot draw from an empty urn");
  if (m_ == std::numeric_limits<std::uint64_t>::max()) throw CapacityError("time counter overflow");
  const double x = rng.uniform() * s;

  std::size_t drawn = tracked_.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < tracked_.size(); ++k) {
    acc += tracked_[k];
    if (x < acc) {
      drawn = k;
      break;
    }
  }
  if (drawn == tracked_.size() && !(tail_ > 0.0)) {
    // x landed past the prefix only through rounding.
    for (std::size_t k = tracked_.size(); k-- > 0;) {
      if (tracked_[k] > 0.0) {
        drawn = k;
        break;
      }
    }
  }
  if (drawn < tracked_.size()) {
    tracked_[drawn] += 1.0;
  } else {
    tail_ += 1.0;
  }
  ++m_;
  immigrate_after_draw();
  return drawn;
}

void TrackedUrnState::advance(std::uint64_t draws, Stream& rng) {
  const std::uint64_t target = checked_add(m_, draws);
  while (m_ < target && !all_tracked_present()) step(rng);
  if (m_ == target) return;

  // From here on immigration only feeds the tail, so the prefix total U is a
  // two-colour chain: draw j hits the prefix with probability U / S_j.
  double prefix = std::accumulate(tracked_.begin(), tracked_.end(), 0.0);
  std::uint64_t hits = 0;
  std::uint64_t j = m_;
  while (j < target) {
    const double s_j = total_at(j);
    const double bound = prefix / s_j;
    if (!(bound > 0.0)) break;
    if (bound >= 1.0) {
      ++hits;
      prefix += 1.0;
      ++j;
      continue;
    }
    // U / S_i is non-increasing in i while U is fixed, so `bound` dominates
    // every later draw: propose with a geometric skip, accept with S_j / S_i.
    const double skip = std::floor(std::log(rng.uniform_open_zero()) / std::log1p(-bound));
    if (!(skip < static_cast<double>(target - j))) break;
    j += static_cast<std::uint64_t>(skip);
    if (rng.uniform() * total_at(j) < s_j) {
      ++hits;
      prefix += 1.0;
    }
    ++j;
  }
  split_prefix_hits(hits, rng);
  m_ = target;
  tail_ = total_at(m_) - std::accumulate(tracked_.begin(), tracked_.end(), 0.0);
}

void TrackedUrnState::split_prefix_hits(std::uint64_t hits, Stream& rng) {
  if (hits == 0) return;
  const std::size_t r = tracked_.size();
  std::vector<double> g(r, 0.0);
  double g_total = 0.0;
  while (!(g_total > 0.0)) {
    g_total = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
      if (tracked_[k] > 0.0) {
        g[k] = std::gamma_distribution<double>(tracked_[k], 1.0)(rng);
        g_total += g[k];
      }
    }
  }
  // Multinomial(hits, g / g_total) by conditional binomials.
  std::vector<double> suffix(r + 1, 0.0);
  for (std::size_t k = r; k-- > 0;) suffix[k] = suffix[k + 1] + g[k];
  std::uint64_t remaining = hits;
  for (std::size_t k = 0; k < r && remaining > 0; ++k) {
    if (!(g[k] > 0.0)) continue;
    std::uint64_t share = remaining;
    if (suffix[k + 1] > 0.0) {
      const double p = std::min(1.0, g[k] / suffix[k]);
      share = std::binomial_distribution<std::uint64_t>(remaining, p)(rng);
    }
    tracked_[k] += static_cast<double>(share);
    remaining -= share;
  }
}

std::vector<double> TrackedUrnState::graph_prefix() const {
  const std::uint64_t n = immigration_.period == 0 ? 0 : m_ / immigration_.period;
  const std::uint64_t existing = s_ - loop_shift_ + n;
  std::vector<double> out(tracked_.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k < existing) out[k] = tracked_[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// GraphState

GraphState::GraphState(const ModelConfig& cfg, bool keep_edges)
    : cfg_(cfg), sampler_(cfg.initial_weights, cfg.beta), keep_edges_(keep_edges) {
  cfg_.validate();
}

double GraphState::weight(std::size_t k) const noexcept {
  return k < vertices() ? sampler_.mass(k) : 0.0;
}

std::vector<double> GraphState::weights() const {
  std::vector<double> w(vertices());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = sampler_.mass(k);
  return w;
}

std::vector<double> GraphState::in_degrees() const {
  auto w = weights();
  for (double& x : w) x -= cfg_.beta;
  return w;
}

std::vector<double> attachment_probabilities(const ModelConfig& cfg,
                                             std::span<const double> weights,
                                             std::span<const std::size_t> earlier) {
  const bool loops = cfg.loop_mode == LoopMode::Model1;
  std::vector<double> weight_now(weights.begin(), weights.end());
  if (loops) weight_now.push_back(cfg.beta);

  const double base_sum = std::accumulate(weight_now.begin(), weight_now.end(), 0.0);
  for (std::size_t target : earlier) {
    if (target >= weight_now.size()) throw InvalidState("earlier edge target out of range");
    weight_now[target] += 1.0;
  }
  const double denominator = static_cast<double>(earlier.size()) + base_sum;
  if (!(denominator > 0.0)) throw InvalidState("no attachable weight");
  for (double& w : weight_now) w /= denominator;
  return weight_now;
}

std::vector<double> GraphState::edge_target_distribution(
    std::span<const std::size_t> earlier) const {
  const auto w = weights();
  return attachment_probabilities(cfg_, w, earlier);
}

void GraphState::step(Stream& rng) {
  if (n_ == std::numeric_limits<std::uint64_t>::max()) throw CapacityError("time counter overflow");
  const std::uint64_t source = vertices() + 1;
  const bool loops = cfg_.loop_mode == LoopMode::Model1;
  if (loops) sampler_.add_colour();
  for (std::uint32_t i = 0; i < cfg_.l; ++i) {
    const std::size_t target = sampler_.pick(rng);
    sampler_.add_hit(target);
    if (keep_edges_) edges_.push_back(Edge{source, target + 1});
  }
  if (!loops) sampler_.add_colour();
  ++n_;
}

// ---------------------------------------------------------------------------

void run_to(UrnState& state, std::uint64_t graph_steps, Stream& rng) {
  if (state.immigration().period == 0) {
    throw InvalidState("graph steps are undefined for an urn without immigration");
  }
  state.advance(checked_mul(graph_steps, state.immigration().period), rng);
}

void run_to(TrackedUrnState& state, std::uint64_t graph_steps, Stream& rng) {
  const auto draws_per_step = state.immigration_period();
  if (draws_per_step == 0) {
    throw InvalidState("graph steps are undefined for an urn without immigration");
  }
  state.advance(checked_mul(graph_steps, draws_per_step), rng);
}

void run_to(GraphState& state, std::uint64_t graph_steps, Stream& rng) {
  checked_add(state.time(), graph_steps);
  for (std::uint64_t i = 0; i < graph_steps; ++i) state.step(rng);
}

}  // namespace prefext
