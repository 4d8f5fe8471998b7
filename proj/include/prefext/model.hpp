#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prefext/rng.hpp"

namespace prefext {

/// Model 0: the new vertex is added after its l edges attach (no loops).
/// Model 1: the new vertex is added first with weight beta and may receive
/// its own edges (loops).
enum class LoopMode { Model0, Model1 };

/// Parameters of the linear preferential attachment dynamics
/// D_k(n) = in-degree_k(n) + beta, shared by the graph and urn views.
struct ModelConfig {
  std::uint32_t l = 1;
  double beta = 1.0;
  LoopMode loop_mode = LoopMode::Model1;
  /// D_k(0) for the N(0) initial vertices.
  std::vector<double> initial_weights{2.0};

  /// One initial vertex carrying l self-loops, i.e. D_1(0) = l + beta.
  static ModelConfig standard(std::uint32_t l, double beta, LoopMode mode = LoopMode::Model1);

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Closed-form quantities need beta > 0; throws DomainError otherwise.
  void require_positive_beta() const;

  std::size_t initial_vertices() const noexcept { return initial_weights.size(); }
  /// j in {0, 1}.
  std::size_t loop_shift() const noexcept { return loop_mode == LoopMode::Model1 ? 1 : 0; }
  /// s = N(0) + j.
  std::size_t initial_colours() const noexcept { return initial_vertices() + loop_shift(); }
  /// z = sum D_k(0) + j * beta.
  double initial_mass() const noexcept;
  /// C_1(0), ..., C_s(0).
  std::vector<double> initial_urn() const;
  /// S_m = z + m + beta * floor(m / l), the deterministic urn total after m draws.
  double total_mass(std::uint64_t m) const noexcept;
  /// l / (l + beta), the growth exponent of the oldest weights.
  double growth_exponent() const noexcept { return l / (l + beta); }
};

/// Urn with immigration: every `period` draws, `mass` balls of a fresh colour
/// join the urn. period == 0 disables immigration (classical Polya urn).
struct Immigration {
  std::uint32_t period = 0;
  double mass = 0.0;
};

namespace detail {

/// Mass layout shared by the full urn and the graph sampler: every colour has
/// a base mass (its initial count, or the immigrant mass) plus unit hits.
/// One uniform picks a colour exactly, for arbitrary real base masses:
/// [ unit hits | initial bases | immigrant bases ].
class MassSampler {
 public:
  MassSampler(std::vector<double> initial_bases, double immigrant_mass);

  std::size_t size() const noexcept { return hits_.size(); }
  double base(std::size_t k) const noexcept {
    return k < initial_.size() ? initial_[k] : immigrant_mass_;
  }
  double mass(std::size_t k) const noexcept { return base(k) + hits_[k]; }
  std::uint64_t hits(std::size_t k) const noexcept { return hits_[k]; }
  std::uint64_t total_hits() const noexcept { return draws_.size(); }
  double total() const noexcept {
    return initial_total_ + immigrant_mass_ * static_cast<double>(immigrants()) +
           static_cast<double>(draws_.size());
  }

  /// Picks a colour with probability mass / total.
  std::size_t pick(Stream& rng) const;
  void add_hit(std::size_t k);
  void add_colour() { hits_.push_back(0); }
  void reserve(std::size_t draws, std::size_t colours);

 private:
  std::size_t immigrants() const noexcept { return hits_.size() - initial_.size(); }

  std::vector<double> initial_;
  std::vector<double> initial_cumulative_;
  double initial_total_ = 0.0;
  double immigrant_mass_ = 0.0;
  std::vector<std::uint32_t> hits_;
  std::vector<std::uint32_t> draws_;
};

}  // namespace detail

/// Full urn state: every colour's ball mass C_k(m).
class UrnState {
 public:
  /// Default cap on stored draws (~2 GB of bookkeeping).
  static constexpr std::uint64_t kDefaultMaxDraws = 250'000'000;

  explicit UrnState(const ModelConfig& cfg, std::uint64_t max_draws = kDefaultMaxDraws);
  /// Classical Polya urn without immigration.
  static UrnState classical(std::vector<double> masses,
                            std::uint64_t max_draws = kDefaultMaxDraws);

  std::uint64_t time() const noexcept { return m_; }
  std::size_t colours() const noexcept { return sampler_.size(); }
  std::size_t initial_colours() const noexcept { return s_; }
  const Immigration& immigration() const noexcept { return immigration_; }
  /// C_k(m) for 0-based colour k; zero for colours that have not arrived.
  double count(std::size_t k) const noexcept {
    return k < sampler_.size() ? sampler_.mass(k) : 0.0;
  }
  std::vector<double> counts() const;
  /// S_m from the closed form.
  double total() const noexcept;
  /// C_k(m) / S_m for every present colour.
  std::vector<double> draw_distribution() const;

  /// One draw plus immigration when the new time is a multiple of the period.
  /// Returns the drawn colour.
  std::size_t step(Stream& rng);
  void advance(std::uint64_t draws, Stream& rng);

  /// Graph weights D_1(n), ..., D_{N(n)}(n) at graph time n = m / l; only
  /// meaningful at multiples of the period.
  std::vector<double> graph_weights() const;
  std::size_t graph_vertices() const noexcept;
  double max_graph_weight() const noexcept;

 private:
  UrnState(std::vector<double> masses, Immigration imm, std::size_t loop_shift,
           std::uint64_t max_draws);

  detail::MassSampler sampler_;
  Immigration immigration_;
  std::size_t s_ = 0;
  std::size_t loop_shift_ = 0;
  double z_ = 0.0;
  std::uint64_t m_ = 0;
  std::uint64_t max_draws_;

  friend class TrackedUrnState;
};

/// The first r colours tracked individually, all later colours pooled into a
/// single tail mass. Same transition law for the prefix as the full urn.
class TrackedUrnState {
 public:
  TrackedUrnState(const ModelConfig& cfg, std::size_t r);
  /// Collapse a full urn: prefix copied, tail = S_m - prefix sum.
  static TrackedUrnState collapse(const UrnState& state, std::size_t r);

  std::size_t r() const noexcept { return tracked_.size(); }
  std::uint64_t time() const noexcept { return m_; }
  std::span<const double> tracked() const noexcept { return tracked_; }
  double tail_mass() const noexcept { return tail_; }
  double total() const noexcept { return total_at(m_); }
  /// Number of colours that exist at the current time.
  std::uint64_t colours_present() const noexcept;
  /// C_1/S, ..., C_r/S, tail/S.
  std::vector<double> draw_distribution() const;

  /// One draw against the cumulative prefix array; returns the tracked index
  /// drawn, or r() for the tail.
  std::size_t step(Stream& rng);

  /// Advances `draws` urn draws. Exact in law: once every tracked colour is
  /// present, prefix hits are found by Bernoulli thinning against S_m and
  /// split over the prefix by a Dirichlet-multinomial draw (given its hit
  /// count the prefix is a classical Polya urn). Cost ~ number of prefix hits.
  void advance(std::uint64_t draws, Stream& rng);

  /// D_1(n), ..., D_r(n) at graph time n = m / l with zeros for vertices that
  /// do not exist yet (Model 1 pre-adds one colour).
  std::vector<double> graph_prefix() const;
  std::uint32_t immigration_period() const noexcept { return immigration_.period; }

 private:
  TrackedUrnState(std::vector<double> initial, std::size_t r, Immigration imm,
                  std::size_t loop_shift);

  double total_at(std::uint64_t m) const noexcept;
  bool all_tracked_present() const noexcept;
  void immigrate_after_draw();
  void split_prefix_hits(std::uint64_t hits, Stream& rng);

  std::vector<double> tracked_;
  double tail_ = 0.0;
  std::uint64_t m_ = 0;
  Immigration immigration_;
  std::size_t s_ = 0;
  std::size_t loop_shift_ = 0;
  double z_ = 0.0;
};

struct Edge {
  std::uint64_t source;  // 1-based vertex labels
  std::uint64_t target;
};

/// The preferential attachment graph itself, grown vertex by vertex with the
/// l edges of a step attached sequentially.
class GraphState {
 public:
  explicit GraphState(const ModelConfig& cfg, bool keep_edges = false);

  std::uint64_t time() const noexcept { return n_; }
  std::size_t vertices() const noexcept { return cfg_.initial_vertices() + n_; }
  /// D_k(n) for 0-based vertex k; zero for vertices that do not exist yet.
  double weight(std::size_t k) const noexcept;
  std::vector<double> weights() const;
  /// D_k(n) - beta.
  std::vector<double> in_degrees() const;
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const ModelConfig& config() const noexcept { return cfg_; }

  /// Attachment probabilities for the next edge of the current step, given
  /// the targets (0-based) of its earlier edges. Evaluates the Model 0 / 1
  /// formula directly:
  ///   (D_k(n) + #{j < i : K_j = k}) / ((i - 1) + sum_k D_k(n)),
  /// with the new vertex (weight beta) among the candidates in Model 1.
  std::vector<double> edge_target_distribution(std::span<const std::size_t> earlier) const;

  /// Adds one vertex and its l edges.
  void step(Stream& rng);

 private:
  ModelConfig cfg_;
  detail::MassSampler sampler_;
  std::uint64_t n_ = 0;
  bool keep_edges_;
  std::vector<Edge> edges_;
};

/// The attachment formula on a bare weight vector (D_1(n), ..., D_N(n)).
std::vector<double> attachment_probabilities(const ModelConfig& cfg,
                                             std::span<const double> weights,
                                             std::span<const std::size_t> earlier);

/// Advance by n graph steps (n * l urn draws). Throws CapacityError when the
/// time counter would overflow.
void run_to(UrnState& state, std::uint64_t graph_steps, Stream& rng);
void run_to(TrackedUrnState& state, std::uint64_t graph_steps, Stream& rng);
void run_to(GraphState& state, std::uint64_t graph_steps, Stream& rng);

/// Overflow-checked a * b and a + b for time counters.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);

}  // namespace prefext
