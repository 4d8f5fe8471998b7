#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "prefext/model.hpp"
#include "prefext/stats.hpp"
#include "prefext/stopping.hpp"

namespace prefext {

struct ReplicationRecord {
  std::uint64_t index = 0;  // stream = Stream::derive(seed, index)
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  /// D_1(N), ..., D_r(N), zero for vertices that do not exist yet.
  std::vector<double> prefix;
  double norm1 = 0.0;
  /// max_k D_k(N); NaN unless the full graph was simulated.
  double max_weight = std::numeric_limits<double>::quiet_NaN();
  /// All weights D_1(N), ..., D_{N(N)}(N) when snapshots were requested.
  std::vector<double> snapshot;
};

struct ReplicationOptions {
  std::size_t r = 4;
  std::uint64_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Simulate the whole urn (needed for max weight and snapshots).
  bool full = false;
  bool snapshot = false;
  std::uint64_t max_draws = UrnState::kDefaultMaxDraws;
};

using RecordSink = std::function<void(const ReplicationRecord&)>;

/// Records reach the sink in index order, independent of the thread count.
/// At most a fixed window of records is held in memory at any time.
void run_replications(const ModelConfig& cfg, const StoppingLaw& law,
                      const ReplicationOptions& opts, const RecordSink& sink);

struct TrajectoryStat {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> values;
};

enum class LpKind { Norm, PowerSum };

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// |D(n) / n^{l/(l+beta)}|_p (or its p-th power) at graph-time checkpoints.
/// p = kInfinity gives the normalised maximum weight.
TrajectoryStat lp_trajectory(const ModelConfig& cfg, double p,
                             const std::vector<std::uint64_t>& checkpoints, Stream& rng,
                             LpKind kind = LpKind::Norm,
                             std::uint64_t max_draws = UrnState::kDefaultMaxDraws);

/// prod_i binom(D_i(n) + k_i - 1, k_i) / c(n, sum k) at graph-time checkpoints.
TrajectoryStat martingale_trajectory(const ModelConfig& cfg, const std::vector<double>& k,
                                     const std::vector<std::uint64_t>& checkpoints, Stream& rng);

/// Mean and SE over `reps` of n^{-K l/(l+beta)} prod_i D_i(n)^{k_i}, K = sum k.
stats::MeanSe moment_mc(const ModelConfig& cfg, const std::vector<double>& k, std::uint64_t n,
                        std::uint64_t reps, std::uint64_t seed, unsigned threads = 1);

struct HillResult {
  /// Extreme-value index: mean of the k largest log values minus log X_(k+1).
  double gamma = 0.0;
  /// Tail index 1/gamma (+inf for a constant sample).
  double alpha = 0.0;
  std::size_t k = 0;
};

std::size_t default_hill_k(std::size_t n);
HillResult hill_estimate(std::vector<double> sample, std::size_t k);
HillResult hill_estimate(std::vector<double> sample);

/// (rank, value) with values sorted descending; ties keep their input order.
std::vector<std::pair<std::size_t, double>> zipf_ranks(const std::vector<double>& degrees);

/// In-degree of every node that appears as a target, ordered by node id.
std::vector<double> in_degrees_from_edgelist(std::istream& in);
std::vector<std::pair<std::size_t, double>> zipf_from_edgelist(std::istream& in);
std::vector<std::pair<std::size_t, double>> zipf_from_edgelist(const std::string& path);

/// Fraction of vertices with in-degree d, d = 0, 1, ..., at graph time n.
std::vector<double> empirical_degree_pmf(const ModelConfig& cfg, std::uint64_t n, Stream& rng);

/// Least-squares slope and R^2 of y on x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace prefext
