#include "prefext/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "prefext/analytics.hpp"
#include "prefext/error.hpp"
#include "prefext/parallel.hpp"

namespace prefext {

namespace {

constexpr std::uint64_t kChunk = 256;

ReplicationRecord replicate(const ModelConfig& cfg, const StoppingLaw& law,
                            const ReplicationOptions& opts, std::uint64_t index) {
  Stream rng = Stream::derive(opts.seed, index);
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = opts.seed;
  rec.n = sample_n(law, rng);
  if (opts.full || opts.snapshot) {
    UrnState urn(cfg, opts.max_draws);
    run_to(urn, rec.n, rng);
    rec.prefix.resize(opts.r);
    const std::size_t vertices = urn.graph_vertices();
    for (std::size_t k = 0; k < opts.r; ++k) rec.prefix[k] = k < vertices ? urn.count(k) : 0.0;
    rec.max_weight = urn.max_graph_weight();
    if (opts.snapshot) rec.snapshot = urn.graph_weights();
  } else {
    TrackedUrnState state(cfg, opts.r);
    run_to(state, rec.n, rng);
    rec.prefix = state.graph_prefix();
  }
  rec.norm1 = std::accumulate(rec.prefix.begin(), rec.prefix.end(), 0.0);
  return rec;
}

double normaliser(const ModelConfig& cfg, std::uint64_t n) {
  return std::pow(static_cast<double>(n), cfg.growth_exponent());
}

void check_checkpoints(const std::vector<std::uint64_t>& checkpoints) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1) throw DomainError("checkpoints must be >= 1");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw DomainError("checkpoints must be strictly increasing");
    }
  }
}

}  // namespace

void run_replications(const ModelConfig& cfg, const StoppingLaw& law,
                      const ReplicationOptions& opts, const RecordSink& sink) {
  cfg.validate();
  law.validate();
  if (opts.reps < 1) throw DomainError("reps must be >= 1");
  if (opts.r < 1) throw DomainError("r must be >= 1");
  const unsigned threads = resolve_threads(opts.threads);
  const std::uint64_t window = kChunk * threads;
  std::vector<ReplicationRecord> buffer;
  for (std::uint64_t start = 0; start < opts.reps; start += window) {
    const std::uint64_t count = std::min(window, opts.reps - start);
    buffer.assign(count, ReplicationRecord{});
    const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
    parallel_chunks(chunks, threads, [&](std::uint64_t c) {
      const std::uint64_t lo = c * kChunk;
      const std::uint64_t hi = std::min(count, lo + kChunk);
      for (std::uint64_t i = lo; i < hi; ++i) buffer[i] = replicate(cfg, law, opts, start + i);
    });
    for (const auto& rec : buffer) sink(rec);
  }
}

TrajectoryStat lp_trajectory(const ModelConfig& cfg, double p,
                             const std::vector<std::uint64_t>& checkpoints, Stream& rng,
                             LpKind kind, std::uint64_t max_draws) {
  if (!(p >= 1.0)) throw DomainError("p must lie in [1, inf]");
  check_checkpoints(checkpoints);
  if (!checkpoints.empty() && checked_mul(checkpoints.back(), cfg.l) > max_draws) {
    throw CapacityError("trajectory needs more urn draws than the memory cap allows");
  }
  UrnState urn(cfg, max_draws);
  TrajectoryStat out;
  out.checkpoints = checkpoints;
  std::uint64_t n = 0;
  for (std::uint64_t cp : checkpoints) {
    run_to(urn, cp - n, rng);
    n = cp;
    const double scale = normaliser(cfg, n);
    const std::size_t vertices = urn.graph_vertices();
    double value = 0.0;
    if (std::isinf(p)) {
      value = urn.max_graph_weight() / scale;
    } else {
      for (std::size_t k = 0; k < vertices; ++k) value += std::pow(urn.count(k) / scale, p);
      if (kind == LpKind::Norm) value = std::pow(value, 1.0 / p);
    }
    out.values.push_back(value);
  }
  return out;
}

TrajectoryStat martingale_trajectory(const ModelConfig& cfg, const std::vector<double>& k,
                                     const std::vector<std::uint64_t>& checkpoints, Stream& rng) {
  cfg.require_positive_beta();
  check_checkpoints(checkpoints);
  if (k.empty()) throw DomainError("k must have at least one entry");
  TrackedUrnState state(cfg, k.size());
  TrajectoryStat out;
  out.checkpoints = checkpoints;
  std::uint64_t n = 0;
  for (std::uint64_t cp : checkpoints) {
    run_to(state, cp - n, rng);
    n = cp;
    const auto d = state.graph_prefix();
    out.values.push_back(martingale_value(d, k, state.time(), cfg));
  }
  return out;
}

stats::MeanSe moment_mc(const ModelConfig& cfg, const std::vector<double>& k, std::uint64_t n,
                        std::uint64_t reps, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  if (k.empty()) throw DomainError("k must have at least one entry");
  if (reps < 1 || n < 1) throw DomainError("moment_mc needs n >= 1 and reps >= 1");
  const double total_k = std::accumulate(k.begin(), k.end(), 0.0);
  const double log_scale = total_k * cfg.growth_exponent() * std::log(static_cast<double>(n));
  const std::uint64_t chunk = 1024;
  const std::uint64_t chunks = (reps + chunk - 1) / chunk;
  std::vector<stats::Running> parts(chunks);
  parallel_chunks(chunks, resolve_threads(threads), [&](std::uint64_t c) {
    for (std::uint64_t i = c * chunk; i < std::min(reps, (c + 1) * chunk); ++i) {
      Stream rng = Stream::derive(seed, i);
      TrackedUrnState state(cfg, k.size());
      run_to(state, n, rng);
      const auto d = state.graph_prefix();
      double log_v = -log_scale;
      bool zero = false;
      for (std::size_t j = 0; j < k.size(); ++j) {
        if (k[j] == 0.0) continue;
        if (d[j] <= 0.0) {
          zero = true;
          break;
        }
        log_v += k[j] * std::log(d[j]);
      }
      parts[c].add(zero ? 0.0 : std::exp(log_v));
    }
  });
  stats::Running all;
  for (const auto& p : parts) all.merge(p);
  return all.summary();
}

std::size_t default_hill_k(std::size_t n) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.6) + 1e-9));
}

HillResult hill_estimate(std::vector<double> sample, std::size_t k) {
  const std::size_t n = sample.size();
  if (n < 2) throw DomainError("Hill estimator needs at least two observations");
  if (k < 1 || k >= n) throw DomainError("Hill estimator needs 1 <= k < sample size");
  for (double v : sample) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Hill estimator needs positive finite data");
  }
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), sample.end(),
                   std::greater<double>());
  const double threshold = std::log(sample[k]);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(sample[i]) - threshold;
  HillResult res;
  res.k = k;
  res.gamma = sum / static_cast<double>(k);
  res.alpha = res.gamma > 0.0 ? 1.0 / res.gamma : kInfinity;
  return res;
}

HillResult hill_estimate(std::vector<double> sample) {
  const std::size_t k = default_hill_k(sample.size());
  return hill_estimate(std::move(sample), k);
}

std::vector<std::pair<std::size_t, double>> zipf_ranks(const std::vector<double>& degrees) {
  std::vector<double> sorted = degrees;
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<double>());
  std::vector<std::pair<std::size_t, double>> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out[i] = {i + 1, sorted[i]};
  return out;
}

std::vector<double> in_degrees_from_edgelist(std::istream& in) {
  std::map<long long, std::uint64_t> tally;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    }
    std::vector<long long> fields;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      long long v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ')) {
        throw ParseError(line_no, "expected integer node ids in '" + line + "'");
      }
      fields.push_back(v);
      p = next;
    }
    if (fields.empty()) continue;
    if (fields.size() != 2) throw ParseError(line_no, "expected two columns 'source target'");
    ++tally[fields[1]];
  }
  std::vector<double> out;
  out.reserve(tally.size());
  for (const auto& [node, deg] : tally) out.push_back(static_cast<double>(deg));
  return out;
}

std::vector<std::pair<std::size_t, double>> zipf_from_edgelist(std::istream& in) {
  return zipf_ranks(in_degrees_from_edgelist(in));
}

std::vector<std::pair<std::size_t, double>> zipf_from_edgelist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return zipf_from_edgelist(in);
}

std::vector<double> empirical_degree_pmf(const ModelConfig& cfg, std::uint64_t n, Stream& rng) {
  UrnState urn(cfg);
  run_to(urn, n, rng);
  const auto w = urn.graph_weights();
  std::vector<double> pmf;
  for (double d : w) {
    const double in_degree = d - cfg.beta;
    const double rounded = std::round(in_degree);
    if (std::fabs(in_degree - rounded) > 1e-9 || rounded < 0.0) {
      throw InvalidState("in-degrees are not integers; initial weights must be integer + beta");
    }
    const auto idx = static_cast<std::size_t>(rounded);
    if (idx >= pmf.size()) pmf.resize(idx + 1, 0.0);
    pmf[idx] += 1.0;
  }
  for (double& v : pmf) v /= static_cast<double>(w.size());
  return pmf;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs two or more points");
  const double nx = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nx;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nx;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_line needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace prefext
