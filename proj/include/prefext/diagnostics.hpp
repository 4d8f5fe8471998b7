#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prefext/model.hpp"

namespace prefext {

using WeightLaw = std::map<std::vector<double>, double>;

/// Exact law of (D_1(n+1), ..., D_{N+1}(n+1)) given the weights at time n,
/// enumerating all l-tuples of edge targets through the attachment formula.
WeightLaw graph_step_law(const ModelConfig& cfg, std::span<const double> weights);

/// Exact law of the first N+1 colours after l urn draws (plus immigration)
/// from the urn that corresponds to the same weights.
WeightLaw urn_block_law(const ModelConfig& cfg, std::span<const double> weights);

/// E[M_{m+1} | counts at time m] for the martingale of analytics.hpp, by
/// enumerating the next draw.
double martingale_one_step(std::span<const double> counts, std::span<const double> k,
                           std::uint64_t m, const ModelConfig& cfg);

struct DiagnosticResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Desk-scale property checks; `scale` multiplies replication counts.
std::vector<DiagnosticResult> run_diagnostics(std::uint64_t seed, double scale = 1.0,
                                              unsigned threads = 1);

std::vector<std::string> diagnostic_names();

}  // namespace prefext
