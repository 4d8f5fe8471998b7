#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefext/model.hpp"
#include "prefext/stopping.hpp"

namespace prefext {

/// Settings shared by every command. Keys: l, beta, loop_mode ("model0" |
/// "model1"), initial_weights, alpha, stopping_kind ("floored_pareto"), seed,
/// threads.
struct RunConfig {
  std::uint32_t l = 1;
  double beta = 1.0;
  LoopMode loop_mode = LoopMode::Model1;
  /// Unset: one vertex with l self-loops, D_1(0) = l + beta.
  std::optional<std::vector<double>> initial_weights;
  StoppingLaw stopping;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// Validated model; throws ConfigError naming the key.
  ModelConfig model() const;
  void validate() const;
};

/// Merge a TOML or JSON document into `cfg`. Unknown keys are errors.
void apply_toml(RunConfig& cfg, const std::string& text, const std::string& origin = "<toml>");
void apply_json(RunConfig& cfg, const std::string& text, const std::string& origin = "<json>");
/// Dispatches on the extension (.json, else TOML).
void apply_config_file(RunConfig& cfg, const std::string& path);

LoopMode parse_loop_mode(const std::string& text);
std::string to_string(LoopMode mode);
std::vector<double> parse_number_list(const std::string& text, const std::string& key);

/// Compact JSON object of every setting.
std::string echo_json(const RunConfig& cfg);

}  // namespace prefext
