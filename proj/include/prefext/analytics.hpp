#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prefext/model.hpp"

namespace prefext {

/// Gamma(x+1) / (Gamma(y+1) Gamma(x-y+1)). Throws DomainError if any of the
/// three arguments is a pole (0, -1, -2, ...).
double gen_binom(double x, double y);

/// log c(n, k) with
///   c(n, k) = prod_{i<l} Gamma((z+k+i)/(l+beta) + n) / Gamma((z+i)/(l+beta) + n).
double log_c_norm(std::uint64_t n, double k, const ModelConfig& cfg);
double c_norm(std::uint64_t n, double k, const ModelConfig& cfg);

/// The same normaliser at arbitrary urn time m, extended draw by draw:
/// c_urn(m+1, k) / c_urn(m, k) = (S_m + k) / S_m and c_urn(n l, k) = c(n, k).
double log_c_urn(std::uint64_t m, double k, const ModelConfig& cfg);

struct MomentSpec {
  std::vector<double> k;
  ModelConfig cfg;
};

/// E[prod_i zeta_i^{k_i}], zeta_i = lim n^{-l/(l+beta)} D_i(n).
double mixed_moment(const MomentSpec& spec);

/// E[(zeta_1 + ... + zeta_r)^kappa].
double sum_moment(std::size_t r, double kappa, const ModelConfig& cfg);

/// binom(c + k - 1, k) with the limits k = 0 -> 1 and c = 0 -> 0 (k > 0).
double rising_binom(double c, double k);

/// prod_i binom(C_i + k_i - 1, k_i) / c_urn(m, sum k) for the first |k| colours
/// at urn time m. A martingale in m once every colour with k_i > 0 exists.
double martingale_value(std::span<const double> counts, std::span<const double> k,
                        std::uint64_t m, const ModelConfig& cfg);

}  // namespace prefext
