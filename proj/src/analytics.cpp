#include "prefext/analytics.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "prefext/error.hpp"

namespace prefext {

namespace {

bool is_pole(double v) { return v <= 0.0 && v == std::floor(v); }

// Neumaier-compensated sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log Gamma(a + d) / Gamma(a) for a > 0, a + d > 0.
double log_gamma_shift(double a, double d) {
  if (d == 0.0) return 0.0;
  const double r = boost::math::tgamma_delta_ratio(a, d);
  if (r > 0.0 && std::isfinite(r)) return -std::log(r);
  return boost::math::lgamma(a + d) - boost::math::lgamma(a);
}

void check_k(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("moment exponents must be finite and >= 0");
}

}  // namespace

double gen_binom(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("gen_binom needs finite arguments");
  if (is_pole(x + 1.0) || is_pole(y + 1.0) || is_pole(x - y + 1.0)) {
    throw DomainError("gen_binom: Gamma pole at x=" + std::to_string(x) + ", y=" + std::to_string(y));
  }
  if (y == 0.0) return 1.0;
  if (y > 0.0 && y <= 64.0 && y == std::floor(y)) {
    double v = 1.0;
    for (int j = 1; j <= static_cast<int>(y); ++j) v *= (x - j + 1.0) / j;
    return v;
  }
  if (x - y + 1.0 > 0.0 && y + 1.0 > 0.0) {
    const double log_ratio = log_gamma_shift(x - y + 1.0, y);  // log Gamma(x+1)/Gamma(x-y+1)
    return std::exp(log_ratio - boost::math::lgamma(y + 1.0));
  }
  int s1 = 0, s2 = 0, s3 = 0;
  const double l1 = boost::math::lgamma(x + 1.0, &s1);
  const double l2 = boost::math::lgamma(y + 1.0, &s2);
  const double l3 = boost::math::lgamma(x - y + 1.0, &s3);
  return s1 * s2 * s3 * std::exp(l1 - l2 - l3);
}

double log_c_urn(std::uint64_t m, double k, const ModelConfig& cfg) {
  cfg.require_positive_beta();
  check_k(k);
  if (k == 0.0) return 0.0;
  const double lb = static_cast<double>(cfg.l) + cfg.beta;
  const double z = cfg.initial_mass();
  const double d = k / lb;
  Accumulator acc;
  for (std::uint32_t i = 0; i < cfg.l; ++i) {
    // number of draws j < m with j = i mod l
    const std::uint64_t n_i = m > i ? (m - i + cfg.l - 1) / cfg.l : 0;
    acc.add(log_gamma_shift((z + i) / lb + static_cast<double>(n_i), d));
  }
  return acc.value();
}

double log_c_norm(std::uint64_t n, double k, const ModelConfig& cfg) {
  return log_c_urn(checked_mul(n, cfg.l), k, cfg);
}

double c_norm(std::uint64_t n, double k, const ModelConfig& cfg) {
  return std::exp(log_c_norm(n, k, cfg));
}

double rising_binom(double c, double k) {
  check_k(k);
  if (k == 0.0) return 1.0;
  if (c == 0.0) return 0.0;
  return gen_binom(c + k - 1.0, k);
}

double mixed_moment(const MomentSpec& spec) {
  const ModelConfig& cfg = spec.cfg;
  cfg.validate();
  cfg.require_positive_beta();
  if (spec.k.empty()) throw DomainError("mixed_moment needs r >= 1");
  const auto initial = cfg.initial_urn();
  const std::size_t s = initial.size();

  double log_value = 0.0;
  double sign = 1.0;
  double k_before = 0.0;
  for (std::size_t idx = 0; idx < spec.k.size(); ++idx) {
    const double k = spec.k[idx];
    check_k(k);
    if (k == 0.0) continue;
    const std::size_t i = idx + 1;
    const std::uint64_t n0 = i > s ? i - s : 0;
    const double c0 = i <= s ? initial[idx] : cfg.beta;
    const double b = rising_binom(c0, k);
    if (b == 0.0) return 0.0;
    if (b < 0.0) sign = -sign;
    const double k_after = k_before + k;
    log_value += boost::math::lgamma(k + 1.0) + log_c_norm(n0, k_before, cfg) -
                 log_c_norm(n0, k_after, cfg) + std::log(std::fabs(b));
    k_before = k_after;
  }
  return sign * std::exp(log_value);
}

double sum_moment(std::size_t r, double kappa, const ModelConfig& cfg) {
  cfg.validate();
  cfg.require_positive_beta();
  check_k(kappa);
  if (r < 1) throw DomainError("sum_moment needs r >= 1");
  if (kappa == 0.0) return 1.0;
  const auto initial = cfg.initial_urn();
  const std::size_t s = initial.size();
  const double lb = static_cast<double>(cfg.l) + cfg.beta;
  std::uint64_t n0 = 0;
  double u = 0.0;
  if (r >= s) {
    n0 = r - s;
    u = cfg.initial_mass() + lb * static_cast<double>(n0);
  } else {
    u = std::accumulate(initial.begin(), initial.begin() + static_cast<std::ptrdiff_t>(r), 0.0);
  }
  const double b = rising_binom(u, kappa);
  if (b == 0.0) return 0.0;
  return std::exp(boost::math::lgamma(kappa + 1.0) + std::log(b) - log_c_norm(n0, kappa, cfg));
}

double martingale_value(std::span<const double> counts, std::span<const double> k,
                        std::uint64_t m, const ModelConfig& cfg) {
  if (counts.size() < k.size()) throw InvalidState("martingale_value: fewer counts than exponents");
  double log_value = 0.0;
  double sign = 1.0;
  double total_k = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double b = rising_binom(counts[i], k[i]);
    if (b == 0.0) return 0.0;
    if (b < 0.0) sign = -sign;
    log_value += std::log(std::fabs(b));
    total_k += k[i];
  }
  return sign * std::exp(log_value - log_c_urn(m, total_k, cfg));
}

}  // namespace prefext
