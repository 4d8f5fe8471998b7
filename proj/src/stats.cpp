#include "prefext/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "prefext/error.hpp"

namespace prefext::stats {

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("KS needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  const double s = std::sqrt(ne);
  return kolmogorov_survival((s + 0.12 + 0.11 / s) * d);
}

ChiSquare chi2_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw DomainError("chi-square needs matching categories");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("chi-square needs non-empty samples");
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(a[i] + b[i]);
    if (t == 0.0) continue;
    ++cells;
    const double ea = t * na / (na + nb);
    const double eb = t * nb / (na + nb);
    out.statistic += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  out.df = std::max(1, cells - 1);
  out.pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.df), out.statistic));
  return out;
}

ChiSquare chi2_goodness(std::span<const std::uint64_t> counts, std::span<const double> probs) {
  if (counts.size() != probs.size()) throw DomainError("chi-square needs matching categories");
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  if (!(n > 0.0)) throw DomainError("chi-square needs a non-empty sample");
  ChiSquare out;
  int cells = 0;
  double pool_obs = 0.0, pool_exp = 0.0;
  auto flush = [&](double obs, double exp) {
    if (exp <= 0.0) return;
    out.statistic += (obs - exp) * (obs - exp) / exp;
    ++cells;
  };
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * n;
    if (e < 5.0) {
      pool_obs += static_cast<double>(counts[i]);
      pool_exp += e;
      if (pool_exp >= 5.0) {
        flush(pool_obs, pool_exp);
        pool_obs = pool_exp = 0.0;
      }
    } else {
      flush(static_cast<double>(counts[i]), e);
    }
  }
  flush(pool_obs, pool_exp);
  out.df = std::max(1, cells - 1);
  out.pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.df), out.statistic));
  return out;
}

void Running::merge(const Running& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

MeanSe Running::summary() const {
  return MeanSe{mean_, n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0, n_};
}

}  // namespace prefext::stats
