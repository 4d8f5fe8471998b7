#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace prefext::stats {

/// sup |F_n - F| of a sample against a continuous cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// sup |F_n - G_m| of two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// P(K > x) for the Kolmogorov distribution (asymptotic, x = sqrt(n) D).
double kolmogorov_survival(double x);
/// Asymptotic p-values, with the usual effective-sample-size correction.
double ks_pvalue(double d, std::size_t n);
double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m);

struct ChiSquare {
  double statistic = 0.0;
  double df = 0.0;
  double pvalue = 1.0;
};
/// Homogeneity test of two count vectors over the same categories. Categories
/// empty in both samples are dropped.
ChiSquare chi2_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
/// Goodness of fit of counts against probabilities; cells with expected < 5 are pooled.
ChiSquare chi2_goodness(std::span<const std::uint64_t> counts, std::span<const double> probs);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

/// Welford accumulator.
class Running {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const Running& o);
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  MeanSe summary() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace prefext::stats
