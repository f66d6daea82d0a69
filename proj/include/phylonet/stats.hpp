#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace phylonet {

/// Running mean and variance (Welford), mergeable in a fixed order.
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Self-normalized ratio sum(a)/sum(b) with a delta-method standard error.
/// In importance sampling b is the weight and a the weighted integrand.
class RatioAccumulator {
 public:
  void add(double a, double b);
  void merge(const RatioAccumulator& other);
  std::size_t count() const { return n_; }
  double value() const;
  double std_error() const;
  /// Kish effective sample size (sum b)^2 / sum b^2.
  double effective_sample_size() const;
  double mean_a() const { return ma_; }
  double mean_b() const { return mb_; }

 private:
  std::size_t n_ = 0;
  double ma_ = 0.0, mb_ = 0.0;
  double caa_ = 0.0, cbb_ = 0.0, cab_ = 0.0;
  double sum_bb_ = 0.0;
};

/// Estimate as emitted in reports.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::vector<std::string> flags;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
  bool passed(double significance = 0.01) const { return p_value >= significance; }
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value, Stephens' correction).
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Goodness of fit of category counts to probabilities. Trailing/small bins
/// are pooled until every expected count is at least `min_expected`.
TestResult chi2_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                    double min_expected = 5.0);

/// Homogeneity test of two count vectors over the same categories.
TestResult chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                           double min_expected = 5.0);

/// Wald test that self-normalized weighted category frequencies equal `probs`.
/// Categories are 0-based indices into probs; bins are pooled as in chi2_gof
/// using the effective sample size.
TestResult weighted_gof(const std::vector<int>& categories, const std::vector<double>& weights,
                        const std::vector<double>& probs, double min_expected = 5.0);

/// Wald test that two weighted samples share category frequencies (either
/// side may have unit weights). Bins are pooled by the smaller effective
/// sample size.
TestResult weighted_two_sample(const std::vector<int>& cat_a, const std::vector<double>& w_a,
                               const std::vector<int>& cat_b, const std::vector<double>& w_b,
                               double min_expected = 5.0);
/// |x - y| <= k * sqrt(sx^2 + sy^2).
bool within_combined_se(double x, double sx, double y, double sy, double k = 3.0);
/// The intervals x +- k sx and y +- k sy intersect.
bool intervals_overlap(double x, double sx, double y, double sy, double k = 3.0);

/// Tabulates nonnegative integer samples into counts 0..max.
std::vector<double> tabulate(const std::vector<int>& samples, int max_value = -1);

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace phylonet
