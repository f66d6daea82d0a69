#include "phylonet/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phylonet {

void MeanAccumulator::add(double x) {
  ++n_;
  double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void MeanAccumulator::merge(const MeanAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  double n = static_cast<double>(n_), m = static_cast<double>(o.n_);
  double d = o.mean_ - mean_;
  mean_ += d * m / (n + m);
  m2_ += o.m2_ + d * d * n * m / (n + m);
  n_ += o.n_;
}

double MeanAccumulator::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double MeanAccumulator::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

void RatioAccumulator::add(double a, double b) {
  ++n_;
  double n = static_cast<double>(n_);
  double da = a - ma_, db = b - mb_;
  ma_ += da / n;
  mb_ += db / n;
  caa_ += da * (a - ma_);
  cbb_ += db * (b - mb_);
  cab_ += da * (b - mb_);
  sum_bb_ += b * b;
}

void RatioAccumulator::merge(const RatioAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  double n = static_cast<double>(n_), m = static_cast<double>(o.n_);
  double f = n * m / (n + m);
  double da = o.ma_ - ma_, db = o.mb_ - mb_;
  caa_ += o.caa_ + da * da * f;
  cbb_ += o.cbb_ + db * db * f;
  cab_ += o.cab_ + da * db * f;
  ma_ += da * m / (n + m);
  mb_ += db * m / (n + m);
  sum_bb_ += o.sum_bb_;
  n_ += o.n_;
}

double RatioAccumulator::value() const { return mb_ != 0.0 ? ma_ / mb_ : 0.0; }

double RatioAccumulator::std_error() const {
  if (n_ < 2 || mb_ == 0.0) return 0.0;
  double n = static_cast<double>(n_);
  double r = value();
  double var = (caa_ - 2.0 * r * cab_ + r * r * cbb_) / (n - 1.0);
  return std::sqrt(std::max(var, 0.0) / n) / std::abs(mb_);
}

double RatioAccumulator::effective_sample_size() const {
  if (sum_bb_ == 0.0) return 0.0;
  double sb = mb_ * static_cast<double>(n_);
  return sb * sb / sum_bb_;
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi2_sf(double x, int dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(x, 0.0)));
}

// Groups consecutive categories so that each group reaches min_expected
// according to `expected`; a short final group is folded into its predecessor.
std::vector<std::size_t> pool_bins(const std::vector<double>& expected, double min_expected) {
  std::vector<std::size_t> group(expected.size());
  std::size_t g = 0;
  double acc = 0.0;
  std::vector<double> totals;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    group[i] = g;
    acc += expected[i];
    if (acc >= min_expected) {
      totals.push_back(acc);
      acc = 0.0;
      ++g;
    }
  }
  if (acc > 0.0 || totals.empty()) {
    if (!totals.empty()) {
      for (auto& x : group)
        if (x == g) x = g - 1;
    } else {
      totals.push_back(acc);
    }
  }
  return group;
}

}  // namespace

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double ne = na * nb / (na + nb);
  double sq = std::sqrt(ne);
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

TestResult chi2_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                    double min_expected) {
  std::size_t k = std::max(observed.size(), probs.size());
  double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<double> obs(k, 0.0), expct(k, 0.0);
  for (std::size_t i = 0; i < observed.size(); ++i) obs[i] = observed[i];
  double psum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    expct[i] = probs[i] * total;
    psum += probs[i];
  }
  // Whatever probability mass lies outside the listed categories joins the last one.
  if (psum < 1.0 && k > 0) expct[k - 1] += (1.0 - psum) * total;
  auto group = pool_bins(expct, min_expected);
  std::size_t g = group.empty() ? 0 : group.back() + 1;
  std::vector<double> go(g, 0.0), ge(g, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    go[group[i]] += obs[i];
    ge[group[i]] += expct[i];
  }
  TestResult r;
  for (std::size_t i = 0; i < g; ++i)
    if (ge[i] > 0.0) r.statistic += (go[i] - ge[i]) * (go[i] - ge[i]) / ge[i];
  r.dof = static_cast<int>(g) - 1;
  r.p_value = chi2_sf(r.statistic, r.dof);
  return r;
}

TestResult chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                           double min_expected) {
  std::size_t k = std::max(a.size(), b.size());
  std::vector<double> ca(k, 0.0), cb(k, 0.0);
  std::copy(a.begin(), a.end(), ca.begin());
  std::copy(b.begin(), b.end(), cb.begin());
  double na = std::accumulate(ca.begin(), ca.end(), 0.0);
  double nb = std::accumulate(cb.begin(), cb.end(), 0.0);
  double n = na + nb;
  // Pool so that the smaller row's expected count reaches the threshold.
  std::vector<double> smaller(k);
  for (std::size_t i = 0; i < k; ++i) smaller[i] = (ca[i] + cb[i]) * std::min(na, nb) / n;
  auto group = pool_bins(smaller, min_expected);
  std::size_t g = group.empty() ? 0 : group.back() + 1;
  std::vector<double> ga(g, 0.0), gb(g, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    ga[group[i]] += ca[i];
    gb[group[i]] += cb[i];
  }
  TestResult r;
  for (std::size_t i = 0; i < g; ++i) {
    double col = ga[i] + gb[i];
    if (col <= 0.0) continue;
    double ea = col * na / n, eb = col * nb / n;
    r.statistic += (ga[i] - ea) * (ga[i] - ea) / ea + (gb[i] - eb) * (gb[i] - eb) / eb;
  }
  r.dof = static_cast<int>(g) - 1;
  r.p_value = chi2_sf(r.statistic, r.dof);
  return r;
}

TestResult weighted_gof(const std::vector<int>& categories, const std::vector<double>& weights,
                        const std::vector<double>& probs, double min_expected) {
  if (categories.size() != weights.size() || categories.empty())
    throw std::invalid_argument("weighted_gof: size mismatch");
  double sw = 0.0, sww = 0.0;
  for (double w : weights) {
    sw += w;
    sww += w * w;
  }
  double ess = sw * sw / sww;
  std::size_t k = probs.size();
  for (int c : categories)
    if (c < 0) throw std::invalid_argument("weighted_gof: negative category");
  for (int c : categories) k = std::max(k, static_cast<std::size_t>(c) + 1);
  std::vector<double> p(k, 0.0);
  std::copy(probs.begin(), probs.end(), p.begin());
  double psum = std::accumulate(p.begin(), p.end(), 0.0);
  if (psum < 1.0) p[k - 1] += 1.0 - psum;
  std::vector<double> expct(k);
  for (std::size_t i = 0; i < k; ++i) expct[i] = p[i] * ess;
  auto group = pool_bins(expct, min_expected);
  std::size_t g = group.back() + 1;
  TestResult r;
  r.dof = static_cast<int>(g) - 1;
  if (g < 2) return r;
  std::vector<double> gp(g, 0.0);
  for (std::size_t i = 0; i < k; ++i) gp[group[i]] += p[i];
  // Linearized estimator: phat - p = sum_i w_i (e_{c_i} - p) / sum_i w_i.
  std::size_t d = g - 1;
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < categories.size(); ++i) {
    std::size_t c = group[static_cast<std::size_t>(categories[i])];
    for (std::size_t j = 0; j < d; ++j)
      y[static_cast<Eigen::Index>(j)] = (c == j ? 1.0 : 0.0) - gp[j];
    double w = weights[i] / sw;
    diff += w * y;
    cov += (w * w) * (y * y.transpose());
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  r.statistic = diff.dot(ldlt.solve(diff));
  r.p_value = chi2_sf(r.statistic, r.dof);
  return r;
}

TestResult weighted_two_sample(const std::vector<int>& cat_a, const std::vector<double>& w_a,
                               const std::vector<int>& cat_b, const std::vector<double>& w_b,
                               double min_expected) {
  if (cat_a.size() != w_a.size() || cat_b.size() != w_b.size() || cat_a.empty() || cat_b.empty())
    throw std::invalid_argument("weighted_two_sample: size mismatch");
  std::size_t k = 0;
  for (int c : cat_a) k = std::max(k, static_cast<std::size_t>(c) + 1);
  for (int c : cat_b) k = std::max(k, static_cast<std::size_t>(c) + 1);
  struct Side {
    std::vector<double> p;
    double sw = 0.0, ess = 0.0;
  };
  auto side = [k](const std::vector<int>& cat, const std::vector<double>& w) {
    Side s;
    s.p.assign(k, 0.0);
    double sww = 0.0;
    for (std::size_t i = 0; i < cat.size(); ++i) {
      if (cat[i] < 0) throw std::invalid_argument("weighted_two_sample: negative category");
      s.p[static_cast<std::size_t>(cat[i])] += w[i];
      s.sw += w[i];
      sww += w[i] * w[i];
    }
    for (double& x : s.p) x /= s.sw;
    s.ess = s.sw * s.sw / sww;
    return s;
  };
  Side a = side(cat_a, w_a), b = side(cat_b, w_b);
  std::vector<double> expct(k);
  double m = std::min(a.ess, b.ess);
  for (std::size_t i = 0; i < k; ++i)
    expct[i] = m * (a.ess * a.p[i] + b.ess * b.p[i]) / (a.ess + b.ess);
  auto group = pool_bins(expct, min_expected);
  std::size_t g = group.back() + 1;
  TestResult r;
  r.dof = static_cast<int>(g) - 1;
  if (g < 2) return r;
  const std::size_t d = g - 1;
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  auto accumulate = [&](const std::vector<int>& cat, const std::vector<double>& w, const Side& s,
                        double sign) {
    std::vector<double> gp(g, 0.0);
    for (std::size_t i = 0; i < k; ++i) gp[group[i]] += s.p[i];
    Eigen::VectorXd y(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < cat.size(); ++i) {
      std::size_t c = group[static_cast<std::size_t>(cat[i])];
      for (std::size_t j = 0; j < d; ++j)
        y[static_cast<Eigen::Index>(j)] = (c == j ? 1.0 : 0.0) - gp[j];
      double wi = w[i] / s.sw;
      cov += (wi * wi) * (y * y.transpose());
    }
    for (std::size_t j = 0; j < d; ++j) diff[static_cast<Eigen::Index>(j)] += sign * gp[j];
  };
  accumulate(cat_a, w_a, a, 1.0);
  accumulate(cat_b, w_b, b, -1.0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  r.statistic = diff.dot(ldlt.solve(diff));
  r.p_value = chi2_sf(r.statistic, r.dof);
  return r;
}

bool within_combined_se(double x, double sx, double y, double sy, double k) {
  return std::abs(x - y) <= k * std::sqrt(sx * sx + sy * sy);
}

bool intervals_overlap(double x, double sx, double y, double sy, double k) {
  return std::abs(x - y) <= k * (sx + sy);
}

std::vector<double> tabulate(const std::vector<int>& samples, int max_value) {
  int hi = max_value;
  for (int s : samples) hi = std::max(hi, s);
  std::vector<double> counts(static_cast<std::size_t>(std::max(hi, 0)) + 1, 0.0);
  for (int s : samples)
    if (s >= 0) counts[static_cast<std::size_t>(s)] += 1.0;
  return counts;
}

void CompensatedSum::add(double x) {
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    c_ += (sum_ - t) + x;
  else
    c_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace phylonet
