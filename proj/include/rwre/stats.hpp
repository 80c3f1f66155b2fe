#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rwre/error.hpp"
#include "rwre/random.hpp"

namespace rwre {

// Monte Carlo point estimate with its replicate-level standard error.
struct EstimateWithCI {
  double point = 0.0;
  double std_error = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  std::size_t replicates = 0;
  std::uint64_t seed = 0;

  std::pair<double, double> interval(double z) const {
    return {point - z * std_error, point + z * std_error};
  }
  std::pair<double, double> ci99() const { return interval(2.5758293035489004); }

  static EstimateWithCI make(double point, double std_error, std::size_t replicates,
                             std::uint64_t seed) {
    EstimateWithCI e;
    e.point = point;
    e.std_error = std_error;
    e.ci95 = e.interval(1.96);
    e.replicates = replicates;
    e.seed = seed;
    return e;
  }

  static EstimateWithCI from_samples(std::span<const double> xs, std::uint64_t seed);

  friend bool operator==(const EstimateWithCI&, const EstimateWithCI&) = default;
};

// Welford accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline EstimateWithCI EstimateWithCI::from_samples(std::span<const double> xs,
                                                   std::uint64_t seed) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return make(s.mean(), s.std_error(), xs.size(), seed);
}

// Linear-interpolation quantile (type 7). Takes a copy to sort.
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

// Kolmogorov limiting survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF, with the
// Stephens small-sample correction on the asymptotic p-value.
inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw InsufficientSamples("KS test on an empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::size_t pooled_cells = 0;  // cells after pooling
};

// Two-sample chi-square homogeneity test on categorical counts. Cells whose
// expected count falls below `min_expected` in either sample are pooled into
// one residual cell; the residual grows by absorbing the smallest remaining
// cells until it clears the threshold.
inline ChiSquareResult chi_square_homogeneity(
    const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& cells,
    double min_expected = 5.0) {
  double n1 = 0.0, n2 = 0.0;
  for (const auto& [k, c] : cells) {
    n1 += static_cast<double>(c.first);
    n2 += static_cast<double>(c.second);
  }
  const double n = n1 + n2;
  if (n1 == 0.0 || n2 == 0.0) throw InsufficientSamples("empty sample in chi-square test");

  auto min_exp = [&](double a, double b) { return std::min(n1, n2) * (a + b) / n; };

  std::vector<std::pair<double, double>> kept;
  std::vector<std::pair<double, double>> small;
  for (const auto& [k, c] : cells) {
    const auto a = static_cast<double>(c.first);
    const auto b = static_cast<double>(c.second);
    if (a + b == 0.0) continue;
    (min_exp(a, b) >= min_expected ? kept : small).emplace_back(a, b);
  }
  if (!small.empty()) {
    std::pair<double, double> pool{0.0, 0.0};
    for (auto [a, b] : small) {
      pool.first += a;
      pool.second += b;
    }
    std::sort(kept.begin(), kept.end(), [](auto x, auto y) {
      return x.first + x.second > y.first + y.second;
    });
    while (min_exp(pool.first, pool.second) < min_expected && !kept.empty()) {
      pool.first += kept.back().first;
      pool.second += kept.back().second;
      kept.pop_back();
    }
    if (min_exp(pool.first, pool.second) < min_expected)
      throw InsufficientSamples("expected cell count below threshold after pooling");
    kept.push_back(pool);
  }
  if (kept.size() < 2) throw InsufficientSamples("fewer than two cells after pooling");

  ChiSquareResult r;
  for (auto [a, b] : kept) {
    const double e1 = n1 * (a + b) / n;
    const double e2 = n2 * (a + b) / n;
    r.statistic += (a - e1) * (a - e1) / e1 + (b - e2) * (b - e2) / e2;
  }
  r.df = static_cast<double>(kept.size() - 1);
  r.pooled_cells = kept.size();
  boost::math::chi_squared dist(r.df);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

struct TailIndexEstimate {
  double index = 0.0;
  double std_error = 0.0;
  std::size_t k = 0;
};

// Hill estimator of the Pareto tail index from the k largest observations.
inline TailIndexEstimate hill_tail_index(std::vector<double> xs, std::size_t k) {
  if (k == 0 || k >= xs.size()) throw InsufficientSamples("Hill estimator needs 0 < k < n");
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end(),
                   std::greater<>());
  const double threshold = xs[k];
  if (threshold <= 0.0) throw InsufficientSamples("Hill estimator needs a positive threshold");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(xs[i] / threshold);
  TailIndexEstimate t;
  t.k = k;
  t.index = static_cast<double>(k) / s;
  t.std_error = t.index / std::sqrt(static_cast<double>(k));
  return t;
}

inline double lag1_autocorrelation(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    den += (xs[i] - mean) * (xs[i] - mean);
    if (i + 1 < n) num += (xs[i] - mean) * (xs[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

// Two-sided permutation test of zero lag-1 autocorrelation.
inline double lag1_permutation_pvalue(std::vector<double> xs, std::size_t permutations,
                                      std::uint64_t seed) {
  const double observed = std::abs(lag1_autocorrelation(xs));
  Rng rng(seed);
  std::size_t extreme = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(xs[i - 1], xs[j]);
    }
    if (std::abs(lag1_autocorrelation(xs)) >= observed) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

}  // namespace rwre
