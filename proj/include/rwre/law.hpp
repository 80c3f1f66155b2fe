#pragma once

// Laws of the environment mark A and of the offspring count, together with
// the closed-form exponents derived from the log-moment transform of A.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rwre/error.hpp"
#include "rwre/extended_real.hpp"
#include "rwre/numeric.hpp"
#include "rwre/random.hpp"

namespace rwre {

inline constexpr double kRootTolerance = 1e-10;
inline constexpr double kQuadratureTolerance = 1e-10;

// Distribution of the mark A. Either finitely supported or given by a
// bounded density on [lo, hi]; in both cases ess sup A and ess sup 1/A are
// bounded by alpha.
class ALaw {
 public:
  enum class Kind { kFinite, kDensity };

  static ALaw finite(std::vector<double> values, std::vector<double> probs,
                     std::optional<double> alpha = std::nullopt) {
    if (values.empty() || values.size() != probs.size())
      throw InvalidLaw("finite law needs matching non-empty values and probs");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i]))
        throw InvalidLaw("support values must be positive and finite");
      if (!(probs[i] >= 0.0)) throw InvalidLaw("probabilities must be non-negative");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidLaw("probabilities sum to " + std::to_string(total) + ", expected 1");

    ALaw law;
    law.kind_ = Kind::kFinite;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (probs[i] == 0.0) continue;
      law.values_.push_back(values[i]);
      law.probs_.push_back(probs[i] / total);
    }
    law.log_values_.resize(law.values_.size());
    law.log_probs_.resize(law.values_.size());
    law.cdf_.resize(law.values_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < law.values_.size(); ++i) {
      law.log_values_[i] = std::log(law.values_[i]);
      law.log_probs_[i] = std::log(law.probs_[i]);
      acc += law.probs_[i];
      law.cdf_[i] = acc;
    }
    law.cdf_.back() = 1.0;
    law.lo_ = *std::min_element(law.values_.begin(), law.values_.end());
    law.hi_ = *std::max_element(law.values_.begin(), law.values_.end());
    law.set_alpha(alpha);
    return law;
  }

  static ALaw constant(double v) { return finite({v}, {1.0}); }

  // Two-point law: `high` with probability p_high, `low` otherwise.
  static ALaw two_point(double low, double high, double p_high) {
    return finite({low, high}, {1.0 - p_high, p_high});
  }

  // Law with an (unnormalized) bounded density on [lo, hi].
  static ALaw density(double lo, double hi, std::function<double(double)> pdf,
                      std::optional<double> alpha = std::nullopt) {
    if (!(lo > 0.0) || !(hi > lo)) throw InvalidLaw("density support must satisfy 0 < lo < hi");
    ALaw law;
    law.kind_ = Kind::kDensity;
    law.lo_ = lo;
    law.hi_ = hi;
    law.pdf_ = std::make_shared<std::function<double(double)>>(std::move(pdf));
    const auto& f = *law.pdf_;
    law.norm_ = integrate([&](double a) { return f(a); }, lo, hi);
    if (!(law.norm_ > 0.0) || !std::isfinite(law.norm_))
      throw InvalidLaw("density does not integrate to a positive finite mass");
    double peak = 0.0;
    constexpr int kGrid = 4096;
    for (int i = 0; i <= kGrid; ++i) {
      const double v = f(lo + (hi - lo) * i / kGrid);
      if (v < 0.0) throw InvalidLaw("density takes negative values");
      peak = std::max(peak, v);
    }
    law.envelope_ = 1.25 * peak;
    law.set_alpha(alpha);
    return law;
  }

  static ALaw uniform(double lo, double hi, std::optional<double> alpha = std::nullopt) {
    ALaw law = density(lo, hi, [](double) { return 1.0; }, alpha);
    law.uniform_ = true;
    return law;
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_degenerate() const { return is_finite() && lo_ == hi_; }
  double ess_inf() const { return lo_; }
  double ess_sup() const { return hi_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

  // Normalized density (density laws only).
  double pdf(double a) const {
    if (is_finite()) throw Error("pdf() on a finite-support law");
    if (a < lo_ || a > hi_) return 0.0;
    return (*pdf_)(a) / norm_;
  }

  // E[A^t].
  double moment(double t) const {
    if (is_finite()) {
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) s += probs_[i] * std::pow(values_[i], t);
      return s;
    }
    return std::exp(log_moment(t));
  }

  // ln E[A^t], evaluated without overflow for large |t|.
  double log_moment(double t) const {
    if (t == 0.0) return 0.0;
    if (is_finite()) {
      double m = -INFINITY;
      for (std::size_t i = 0; i < values_.size(); ++i)
        m = std::max(m, log_probs_[i] + t * log_values_[i]);
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        s += std::exp(log_probs_[i] + t * log_values_[i] - m);
      return m + std::log(s);
    }
    const double ref = t > 0.0 ? std::log(hi_) : std::log(lo_);
    const double scaled = integrate(
        [&](double a) { return (*pdf_)(a) * std::exp(t * (std::log(a) - ref)); }, lo_, hi_);
    return t * ref + std::log(scaled / norm_);
  }

  // d/dt ln E[A^t] = E[A^t ln A] / E[A^t].
  double log_moment_derivative(double t) const {
    if (is_finite()) {
      double m = -INFINITY;
      for (std::size_t i = 0; i < values_.size(); ++i)
        m = std::max(m, log_probs_[i] + t * log_values_[i]);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        const double w = std::exp(log_probs_[i] + t * log_values_[i] - m);
        num += w * log_values_[i];
        den += w;
      }
      return num / den;
    }
    const double ref = t > 0.0 ? std::log(hi_) : std::log(lo_);
    const auto& f = *pdf_;
    const double den =
        integrate([&](double a) { return f(a) * std::exp(t * (std::log(a) - ref)); }, lo_, hi_);
    const double num = integrate(
        [&](double a) { return f(a) * std::exp(t * (std::log(a) - ref)) * std::log(a); }, lo_,
        hi_);
    return num / den;
  }

  double mean_log() const { return log_moment_derivative(0.0); }

  template <class G>
  double sample(G& g) const {
    if (is_finite()) {
      const double u = uniform01(g);
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      return values_[std::min<std::size_t>(it - cdf_.begin(), values_.size() - 1)];
    }
    if (uniform_) return lo_ + (hi_ - lo_) * uniform01(g);
    for (;;) {
      const double a = lo_ + (hi_ - lo_) * uniform01(g);
      if (uniform01(g) * envelope_ <= (*pdf_)(a)) return a;
    }
  }

 private:
  template <class F>
  static double integrate(F&& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, lo, hi, 15, kQuadratureTolerance);
  }

  void set_alpha(std::optional<double> alpha) {
    const double needed = std::max(hi_, 1.0 / lo_);
    if (alpha) {
      if (*alpha * (1.0 + 1e-12) < needed)
        throw InvalidLaw("support not contained in [1/alpha, alpha]");
      alpha_ = *alpha;
    } else {
      alpha_ = needed;
    }
  }

  Kind kind_ = Kind::kFinite;
  std::vector<double> values_, probs_, log_values_, log_probs_, cdf_;
  std::shared_ptr<std::function<double(double)>> pdf_;
  double norm_ = 1.0;
  double envelope_ = 0.0;
  bool uniform_ = false;
  double lo_ = 1.0, hi_ = 1.0, alpha_ = 1.0;
};

// Offspring distribution q_k, k >= 1. The degenerate q_1 = 1 law is the
// half-line tree used for one-dimensional comparisons.
class OffspringLaw {
 public:
  // probs[k-1] = P(nu = k).
  static OffspringLaw from_probs(std::vector<double> probs) {
    if (probs.empty()) throw InvalidLaw("offspring law needs at least one probability");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw InvalidLaw("offspring probabilities must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidLaw("offspring probabilities sum to " + std::to_string(total) + ", expected 1");
    while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
    OffspringLaw law;
    law.probs_ = std::move(probs);
    for (double& p : law.probs_) p /= total;
    double acc = 0.0;
    for (double p : law.probs_) law.cdf_.push_back(acc += p);
    law.cdf_.back() = 1.0;
    return law;
  }

  static OffspringLaw regular(int b) {
    if (b < 1) throw InvalidLaw("regular tree needs b >= 1");
    std::vector<double> q(static_cast<std::size_t>(b), 0.0);
    q.back() = 1.0;
    return from_probs(std::move(q));
  }

  static OffspringLaw line() { return from_probs({1.0}); }

  double prob(int k) const {
    return k >= 1 && k <= max_offspring() ? probs_[static_cast<std::size_t>(k - 1)] : 0.0;
  }
  double q1() const { return probs_[0]; }
  bool is_line() const { return probs_.size() == 1; }
  int max_offspring() const { return static_cast<int>(probs_.size()); }
  int min_offspring() const {
    for (std::size_t k = 0; k < probs_.size(); ++k)
      if (probs_[k] > 0.0) return static_cast<int>(k + 1);
    return 1;
  }
  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) m += static_cast<double>(k + 1) * probs_[k];
    return m;
  }
  const std::vector<double>& probs() const { return probs_; }

  template <class G>
  int sample(G& g) const {
    if (probs_.size() == 1) return 1;
    const double u = uniform01(g);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(std::min<std::size_t>(it - cdf_.begin(), probs_.size() - 1)) + 1;
  }

 private:
  std::vector<double> probs_, cdf_;
};

inline double moment_transform(const ALaw& law, double t) { return law.moment(t); }

// inf over t in [0, 1] of E[A^t]; the map is convex, so golden section is exact
// up to its tolerance.
inline double transience_infimum(const ALaw& law) {
  const double t = numeric::golden_section_min([&](double s) { return law.moment(s); }, 0.0,
                                               1.0, 1e-12);
  return std::min({law.moment(t), law.moment(0.0), law.moment(1.0)});
}

// Transience of the tree walk. On a genuine Galton-Watson tree the criterion
// is inf_{[0,1]} E[A^t] > 1/m. On the half-line tree (q_1 = 1) the walk is a
// reflected one-dimensional RWRE, transient iff E[ln A] > 0.
inline bool is_transient(const ALaw& a_law, const OffspringLaw& off) {
  if (off.is_line()) {
    const double drift = a_law.mean_log();
    if (std::abs(drift) < 1e-9)
      throw BorderlineCriterion("E[ln A] is numerically zero on the half-line tree");
    return drift > 0.0;
  }
  const double inf = transience_infimum(a_law);
  const double threshold = 1.0 / off.mean();
  if (std::abs(inf - threshold) < 1e-9)
    throw BorderlineCriterion("inf E[A^t] = " + std::to_string(inf) + " is within 1e-9 of 1/m");
  return inf > threshold;
}

// Endpoints of the sublevel set {t : ln E[A^t] <= level} when it is a bounded
// interval; nullopt when it is unbounded.
struct SublevelInterval {
  double left = 0.0;
  double right = 0.0;
  bool empty = false;
};

inline std::optional<SublevelInterval> sublevel_interval(const ALaw& law, double level) {
  const double a = std::log(law.ess_inf());
  const double b = std::log(law.ess_sup());
  if (a >= 0.0 || b <= 0.0) return std::nullopt;  // phi monotone: half-line
  auto phi = [&](double t) { return law.log_moment(t); };
  double span = 1.0;
  while (phi(-span) <= level || phi(span) <= level) {
    span *= 2.0;
    if (span > 0x1.0p60) throw Error("sublevel bracket expansion did not terminate");
  }
  const double t_min = numeric::golden_section_min(phi, -span, span, 1e-12);
  if (phi(t_min) > level) return SublevelInterval{t_min, t_min, true};
  auto below = [&](double t) { return phi(t) <= level; };
  SublevelInterval r;
  r.left = numeric::bisect(below, t_min, -span, kRootTolerance);
  r.right = numeric::bisect(below, t_min, span, kRootTolerance);
  return r;
}

// Lebesgue measure of {t : E[A^t] <= 1/q1}; +inf when q1 = 0 or when the set
// is a half-line.
inline ExtendedReal lambda_exponent(const ALaw& a_law, double q1) {
  if (!(q1 >= 0.0 && q1 <= 1.0)) throw std::invalid_argument("q1 must lie in [0, 1]");
  if (q1 == 0.0) return ExtendedReal::pos_inf();
  const auto set = sublevel_interval(a_law, -std::log(q1));
  if (!set) return ExtendedReal::pos_inf();
  if (set->empty) return ExtendedReal(0.0);
  return ExtendedReal(set->right - set->left);
}

// Root kappa in (0, 1] of E[A^{-kappa}] = 1, if any.
inline std::optional<double> solomon_kappa(const ALaw& a_law) {
  if (a_law.is_degenerate() || a_law.mean_log() <= 0.0) return std::nullopt;
  auto g = [&](double k) { return a_law.moment(-k) - 1.0; };
  const double at_one = g(1.0);
  if (std::abs(at_one) <= 1e-14) return 1.0;
  if (at_one < 0.0) return std::nullopt;
  return numeric::bisect([&](double k) { return g(k) < 0.0; }, 0.0, 1.0, kRootTolerance);
}

struct ChordResult {
  double value = 0.0;
  double t_bar = 0.0;
};

// phi = ln E[A^t] with its Legendre transform I.
class TransformTable {
 public:
  explicit TransformTable(ALaw law)
      : law_(std::move(law)), a_(std::log(law_.ess_inf())), b_(std::log(law_.ess_sup())) {}

  const ALaw& law() const { return law_; }
  double phi(double t) const { return law_.log_moment(t); }
  double dphi(double t) const { return law_.log_moment_derivative(t); }
  // [a, b] = [ess inf ln A, ess sup ln A]
  double support_low() const { return a_; }
  double support_high() const { return b_; }
  bool degenerate() const { return a_ == b_; }

  // I(x) = sup_t { t x - phi(t) }.
  ExtendedReal legendre(double x) const {
    if (degenerate()) {
      return std::abs(x - a_) <= 1e-12 ? ExtendedReal(0.0) : ExtendedReal::pos_inf();
    }
    if (x < a_ || x > b_) return ExtendedReal::pos_inf();
    double span = 1.0;
    while (span < 4096.0 && (x - dphi(-span) <= 0.0 || x - dphi(span) >= 0.0)) span *= 2.0;
    auto g = [&](double t) { return t * x - phi(t); };
    const double t_star = numeric::ternary_search_max(g, -span, span, kRootTolerance);
    return ExtendedReal(std::max(0.0, g(t_star)));
  }

  // Solution of phi(t) = phi(t + lambda); 0 when phi is monotone.
  double chord_root(double lambda) const {
    if (degenerate() || a_ >= 0.0 || b_ <= 0.0) return 0.0;
    auto d = [&](double t) { return phi(t + lambda) - phi(t); };
    double span = 1.0;
    while (d(-span) >= 0.0 || d(span) <= 0.0) {
      span *= 2.0;
      if (span > 0x1.0p60) throw Error("chord bracket expansion did not terminate");
    }
    return numeric::bisect([&](double t) { return d(t) < 0.0; }, -span, span, kRootTolerance);
  }

  // L(lambda) = max(0, phi(t_bar)).
  ChordResult big_L(double lambda) const {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0, 1]");
    const double t_bar = chord_root(lambda);
    return {std::max(0.0, phi(t_bar)), t_bar};
  }

 private:
  ALaw law_;
  double a_, b_;
};

inline ExtendedReal legendre(const TransformTable& tab, double x) { return tab.legendre(x); }

inline ChordResult big_L(const TransformTable& tab, double lambda) { return tab.big_L(lambda); }

// L' through its closed form -Lambda.
inline ExtendedReal big_L_prime(const TransformTable& tab, double q1) {
  return -lambda_exponent(tab.law(), q1);
}

// L' by direct maximization of
//   (x1 + x2)/(x1 x2) ln q1 - I(-x1)/x1 - I(x2)/x2   over x1, x2 > 0
// on a log-spaced grid, refined by coordinate-wise golden section. Each
// coordinate section is quasi-concave, so the refinement cannot leave the
// basin of the grid maximizer.
inline ExtendedReal big_L_prime_direct(const TransformTable& tab, double q1) {
  if (!(q1 >= 0.0 && q1 <= 1.0)) throw std::invalid_argument("q1 must lie in [0, 1]");
  if (q1 == 0.0) return ExtendedReal::neg_inf();
  const double a = tab.support_low();
  const double b = tab.support_high();
  if (tab.degenerate() || a >= 0.0 || b <= 0.0) return ExtendedReal::neg_inf();
  const double ln_q1 = std::log(q1);

  const double x1_max = -a;
  const double x2_max = b;
  auto i_left = [&](double x1) { return tab.legendre(-x1).value(); };
  auto i_right = [&](double x2) { return tab.legendre(x2).value(); };
  auto objective = [&](double x1, double x2, double i1, double i2) {
    return (x1 + x2) / (x1 * x2) * ln_q1 - i1 / x1 - i2 / x2;
  };

  constexpr int kGrid = 48;
  constexpr double kSpanDecades = 5.0;
  std::vector<double> g1(kGrid), g2(kGrid), i1(kGrid), i2(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    const double s = std::pow(10.0, -kSpanDecades * (kGrid - 1 - k) / (kGrid - 1));
    g1[k] = x1_max * s;
    g2[k] = x2_max * s;
    i1[k] = i_left(g1[k]);
    i2[k] = i_right(g2[k]);
  }
  int best1 = 0, best2 = 0;
  double best = -INFINITY;
  for (int p = 0; p < kGrid; ++p) {
    for (int q = 0; q < kGrid; ++q) {
      const double v = objective(g1[p], g2[q], i1[p], i2[q]);
      if (v > best) {
        best = v;
        best1 = p;
        best2 = q;
      }
    }
  }

  double x1 = g1[best1], x2 = g2[best2];
  double lo1 = g1[std::max(best1 - 1, 0)], hi1 = g1[std::min(best1 + 1, kGrid - 1)];
  double lo2 = g2[std::max(best2 - 1, 0)], hi2 = g2[std::min(best2 + 1, kGrid - 1)];
  for (int sweep = 0; sweep < 20; ++sweep) {
    const double i2_now = i_right(x2);
    x1 = numeric::golden_section_max(
        [&](double s) { return objective(s, x2, i_left(s), i2_now); }, lo1, hi1, 1e-11);
    const double i1_now = i_left(x1);
    x2 = numeric::golden_section_max(
        [&](double s) { return objective(x1, s, i1_now, i_right(s)); }, lo2, hi2, 1e-11);
    const double v = objective(x1, x2, i_left(x1), i_right(x2));
    const bool done = v - best < 1e-14;
    best = std::max(best, v);
    if (done) break;
  }
  return ExtendedReal(best);
}

}  // namespace rwre
