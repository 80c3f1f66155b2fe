#pragma once

// Cross-checks run by `verify`. Quick checks are exact identities and oracle
// comparisons; the acceptance experiments add the Monte Carlo trend checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rwre/gw_tree.hpp"
#include "rwre/law.hpp"
#include "rwre/lerrw.hpp"
#include "rwre/line_walk.hpp"
#include "rwre/report.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre {

struct NamedCheck {
  std::string name;
  std::function<CheckResult()> run;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... Ts>
std::string fmtn(const char* f, Ts... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

inline CheckResult timed(const std::string& name, const std::function<CheckResult()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Finite law with 2 to 4 atoms in [1/4, 4], at least one on each side of 1.
template <class G>
ALaw random_two_sided_law(G& g) {
  const int atoms = 2 + static_cast<int>(uniform01(g) * 3.0);
  std::vector<double> values, probs;
  double total = 0.0;
  for (int k = 0; k < atoms; ++k) {
    const double mag = std::exp(std::log(4.0) * (0.05 + 0.95 * uniform01(g)));
    values.push_back(k == 0 ? 1.0 / mag : k == 1 ? mag : (uniform01(g) < 0.5 ? mag : 1.0 / mag));
    probs.push_back(0.05 + uniform01(g));
    total += probs.back();
  }
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) acc += (probs[k] /= total);
  probs.back() = 1.0 - acc;
  return ALaw::finite(values, probs);
}

template <class G>
LineEnvironment random_line_environment(std::size_t n, G& g) {
  std::vector<double> marks(n);
  for (auto& a : marks) a = std::exp(std::log(4.0) * (2.0 * uniform01(g) - 1.0));
  return LineEnvironment(std::move(marks));
}

}  // namespace detail

// ---------------------------------------------------------------- quick checks

inline CheckResult check_lambda_closed_form() {
  const auto law = ALaw::two_point(0.5, 2.0, 0.5);
  const double got = lambda_exponent(law, 0.5).value();
  const double want = 2.0 * std::acosh(2.0) / std::log(2.0);
  return {"", std::abs(got - want) <= 1e-9,
          detail::fmtn("Lambda=%.12f closed form=%.12f diff=%.2e", got, want, std::abs(got - want))};
}

inline CheckResult check_legendre_variational_identity(std::uint64_t seed = 11) {
  const double q1s[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Rng g(derive_seed(seed, k));
    const TransformTable tab(detail::random_two_sided_law(g));
    for (double q1 : q1s) {
      const auto direct = big_L_prime_direct(tab, q1);
      const auto via_lambda = big_L_prime(tab, q1);
      if (direct.is_finite() != via_lambda.is_finite())
        return {"", false, detail::fmtn("law %d q1=%.2f: finiteness differs", k, q1)};
      if (direct.is_finite()) worst = std::max(worst, std::abs(direct.value() - via_lambda.value()));
    }
  }
  return {"", worst <= 1e-5, detail::fmt("max |direct L' + Lambda| = %.3e over 100 cases", worst)};
}

inline CheckResult check_circuit_oracle(std::uint64_t seed = 12, std::size_t envs = 500) {
  double hit_diff = 0.0, exit_rel = 0.0;
  for (std::size_t k = 0; k < envs; ++k) {
    Rng g(derive_seed(seed, k));
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(g) * 50.0);
    const auto env = detail::random_line_environment(n, g);
    const auto oracle = oracle_solve(env, n);
    for (std::size_t i = 0; i <= n; ++i)
      hit_diff = std::max(hit_diff, std::abs(oracle.hit(i) - hit_prob_before_minus1(env, i)));
    const double e = expected_exit_time(env, n);
    exit_rel = std::max(exit_rel, std::abs(e - oracle.exit_time()) / oracle.exit_time());
  }
  return {"", hit_diff < 1e-10 && exit_rel < 1e-10,
          detail::fmtn("max hit diff %.2e, max relative exit-time diff %.2e over %zu envs", hit_diff,
                       exit_rel, envs)};
}

inline CheckResult check_potential_bracket(std::uint64_t seed = 13) {
  for (std::size_t k = 0; k < 200; ++k) {
    Rng g(derive_seed(seed, k));
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(g) * 50.0);
    const auto env = detail::random_line_environment(n, g);
    for (std::size_t i = 0; i <= n; ++i) {
      const double p = hit_prob_before_minus1(env, i);
      const double upper = std::exp(-env.M(i));
      if (p > upper || p < upper / static_cast<double>(n + 1))
        return {"", false, detail::fmtn("env %zu level %zu violates the bracket", k, i)};
    }
  }
  return {"", true, "e^{-M(i)}/(n+1) <= P(T_i < T_-1) <= e^{-M(i)} on 200 envs"};
}

inline CheckResult check_transform_identities() {
  const auto law = ALaw::two_point(0.5, 2.0, 0.5);
  const TransformTable tab(law);
  double duality = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = -5.0 + 0.1 * k;
    const double x = tab.dphi(t);
    duality = std::max(duality, std::abs(tab.legendre(x).value() - (t * x - tab.phi(t))));
  }
  double convexity = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double t = -10.0 + 0.1 * k;
    convexity = std::min(convexity, tab.phi(t + 0.1) - 2.0 * tab.phi(t) + tab.phi(t - 0.1));
  }
  const bool ok = duality <= 1e-7 && convexity >= -1e-9 && tab.phi(0.0) == 0.0;
  return {"", ok, detail::fmtn("duality err %.2e, min second difference %.2e", duality, convexity)};
}

inline CheckResult check_sublevel_chord_duality() {
  const TransformTable tab(ALaw::two_point(0.5, 2.0, 0.5));
  int cases = 0;
  for (double q1 : {0.3, 0.5, 0.7, 0.9, 0.95}) {
    const double lambda_exp = lambda_exponent(tab.law(), q1).value();
    for (int k = 1; k <= 100; ++k) {
      const double l = 0.01 * k;
      if (std::abs(l - lambda_exp) < 1e-3) continue;
      const bool below = tab.big_L(l).value < std::log(1.0 / q1);
      if (below != (l < lambda_exp))
        return {"", false, detail::fmtn("q1=%.2f lambda=%.2f disagrees", q1, l)};
      ++cases;
    }
  }
  return {"", true, detail::fmtn("%d (q1, lambda) pairs consistent", cases)};
}

inline CheckResult check_tree_rows_and_determinism(std::uint64_t seed = 14) {
  const auto a = ALaw::uniform(1.0 / 3.0, 3.0);
  const auto off = OffspringLaw::from_probs({0.3, 0.4, 0.3});
  MarkedTree t1(a, off, seed), t2(a, off, seed);
  double worst = 0.0;
  std::vector<NodeId> frontier{kRoot};
  std::size_t rows = 0;
  while (rows < 10'000 && !frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      const auto rec = t1.expand(v);
      double s = rec.p_parent;
      for (double p : rec.p_children) s += p;
      worst = std::max(worst, std::abs(s - 1.0));
      ++rows;
      for (int i = 0; i < rec.offspring; ++i) next.push_back(t1.child(v, i));
    }
    frontier.swap(next);
  }
  // Query t2 deepest-first along one branch, then compare a shared vertex set.
  NodeId deep = kRoot;
  for (int d = 0; d < 6; ++d) deep = t2.child(deep, t2.offspring(deep) - 1);
  const auto addr = t2.address(deep);
  const NodeId mirror = t1.find(addr);
  bool same = t1.mark(mirror) == t2.mark(deep);
  for (NodeId v = kRoot; v <= 40 && same; ++v) {
    const auto r1 = t1.expand(v);
    const auto r2 = t2.expand(t2.find(t1.address(v)));
    same = r1.offspring == r2.offspring && r1.marks == r2.marks;
  }
  return {"", worst <= 1e-12 && same,
          detail::fmtn("%zu rows, max |row sum - 1| = %.2e, order-independent: %s", rows, worst,
                       same ? "yes" : "no")};
}

inline CheckResult check_urn_bookkeeping(std::uint64_t seed = 15) {
  for (int b : {2, 3, 5}) {
    UrnState urn(b, 1.0);
    Rng g(derive_seed(seed, b));
    for (int k = 0; k < 10'000; ++k) {
      const std::uint32_t from = urn.current();
      std::vector<double> before;
      for (int e = from == 0 ? 0 : kParentEdge; e < b; ++e) before.push_back(urn.edge_weight(from, e));
      const int edge = urn.step(g);
      const double w_old = before[static_cast<std::size_t>(edge + (from == 0 ? 0 : 1))];
      const int back = edge == kParentEdge ? urn.child_index(from) : kParentEdge;
      const double want = (w_old + urn.delta()) / urn.total_weight(urn.current());
      if (std::abs(urn.move_probability(back) - want) > 1e-15)
        return {"", false, "reversal probability mismatch"};
    }
    if (urn.excess_weight_sum() != 10'000.0) return {"", false, "excess weight differs from n delta"};
  }
  return {"", true, "sum of (w - 1) = n delta and reversal probabilities consistent"};
}

inline CheckResult check_path_domination(std::uint64_t seed = 16, std::size_t trees = 100) {
  const auto a = ALaw::uniform(1.0 / 3.0, 3.0);
  const auto off = OffspringLaw::from_probs({0.3, 0.4, 0.3});
  double worst = -1.0;
  std::size_t rows = 0;
  for (std::size_t k = 0; k < trees; ++k) {
    MarkedTree tree(a, off, derive_seed(seed, k, 0));
    Rng g(derive_seed(seed, k, 1));
    auto descend = [&](NodeId v, int levels) {
      for (int d = 0; d < levels; ++d)
        v = tree.child(v, static_cast<int>(uniform01(g) * tree.offspring(v)));
      return v;
    };
    const NodeId x = descend(kRoot, static_cast<int>(uniform01(g) * 3.0));
    const int span = 1 + static_cast<int>(uniform01(g) * (8 - tree.depth(x)));
    const NodeId y = descend(x, span);
    for (const auto& r : path_domination(tree, x, y)) {
      worst = std::max({worst, r.tree_hit_y - r.projected_hit_y,
                        r.tree_hit_parent - r.projected_hit_parent});
      ++rows;
    }
  }
  return {"", worst <= 1e-10,
          detail::fmtn("max (tree - projected) = %.2e over %zu starting points", worst, rows)};
}

// ---------------------------------------------------- acceptance experiments

struct AcceptanceOptions {
  std::uint64_t seed = 2024;
  std::size_t workers = 1;
};

inline CheckResult check_line_tree_regimes(const AcceptanceOptions& o) {
  const auto off = OffspringLaw::line();
  const auto kesten = ALaw::two_point(1.0 / 3.0, 3.0, 0.7);
  const std::size_t n = 1'000'000;
  const auto gens = replicate_generations(kesten, off, {n}, 100, derive_seed(o.seed, 4, 1), o.workers);
  const auto speed_a = speed_from_generations(gens, 0, n, o.seed);
  const auto rows = summarize_exponents({n}, gens);
  const double kappa = *solomon_kappa(kesten);
  const auto speed_b = estimate_speed(ALaw::constant(2.0), off, n, 10, derive_seed(o.seed, 4, 2), o.workers);
  const bool ok = speed_a.point < 0.03 && std::abs(rows[0].median - kappa) <= 0.15 &&
                  std::abs(speed_b.point - 1.0 / 3.0) <= 0.02;
  return {"", ok,
          detail::fmtn("(a) speed %.4f, median exponent %.4f vs kappa %.4f; (b) speed %.4f vs 1/3",
                       speed_a.point, rows[0].median, kappa, speed_b.point)};
}

inline CheckResult check_regular_tree_positive_speed(const AcceptanceOptions& o) {
  const auto v = estimate_speed(ALaw::two_point(0.5, 2.0, 0.5), OffspringLaw::regular(2), 100'000,
                                200, derive_seed(o.seed, 5), o.workers);
  const auto ci = v.ci99();
  return {"", ci.first > 0.0, detail::fmtn("v = %.4f, 99%% CI [%.4f, %.4f]", v.point, ci.first, ci.second)};
}

inline CheckResult check_zero_speed_regime(const AcceptanceOptions& o) {
  const auto a = ALaw::two_point(0.5, 2.0, 0.5);
  const auto off = OffspringLaw::from_probs({0.95, 0.05});
  const std::size_t n = 1'000'000;
  const auto gens = replicate_generations(a, off, {n}, 100, derive_seed(o.seed, 6), o.workers);
  const auto speed = speed_from_generations(gens, 0, n, o.seed);
  const auto rows = summarize_exponents({n}, gens);
  const bool ok = rows[0].median >= 0.6 && rows[0].median <= 0.98 && speed.point < 0.02;
  return {"", ok,
          detail::fmtn("median exponent %.4f (window [0.6, 0.98], Lambda %.4f), speed %.5f",
                       rows[0].median, lambda_exponent(a, 0.95).value(), speed.point)};
}

inline CheckResult check_renewal_identity(const AcceptanceOptions& o) {
  const auto a = ALaw::constant(4.0);
  const auto off = OffspringLaw::regular(2);
  const std::size_t runs = 20, steps = 100'000, horizon = 1'000;
  const auto summaries = map_replicates(runs, o.workers, [&](std::size_t r) {
    return simulate_replicate(a, off, steps, {}, horizon, derive_seed(o.seed, 7, 0), r);
  });
  RunningStats level;
  std::size_t records = 0, censored = 0;
  for (const auto& s : summaries) {
    for (double g : s.level_gaps) level.add(g);
    records += s.regenerations;
    censored += s.censored;
  }
  const auto beta = estimate_beta_fresh_roots(a, off, horizon, 2'000, derive_seed(o.seed, 7, 1), o.workers);
  const double product = level.mean() * beta.point;
  const double rate = static_cast<double>(censored) / static_cast<double>(records);
  return {"", product >= 0.9 && product <= 1.1 && rate < 0.05,
          detail::fmtn("E_S|X_G1| = %.4f, E_Q[beta] = %.4f, product %.4f, censoring rate %.4f",
                       level.mean(), beta.point, product, rate)};
}

inline CheckResult check_visited_per_generation(const AcceptanceOptions& o) {
  const auto a = ALaw::constant(4.0);
  const auto off = OffspringLaw::regular(2);
  double lo = 1e300, hi = 0.0;
  std::string values;
  for (int n : {5, 10, 20, 40}) {
    const auto e = visited_per_generation(a, off, n, 10'000, derive_seed(o.seed, 8, n), 20,
                                          10'000'000, o.workers);
    lo = std::min(lo, e.point);
    hi = std::max(hi, e.point);
    values += detail::fmtn("n=%d: %.4f  ", n, e.point);
  }
  return {"", hi / lo < 2.0, values + detail::fmt("max/min %.4f", hi / lo)};
}

inline CheckResult check_lerrw_representation(const AcceptanceOptions& o) {
  const auto eq = equivalence_test(2, 1.0, 6, 100'000, derive_seed(o.seed, 10, 0));
  const auto neg = equivalence_test(2, 1.0, 6, 100'000, derive_seed(o.seed, 10, 1), 1.0);
  Rng g(derive_seed(o.seed, 10, 2));
  std::vector<double> parent, child;
  for (int k = 0; k < 100'000; ++k) {
    const auto env = sample_beta_env(2, g);
    parent.push_back(env.parent);
    child.push_back(env.children[0]);
  }
  const auto ks0 = ks_test(parent, [](double x) { return f0_cdf(2, x); });
  const auto ks1 = ks_test(child, [](double x) { return f1_cdf(2, x); });
  const bool ok = eq.p_value > 0.01 && neg.p_value < 1e-6 && ks0.p_value > 0.01 && ks1.p_value > 0.01;
  return {"", ok,
          detail::fmtn("equivalence p %.4f, negative control p %.2e, KS f0 p %.4f, KS f1 p %.4f",
                       eq.p_value, neg.p_value, ks0.p_value, ks1.p_value)};
}

// Speeds use the second half of each trajectory; see README.
inline constexpr double kLerrwBurnIn = 0.5;

inline CheckResult check_lerrw_speed_bound(const AcceptanceOptions& o) {
  bool ok = true;
  std::string detail_text;
  for (int b : {2, 3, 5}) {
    const auto v = lerrw_speed(b, 1.0, 100'000, 200, derive_seed(o.seed, 11, b), kLerrwBurnIn, o.workers);
    const auto ci = v.ci99();
    const double bound = static_cast<double>(b) / (b + 2) + 0.05;
    ok = ok && ci.first > 0.0 && v.point <= bound;
    detail_text += detail::fmtn("b=%d: v %.4f 99%%CI [%.4f, %.4f] bound %.4f; ", b, v.point, ci.first,
                                ci.second, bound);
  }
  const auto v6 = lerrw_speed(2, 6.0, 100'000, 200, derive_seed(o.seed, 11, 6), kLerrwBurnIn, o.workers);
  ok = ok && std::abs(v6.point) < 2.0 * v6.std_error;
  detail_text += detail::fmtn("b=2 delta=6: v %.2e stderr %.2e", v6.point, v6.std_error);
  return {"", ok, detail_text};
}

inline CheckResult check_exit_time_growth_rate(const AcceptanceOptions& o) {
  const auto law = ALaw::two_point(0.5, 2.0, 0.5);
  const double target = TransformTable(law).big_L(1.0).value;
  const auto m = m_estimate(law, 60, 1.0, 10'000, derive_seed(o.seed, 12), o.workers);
  const double rate = std::log(m.point) / 60.0;
  return {"", std::abs(rate - target) <= 0.02,
          detail::fmtn("ln m(60,1)/60 = %.4f vs L(1) = %.4f", rate, target)};
}

// ----------------------------------------------------------------- registries

inline std::vector<NamedCheck> quick_checks() {
  return {
      {"lambda_closed_form", [] { return check_lambda_closed_form(); }},
      {"legendre_variational_identity", [] { return check_legendre_variational_identity(); }},
      {"circuit_vs_tridiagonal", [] { return check_circuit_oracle(); }},
      {"potential_bracket", [] { return check_potential_bracket(); }},
      {"transform_identities", [] { return check_transform_identities(); }},
      {"sublevel_chord_duality", [] { return check_sublevel_chord_duality(); }},
      {"tree_rows_and_determinism", [] { return check_tree_rows_and_determinism(); }},
      {"urn_bookkeeping", [] { return check_urn_bookkeeping(); }},
      {"path_projection_domination", [] { return check_path_domination(); }},
  };
}

// The twelve acceptance criteria, in order.
inline std::vector<NamedCheck> acceptance_checks(const AcceptanceOptions& o) {
  return {
      {"lambda_closed_form", [] { return check_lambda_closed_form(); }},
      {"legendre_variational_identity", [] { return check_legendre_variational_identity(); }},
      {"circuit_vs_tridiagonal", [] { return check_circuit_oracle(); }},
      {"line_tree_regimes", [o] { return check_line_tree_regimes(o); }},
      {"regular_tree_positive_speed", [o] { return check_regular_tree_positive_speed(o); }},
      {"zero_speed_regime", [o] { return check_zero_speed_regime(o); }},
      {"renewal_identity", [o] { return check_renewal_identity(o); }},
      {"visited_per_generation_bounded", [o] { return check_visited_per_generation(o); }},
      {"path_projection_domination", [] { return check_path_domination(); }},
      {"lerrw_representation", [o] { return check_lerrw_representation(o); }},
      {"lerrw_speed_bound", [o] { return check_lerrw_speed_bound(o); }},
      {"exit_time_growth_rate", [o] { return check_exit_time_growth_rate(o); }},
  };
}

inline std::vector<CheckResult> run_checks(const std::vector<NamedCheck>& checks) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) out.push_back(detail::timed(c.name, c.run));
  return out;
}

}  // namespace rwre
