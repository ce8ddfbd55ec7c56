#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "cfpower/kkt.hpp"

namespace cfpower {

namespace detail {

inline SolveReport zero_symmetric_report(const DiscreteChannelModel& model,
                                         const std::string& id) {
  SolveReport r;
  r.policy = SymmetricPolicy{std::vector<double>(model.state_count(), 0.0)};
  r.expected_rate = 0.0;
  r.iterations = 0;
  r.algorithm_id = id;
  return r;
}

// Positive-rate filter used by the state-dropping steps.
inline std::vector<int> positive_rate_states(const DiscreteChannelModel& model,
                                             const EquationCoefficients& a,
                                             const SymmetricPolicy& policy,
                                             std::span<const int> S) {
  std::vector<int> kept;
  for (int m : S)
    if (symmetric_rate_unclamped(model.h(m), a, policy.P[m]) > 0.0) kept.push_back(m);
  return kept;
}

// One candidate-set evaluation: solve on S, and if some powered state ends up
// with nonpositive rate, re-solve once on the positive-rate survivors.
inline SolveReport solve_with_survivors(const DiscreteChannelModel& model,
                                        const EquationCoefficients& a,
                                        std::span<const int> S, double pbar,
                                        const BisectionConfig& cfg) {
  SolveReport rep = solve_dp2s(model, a, S, pbar, cfg);
  const auto& policy = std::get<SymmetricPolicy>(rep.policy);
  bool wasted = false;
  for (int m : S)
    if (policy.P[m] > 0.0 && symmetric_rate_unclamped(model.h(m), a, policy.P[m]) <= 0.0) {
      wasted = true;
      break;
    }
  if (!wasted) return rep;
  const std::vector<int> kept = positive_rate_states(model, a, policy, S);
  if (kept.empty()) return zero_symmetric_report(model, rep.algorithm_id);
  return solve_dp2s(model, a, kept, pbar, cfg);
}

}  // namespace detail

// Constant power on every good state.
inline SolveReport algo_a0(const DiscreteChannelModel& model, const EquationCoefficients& a,
                           double pbar) {
  if (pbar < 0.0) throw argument_error("power budget must be non-negative");
  SolveReport r = detail::zero_symmetric_report(model, "A0");
  auto& policy = std::get<SymmetricPolicy>(r.policy);
  for (int m : classify_states(model, a).good) policy.P[m] = pbar;
  if (pbar > 0.0)
    for (int m : classify_states(model, a).good) r.active_set.push_back(m);
  r.expected_rate = expected_rate(model, a, policy);
  return r;
}

// Water-filling on the good set, then one drop-and-resolve pass.
struct A1Report {
  SolveReport first_pass;
  SolveReport refined;
};

inline A1Report algo_a1(const DiscreteChannelModel& model, const EquationCoefficients& a,
                        double pbar, const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  const std::vector<int> good = classify_states(model, a).good;
  if (good.empty()) {
    A1Report out{detail::zero_symmetric_report(model, "A1-first"),
                 detail::zero_symmetric_report(model, "A1")};
    return out;
  }
  SolveReport first = solve_dp2s(model, a, good, pbar, cfg);
  first.algorithm_id = "A1-first";
  const auto& policy = std::get<SymmetricPolicy>(first.policy);
  const std::vector<int> survivors = detail::positive_rate_states(model, a, policy, good);
  if (survivors.empty()) {
    A1Report out{first, detail::zero_symmetric_report(model, "A1")};
    return out;
  }
  if (survivors.size() == good.size()) {
    SolveReport refined = first;
    refined.algorithm_id = "A1";
    return A1Report{std::move(first), std::move(refined)};
  }
  SolveReport refined = solve_dp2s(model, a, survivors, pbar, cfg);
  refined.algorithm_id = "A1";
  return A1Report{std::move(first), std::move(refined)};
}

// Successively drop the worst-ranked state until the rate starts to decrease;
// keeps the best policy seen.
inline SolveReport algo_a2(const DiscreteChannelModel& model, const EquationCoefficients& a,
                           double pbar, int method, const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  std::vector<int> order = classify_states(model, a).good;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return order_criterion(model.h(x), a, method) < order_criterion(model.h(y), a, method);
  });

  SolveReport best = detail::zero_symmetric_report(model, "A2");
  double prev_rate = 0.0;
  bool first_round = true;
  std::vector<int> S = order;
  while (!S.empty()) {
    SolveReport rep = detail::solve_with_survivors(model, a, S, pbar, cfg);
    if (!first_round && rep.expected_rate < prev_rate) break;
    first_round = false;
    prev_rate = rep.expected_rate;
    if (rep.expected_rate > best.expected_rate) {
      best = rep;
      best.algorithm_id = "A2";
    }
    S.erase(S.begin());
  }
  return best;
}

// Larger of the two ordering criteria.
inline SolveReport algo_a2_best(const DiscreteChannelModel& model,
                                const EquationCoefficients& a, double pbar,
                                const BisectionConfig& cfg = {}) {
  SolveReport r1 = algo_a2(model, a, pbar, 1, cfg);
  SolveReport r2 = algo_a2(model, a, pbar, 2, cfg);
  return r2.expected_rate > r1.expected_rate ? r2 : r1;
}

// Exhaustive search over subsets of the good set. Ties prefer smaller sets,
// then lexicographically earlier ones.
inline SolveReport algo_a3(const DiscreteChannelModel& model, const EquationCoefficients& a,
                           double pbar, const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  if (model.state_count() > 20)
    throw capacity_error("exhaustive search is limited to 20 states; use the ordered heuristic");
  const std::vector<int> good = classify_states(model, a).good;

  SolveReport best = detail::zero_symmetric_report(model, "A3");
  const std::size_t g = good.size();
  std::vector<std::vector<int>> subsets;
  for (std::size_t bits = 1; bits < (std::size_t{1} << g); ++bits) {
    std::vector<int> sub;
    for (std::size_t i = 0; i < g; ++i)
      if (bits & (std::size_t{1} << i)) sub.push_back(good[i]);
    subsets.push_back(std::move(sub));
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });

  for (const auto& sub : subsets) {
    SolveReport rep;
    try {
      rep = solve_dp2s(model, a, sub, pbar, cfg);
    } catch (const solver_error&) {
      continue;
    }
    if (rep.expected_rate > best.expected_rate) {
      best = rep;
      best.algorithm_id = "A3";
    }
  }
  return best;
}

}  // namespace cfpower
