#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "cfpower/kkt.hpp"
#include "cfpower/rng.hpp"
#include "cfpower/symmetric.hpp"

namespace cfpower {

struct NlpConfig {
  int starts = 8;
  double step_init = 0.1;
  double grad_tol = 1e-7;
  int max_iter = 5000;
  std::uint64_t seed = 1234;
};

// All multi-start runs failed to reach stationarity; carries the best iterate.
class nlp_error : public solver_error {
public:
  nlp_error(const std::string& what, AsymmetricPolicy best, double value, int iters)
      : solver_error(what, 0.0, 0.0, iters), best_iterate(std::move(best)), best_value(value) {}

  AsymmetricPolicy best_iterate;
  double best_value;
};

struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;  // users x states, row-major, zero outside S
};

// Smooth (unclamped) per-user-power objective and its analytic gradient.
// At a zero power the one-sided derivative is returned, which is infinite
// whenever the cross term T * h_l * a_l is nonzero.
inline ValueGrad dp2_objective_grad(const DiscreteChannelModel& model,
                                    const EquationCoefficients& a,
                                    std::span<const int> S, const AsymmetricPolicy& P) {
  if (P.L != model.users() || P.M != model.state_count())
    throw argument_error("policy shape does not match model");
  static const double ln2 = std::log(2.0);
  const double A = a.norm_sq;
  ValueGrad out;
  out.grad.assign(P.L * P.M, 0.0);

  for (int m : S) {
    const auto h = model.h(m);
    double N = 1.0;  // 1 + ||sqrt(p) o h||^2
    double T = 0.0;  // (sqrt(p) o h) . a
    for (std::size_t l = 0; l < P.L; ++l) {
      const double p = P.at(l, m);
      if (p < 0.0) throw argument_error("negative power");
      N += p * h[l] * h[l];
      T += std::sqrt(p) * h[l] * a.ad[l];
    }
    const double D = A + (N - 1.0) * A - T * T;  // >= A > 0 by Cauchy-Schwarz
    out.value += model.f(m) * 0.5 * std::log2(N / D);

    const double scale = model.f(m) / (2.0 * ln2);
    for (std::size_t l = 0; l < P.L; ++l) {
      const double p = P.at(l, m);
      const double hl2 = h[l] * h[l];
      double dD;
      if (p > 0.0) {
        dD = A * hl2 - T * h[l] * a.ad[l] / std::sqrt(p);
      } else {
        const double cross = T * h[l] * a.ad[l];
        if (cross > 0.0) {
          out.grad[l * P.M + m] = std::numeric_limits<double>::infinity();
          continue;
        }
        if (cross < 0.0) {
          out.grad[l * P.M + m] = -std::numeric_limits<double>::infinity();
          continue;
        }
        dD = A * hl2 - hl2 * a.ad[l] * a.ad[l];
      }
      out.grad[l * P.M + m] = scale * (hl2 / N - dD / D);
    }
  }
  return out;
}

// Exact Euclidean projection of x onto {y >= 0, f.y <= budget}, in place.
inline void project_budget(std::span<double> x, std::span<const double> f, double budget) {
  if (x.size() != f.size()) throw argument_error("projection size mismatch");
  double used = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) used += f[i] * std::max(x[i], 0.0);
  if (used <= budget) {
    for (double& v : x) v = std::max(v, 0.0);
    return;
  }
  // Active coordinates satisfy x_i - theta f_i > 0; scan ratios descending.
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t i, std::size_t j) { return x[i] / f[i] > x[j] / f[j]; });
  double num = 0.0;
  double den = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    num += f[i] * x[i];
    den += f[i] * f[i];
    const double cand = (num - budget) / den;
    const double next_ratio = (k + 1 < idx.size())
                                  ? x[idx[k + 1]] / f[idx[k + 1]]
                                  : -std::numeric_limits<double>::infinity();
    if (cand >= next_ratio) {
      theta = cand;
      break;
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(x[i] - theta * f[i], 0.0);
}

namespace detail {

struct PgaResult {
  AsymmetricPolicy P;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

constexpr double kGradFloor = 1e-12;

inline double smooth_value(const DiscreteChannelModel& model, const EquationCoefficients& a,
                           std::span<const int> S, const AsymmetricPolicy& P) {
  double value = 0.0;
  const double A = a.norm_sq;
  for (int m : S) {
    const auto h = model.h(m);
    double N = 1.0;
    double T = 0.0;
    for (std::size_t l = 0; l < P.L; ++l) {
      const double p = P.at(l, m);
      N += p * h[l] * h[l];
      T += std::sqrt(p) * h[l] * a.ad[l];
    }
    const double D = A + (N - 1.0) * A - T * T;
    value += model.f(m) * 0.5 * std::log2(N / D);
  }
  return value;
}

// Projected gradient ascent with backtracking line search. Gradients are
// evaluated at powers floored away from zero so the square-root singularity
// never produces infinities inside the iteration.
inline PgaResult projected_gradient_ascent(const DiscreteChannelModel& model,
                                           const EquationCoefficients& a,
                                           std::span<const int> S, double pbar,
                                           AsymmetricPolicy start, const NlpConfig& cfg) {
  PgaResult res;
  res.P = std::move(start);
  const std::size_t L = res.P.L;
  std::vector<double> fS;
  for (int m : S) fS.push_back(model.f(m));

  auto project_rows = [&](AsymmetricPolicy& P) {
    std::vector<double> row(S.size());
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t i = 0; i < S.size(); ++i) row[i] = P.at(l, S[i]);
      project_budget(row, fS, pbar);
      for (std::size_t i = 0; i < S.size(); ++i) P.at(l, S[i]) = row[i];
    }
  };
  project_rows(res.P);

  double value = smooth_value(model, a, S, res.P);
  double step = cfg.step_init;

  AsymmetricPolicy floored = res.P;
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it + 1;
    floored = res.P;
    for (int m : S)
      for (std::size_t l = 0; l < L; ++l)
        if (floored.at(l, m) < kGradFloor) floored.at(l, m) = kGradFloor;
    const ValueGrad vg = dp2_objective_grad(model, a, S, floored);

    AsymmetricPolicy probe = res.P;
    for (int m : S)
      for (std::size_t l = 0; l < L; ++l) probe.at(l, m) += vg.grad[l * probe.M + m];
    project_rows(probe);
    double stat = 0.0;
    for (int m : S)
      for (std::size_t l = 0; l < L; ++l) {
        const double d = probe.at(l, m) - res.P.at(l, m);
        stat += d * d;
      }
    if (std::sqrt(stat) <= cfg.grad_tol) {
      res.converged = true;
      break;
    }

    double t = step;
    bool accepted = false;
    while (t > 1e-18) {
      AsymmetricPolicy trial = res.P;
      for (int m : S)
        for (std::size_t l = 0; l < L; ++l) trial.at(l, m) += t * vg.grad[l * trial.M + m];
      project_rows(trial);
      const double trial_value = smooth_value(model, a, S, trial);
      double move_sq = 0.0;
      for (int m : S)
        for (std::size_t l = 0; l < L; ++l) {
          const double d = trial.at(l, m) - res.P.at(l, m);
          move_sq += d * d;
        }
      if (trial_value >= value + (1e-4 / t) * move_sq) {
        res.P = std::move(trial);
        value = trial_value;
        step = std::min(t * 2.0, 1e3);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Step length underflow: no ascent direction left at this point.
      res.converged = true;
      break;
    }
  }
  res.value = value;
  return res;
}

}  // namespace detail

// Multi-start projected gradient ascent for the per-user-power problem on
// support S. One start is the symmetric water-filling solution, the rest are
// random feasible points; the best stationary point wins. The reported rate
// is the clamped evaluation on the full model.
inline SolveReport solve_dp2(const DiscreteChannelModel& model, const EquationCoefficients& a,
                             std::span<const int> S, double pbar, const NlpConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  if (cfg.starts < 1) throw argument_error("multi-start count must be at least 1");
  const std::vector<int> sup = detail::sorted_support(model, S);
  const std::size_t L = model.users();
  const std::size_t M = model.state_count();

  AsymmetricPolicy warm(L, M);
  try {
    SolveReport sym = solve_dp2s(model, a, sup, pbar);
    const auto& sp = std::get<SymmetricPolicy>(sym.policy);
    for (int m : sup)
      for (std::size_t l = 0; l < L; ++l) warm.at(l, m) = sp.P[m];
  } catch (const solver_error&) {
    for (int m : sup)
      for (std::size_t l = 0; l < L; ++l) warm.at(l, m) = pbar;
  }

  std::mt19937_64 eng(cfg.seed);
  std::vector<double> weights(sup.size());

  detail::PgaResult best;
  best.value = -std::numeric_limits<double>::infinity();
  bool any_converged = false;
  int total_iters = 0;

  for (int s = 0; s < cfg.starts; ++s) {
    AsymmetricPolicy start(L, M);
    if (s == 0) {
      start = warm;
    } else {
      for (std::size_t l = 0; l < L; ++l) {
        dirichlet_flat(eng, weights);
        for (std::size_t i = 0; i < sup.size(); ++i)
          start.at(l, sup[i]) = pbar * weights[i] / model.f(sup[i]);
      }
    }
    detail::PgaResult run =
        detail::projected_gradient_ascent(model, a, sup, pbar, std::move(start), cfg);
    total_iters += run.iterations;
    any_converged = any_converged || run.converged;
    if (run.value > best.value) best = std::move(run);
  }

  if (!any_converged)
    throw nlp_error("no multi-start run reached stationarity", best.P, best.value, total_iters);

  SolveReport report;
  report.expected_rate = expected_rate(model, a, best.P);
  for (std::size_t m = 0; m < M; ++m)
    if (best.P.column_norm_sq(m) > 0.0) report.active_set.push_back(static_cast<int>(m));
  report.policy = std::move(best.P);
  report.iterations = total_iters;
  report.algorithm_id = "DP2";
  return report;
}

namespace detail {

inline std::vector<int> positive_rate_states_asym(const DiscreteChannelModel& model,
                                                  const EquationCoefficients& a,
                                                  const AsymmetricPolicy& P,
                                                  std::span<const int> S) {
  std::vector<int> kept;
  std::vector<double> p(P.L);
  for (int m : S) {
    for (std::size_t l = 0; l < P.L; ++l) p[l] = P.at(l, m);
    if (asymmetric_rate_unclamped(model.h(m), a, p) > 0.0) kept.push_back(m);
  }
  return kept;
}

inline SolveReport zero_asym_report(const DiscreteChannelModel& model, const std::string& id) {
  SolveReport r;
  r.policy = AsymmetricPolicy(model.users(), model.state_count());
  r.expected_rate = 0.0;
  r.algorithm_id = id;
  return r;
}

inline SolveReport solve_with_survivors_asym(const DiscreteChannelModel& model,
                                             const EquationCoefficients& a,
                                             std::span<const int> S, double pbar,
                                             const NlpConfig& cfg) {
  SolveReport rep = solve_dp2(model, a, S, pbar, cfg);
  const auto& P = std::get<AsymmetricPolicy>(rep.policy);
  std::vector<double> p(P.L);
  bool wasted = false;
  for (int m : S) {
    if (P.column_norm_sq(m) <= 0.0) continue;
    for (std::size_t l = 0; l < P.L; ++l) p[l] = P.at(l, m);
    if (asymmetric_rate_unclamped(model.h(m), a, p) <= 0.0) {
      wasted = true;
      break;
    }
  }
  if (!wasted) return rep;
  const std::vector<int> kept = positive_rate_states_asym(model, a, P, S);
  if (kept.empty()) return zero_asym_report(model, rep.algorithm_id);
  return solve_dp2(model, a, kept, pbar, cfg);
}

}  // namespace detail

// Starts from every state: per-user powers can rescue states the symmetric
// policy must skip.
inline A1Report algo_a1_asym(const DiscreteChannelModel& model, const EquationCoefficients& a,
                             double pbar, const NlpConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  std::vector<int> all(model.state_count());
  std::iota(all.begin(), all.end(), 0);
  SolveReport first = solve_dp2(model, a, all, pbar, cfg);
  first.algorithm_id = "A1-first";
  const auto& P = std::get<AsymmetricPolicy>(first.policy);
  const std::vector<int> survivors = detail::positive_rate_states_asym(model, a, P, all);
  if (survivors.empty()) return A1Report{first, detail::zero_asym_report(model, "A1")};
  if (survivors.size() == all.size()) {
    SolveReport refined = first;
    refined.algorithm_id = "A1";
    return A1Report{std::move(first), std::move(refined)};
  }
  SolveReport refined = solve_dp2(model, a, survivors, pbar, cfg);
  refined.algorithm_id = "A1";
  return A1Report{std::move(first), std::move(refined)};
}

inline SolveReport algo_a2_asym(const DiscreteChannelModel& model, const EquationCoefficients& a,
                                double pbar, int method, const NlpConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  std::vector<int> order(model.state_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return order_criterion(model.h(x), a, method) < order_criterion(model.h(y), a, method);
  });

  SolveReport best = detail::zero_asym_report(model, "A2");
  double prev_rate = 0.0;
  bool first_round = true;
  std::vector<int> S = order;
  while (!S.empty()) {
    SolveReport rep = detail::solve_with_survivors_asym(model, a, S, pbar, cfg);
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

inline SolveReport algo_a2_asym_best(const DiscreteChannelModel& model,
                                     const EquationCoefficients& a, double pbar,
                                     const NlpConfig& cfg = {}) {
  SolveReport r1 = algo_a2_asym(model, a, pbar, 1, cfg);
  SolveReport r2 = algo_a2_asym(model, a, pbar, 2, cfg);
  return r2.expected_rate > r1.expected_rate ? r2 : r1;
}

// Exhaustive subset search with the numerical inner solver. The result is the
// best local optimum found, not a certified global optimum.
inline SolveReport algo_a3_asym(const DiscreteChannelModel& model, const EquationCoefficients& a,
                                double pbar, const NlpConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  const std::size_t M = model.state_count();
  if (M > 12)
    throw capacity_error("exhaustive per-user search is limited to 12 states; use the ordered heuristic");

  std::vector<std::vector<int>> subsets;
  for (std::size_t bits = 1; bits < (std::size_t{1} << M); ++bits) {
    std::vector<int> sub;
    for (std::size_t i = 0; i < M; ++i)
      if (bits & (std::size_t{1} << i)) sub.push_back(static_cast<int>(i));
    subsets.push_back(std::move(sub));
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });

  SolveReport best = detail::zero_asym_report(model, "A3");
  for (const auto& sub : subsets) {
    SolveReport rep;
    try {
      rep = solve_dp2(model, a, sub, pbar, cfg);
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
