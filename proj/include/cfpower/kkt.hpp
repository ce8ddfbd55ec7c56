#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfpower/rates.hpp"

namespace cfpower {

// Coefficients of the per-state stationarity quadratic d P^2 + b P + c(lambda) = 0.
struct KktCoefficients {
  double H = 0.0;  // ||h||^2
  double A = 0.0;  // ||a||^2
  double t = 0.0;  // (h.a)^2
  double eps = 0.0;
  double d = 0.0;  // H * eps
  double b = 0.0;  // 2 H A - t, equal to H A + eps

  double c(double lambda) const { return A - t / lambda; }
};

inline KktCoefficients kkt_coefficients(std::span<const double> h,
                                        const EquationCoefficients& a) {
  detail::check_dims(h, a);
  KktCoefficients k;
  k.H = detail::norm_sq(h);
  k.A = a.norm_sq;
  const double ha = detail::dot(h, a.ad);
  k.t = ha * ha;
  k.eps = misalignment(h, a);
  k.d = k.H * k.eps;
  k.b = 2.0 * k.H * k.A - k.t;
  return k;
}

struct BisectionConfig {
  double lambda_lo = 1e-6;
  double lambda_hi = 1e6;
  double power_tol = 1e-3;
  int max_iter = 200;
};

// Unclamped stationary power for multiplier lambda. The aligned branch is the
// classical water-filling level; the caller clamps negatives.
inline double p_kkt(std::span<const double> h, const EquationCoefficients& a, double lambda) {
  if (lambda <= 0.0) throw argument_error("multiplier must be positive");
  const KktCoefficients k = kkt_coefficients(h, a);
  if (k.H <= 0.0) throw argument_error("channel vector must be nonzero");
  if (is_collinear(h, a)) return 1.0 / lambda - 1.0 / k.H;
  const double disc = std::max(k.b * k.b - 4.0 * k.d * k.c(lambda), 0.0);
  return (-k.b + std::sqrt(disc)) / (2.0 * k.d);
}

// Analytic derivative of the symmetric unclamped rate in P.
inline double symmetric_rate_derivative(std::span<const double> h,
                                        const EquationCoefficients& a, double P) {
  const KktCoefficients k = kkt_coefficients(h, a);
  static const double ln2 = std::log(2.0);
  return k.t / (2.0 * ln2 * (k.d * P * P + k.b * P + k.A));
}

namespace detail {

inline std::vector<int> sorted_support(const DiscreteChannelModel& model,
                                       std::span<const int> S) {
  if (S.empty()) throw argument_error("support set is empty");
  std::vector<int> out(S.begin(), S.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.front() < 0 || out.back() >= static_cast<int>(model.state_count()))
    throw argument_error("support set index out of range");
  return out;
}

}  // namespace detail

// Water-filling style bisection on the multiplier for the symmetric reduced
// problem restricted to support S. Stops once 0 <= pbar - q(lambda) <= power_tol.
inline SolveReport solve_dp2s(const DiscreteChannelModel& model, const EquationCoefficients& a,
                              std::span<const int> S, double pbar,
                              const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  const std::vector<int> sup = detail::sorted_support(model, S);

  std::vector<KktCoefficients> ks;
  std::vector<char> aligned;
  ks.reserve(sup.size());
  aligned.reserve(sup.size());
  for (int m : sup) {
    ks.push_back(kkt_coefficients(model.h(m), a));
    aligned.push_back(is_collinear(model.h(m), a) || ks.back().d == 0.0);
  }

  auto q = [&](double lambda) {
    double total = 0.0;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      double p;
      if (aligned[i]) {
        p = 1.0 / lambda - 1.0 / ks[i].H;
      } else {
        const double disc = std::max(ks[i].b * ks[i].b - 4.0 * ks[i].d * ks[i].c(lambda), 0.0);
        p = (-ks[i].b + std::sqrt(disc)) / (2.0 * ks[i].d);
      }
      if (p > 0.0) total += model.f(sup[i]) * p;
    }
    return total;
  };

  double lo = cfg.lambda_lo;
  double hi = cfg.lambda_hi;
  while (q(lo) <= pbar && lo > 1e-12) lo *= 0.1;
  if (q(lo) <= pbar)
    throw solver_error("bisection bracket failure: q(lambda_lo) below budget", lo, hi, 0);
  int widen = 0;
  while (q(hi) > pbar && widen < 6) {
    hi *= 10.0;
    ++widen;
  }
  if (q(hi) > pbar)
    throw solver_error("bisection bracket failure: q(lambda_hi) above budget", lo, hi, 0);

  double lambda = 0.5 * (lo + hi);
  int it = 0;
  double used = q(lambda);
  while (pbar - used > cfg.power_tol || pbar - used < 0.0) {
    if (pbar - used > 0.0)
      hi = lambda;
    else
      lo = lambda;
    lambda = 0.5 * (lo + hi);
    used = q(lambda);
    if (++it > cfg.max_iter)
      throw solver_error("bisection exceeded max iterations", lo, hi, it);
  }

  SolveReport report;
  SymmetricPolicy policy;
  policy.P.assign(model.state_count(), 0.0);
  for (std::size_t i = 0; i < sup.size(); ++i) {
    const double p = p_kkt(model.h(sup[i]), a, lambda);
    if (p > 0.0) policy.P[sup[i]] = p;
  }
  for (std::size_t m = 0; m < policy.P.size(); ++m)
    if (policy.P[m] > 0.0) report.active_set.push_back(static_cast<int>(m));
  report.expected_rate = expected_rate(model, a, policy);
  report.policy = std::move(policy);
  report.multiplier = lambda;
  report.iterations = it;
  report.algorithm_id = "DP2s";
  return report;
}

// Budget threshold beyond which the optimal symmetric active set equals the
// good set. Each good state contributes the multiplier at which its rate
// curve crosses the ray through the origin with the tangent slope.
inline double threshold_pbar(const DiscreteChannelModel& model, const EquationCoefficients& a) {
  const StateClasses cls = classify_states(model, a);
  if (cls.good.empty()) throw argument_error("threshold undefined: good set is empty");
  static const double ln2 = std::log(2.0);

  double lambda_o = std::numeric_limits<double>::infinity();
  for (int m : cls.good) {
    const KktCoefficients k = kkt_coefficients(model.h(m), a);
    auto ell = [&](double x) {
      const double rate = 0.5 * std::log2((1.0 + x * k.H) / (k.A + x * k.eps));
      const double deriv = k.t / (2.0 * ln2 * (k.d * x * x + k.b * x + k.A));
      return rate - deriv * x;
    };
    double lo = 0.0;
    double hi = 1e8;
    if (ell(hi) <= 0.0)
      throw solver_error("tangent-point search found no sign change for a good state", lo, hi, 0);
    double xm = 0.0;
    if (ell(lo) < 0.0) {
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ell(mid) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      xm = 0.5 * (lo + hi);
    }
    const double lambda_m = k.t / (k.d * xm * xm + k.b * xm + k.A);
    lambda_o = std::min(lambda_o, lambda_m);
  }

  double total = 0.0;
  for (int m : cls.good) total += model.f(m) * clamped(p_kkt(model.h(m), a, lambda_o));
  return total;
}

}  // namespace cfpower
