#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "cfpower/model.hpp"

namespace cfpower {

namespace detail {

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm_sq(std::span<const double> x) { return dot(x, x); }

inline void check_dims(std::span<const double> h, const EquationCoefficients& a) {
  if (h.size() != a.size()) throw argument_error("channel vector and coefficient vector differ in length");
}

}  // namespace detail

// Cauchy-Schwarz gap between h and a; zero iff the vectors are aligned.
inline double misalignment(std::span<const double> h, const EquationCoefficients& a) {
  detail::check_dims(h, a);
  const double H = detail::norm_sq(h);
  const double t = detail::dot(h, a.ad);
  const double e = H * a.norm_sq - t * t;
  return e > 0.0 ? e : 0.0;
}

// Relative tolerance keeps roundoff from flipping the division-by-epsilon
// branch in the closed-form KKT solution.
inline bool is_collinear(std::span<const double> h, const EquationCoefficients& a) {
  return misalignment(h, a) < 1e-12 * detail::norm_sq(h) * a.norm_sq;
}

inline double asymmetric_rate_unclamped(std::span<const double> h,
                                        const EquationCoefficients& a,
                                        std::span<const double> p) {
  detail::check_dims(h, a);
  if (p.size() != h.size()) throw argument_error("power vector and channel vector differ in length");
  double G = 0.0;   // ||sqrt(p) o h||^2
  double T = 0.0;   // (sqrt(p) o h) . a
  for (std::size_t l = 0; l < h.size(); ++l) {
    if (p[l] < 0.0) throw argument_error("negative power");
    G += p[l] * h[l] * h[l];
    T += std::sqrt(p[l]) * h[l] * a.ad[l];
  }
  double e = G * a.norm_sq - T * T;
  if (e < 0.0) e = 0.0;
  return 0.5 * std::log2((1.0 + G) / (a.norm_sq + e));
}

inline double symmetric_rate_unclamped(std::span<const double> h,
                                       const EquationCoefficients& a, double P) {
  detail::check_dims(h, a);
  if (P < 0.0) throw argument_error("negative power");
  const double H = detail::norm_sq(h);
  const double e = misalignment(h, a);
  return 0.5 * std::log2((1.0 + P * H) / (a.norm_sq + P * e));
}

inline double clamped(double rate) { return rate > 0.0 ? rate : 0.0; }

inline double expected_rate(const DiscreteChannelModel& model, const EquationCoefficients& a,
                            const SymmetricPolicy& policy) {
  if (policy.P.size() != model.state_count())
    throw argument_error("policy length does not match state count");
  double total = 0.0;
  for (std::size_t m = 0; m < model.state_count(); ++m)
    total += model.f(m) * clamped(symmetric_rate_unclamped(model.h(m), a, policy.P[m]));
  return total;
}

inline double expected_rate(const DiscreteChannelModel& model, const EquationCoefficients& a,
                            const AsymmetricPolicy& policy) {
  if (policy.L != model.users() || policy.M != model.state_count())
    throw argument_error("policy shape does not match model");
  double total = 0.0;
  std::vector<double> p(policy.L);
  for (std::size_t m = 0; m < model.state_count(); ++m) {
    for (std::size_t l = 0; l < policy.L; ++l) p[l] = policy.at(l, m);
    total += model.f(m) * clamped(asymmetric_rate_unclamped(model.h(m), a, p));
  }
  return total;
}

inline double expected_rate(const DiscreteChannelModel& model, const EquationCoefficients& a,
                            const Policy& policy) {
  if (std::holds_alternative<SymmetricPolicy>(policy))
    return expected_rate(model, a, std::get<SymmetricPolicy>(policy));
  return expected_rate(model, a, std::get<AsymmetricPolicy>(policy));
}

struct StateClasses {
  std::vector<int> good;
  std::vector<int> bad;
};

// Good states can achieve positive symmetric rate at some power; ties go to bad.
inline StateClasses classify_states(const DiscreteChannelModel& model,
                                    const EquationCoefficients& a) {
  StateClasses out;
  for (std::size_t m = 0; m < model.state_count(); ++m) {
    const double H = detail::norm_sq(model.h(m));
    if (H > misalignment(model.h(m), a))
      out.good.push_back(static_cast<int>(m));
    else
      out.bad.push_back(static_cast<int>(m));
  }
  return out;
}

// Scalar goodness score per state. Method 1 is additive, method 2 is the
// asymptotic ratio, infinite for states aligned with a.
inline double order_criterion(std::span<const double> h, const EquationCoefficients& a,
                              int method) {
  if (method != 1 && method != 2) throw argument_error("ordering method must be 1 or 2");
  const double H = detail::norm_sq(h);
  const double e = misalignment(h, a);
  if (method == 1) return H - e;
  if (is_collinear(h, a)) return std::numeric_limits<double>::infinity();
  return H / e;
}

}  // namespace cfpower
