#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "cfpower/kkt.hpp"

namespace cfpower {

using DensityFn = std::function<double(std::span<const double>)>;
using DomainPredicate = std::function<bool(std::span<const double>)>;

namespace detail {

// Fixed-order pairwise reduction so quadrature results do not depend on any
// evaluation or thread schedule.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

}  // namespace detail

// Channel-vector density truncated to a box, sampled on a tensor trapezoid
// grid. Node weights already include the density value.
class ContinuousChannelModel {
public:
  ContinuousChannelModel(DensityFn pdf, std::vector<std::array<double, 2>> box,
                         int nodes_per_dim,
                         std::optional<double> reference_mass = std::nullopt)
      : dims_(box.size()), nodes_per_dim_(nodes_per_dim) {
    if (box.empty()) throw argument_error("support box must have at least one dimension");
    if (nodes_per_dim < 16) throw argument_error("need at least 16 quadrature nodes per dimension");
    for (const auto& [lo, hi] : box) {
      if (lo < 0.0 || hi <= lo)
        throw argument_error("support box bounds must satisfy 0 <= lo < hi");
    }

    std::vector<std::vector<double>> axes(dims_);
    std::vector<std::vector<double>> wts(dims_);
    for (std::size_t d = 0; d < dims_; ++d) {
      const double lo = box[d][0];
      const double hi = box[d][1];
      const double dx = (hi - lo) / (nodes_per_dim - 1);
      axes[d].resize(nodes_per_dim);
      wts[d].assign(nodes_per_dim, dx);
      for (int i = 0; i < nodes_per_dim; ++i) axes[d][i] = lo + dx * i;
      wts[d].front() *= 0.5;
      wts[d].back() *= 0.5;
    }

    std::size_t count = 1;
    for (std::size_t d = 0; d < dims_; ++d) count *= static_cast<std::size_t>(nodes_per_dim);
    h_.resize(count * dims_);
    weight_.resize(count);

    std::vector<int> ix(dims_, 0);
    std::vector<double> point(dims_);
    for (std::size_t k = 0; k < count; ++k) {
      double w = 1.0;
      for (std::size_t d = 0; d < dims_; ++d) {
        point[d] = axes[d][ix[d]];
        w *= wts[d][ix[d]];
      }
      for (std::size_t d = 0; d < dims_; ++d) h_[k * dims_ + d] = point[d];
      weight_[k] = w * pdf(point);
      for (std::size_t d = dims_; d-- > 0;) {
        if (++ix[d] < nodes_per_dim) break;
        ix[d] = 0;
      }
    }
    mass_ = detail::pairwise_sum(weight_);
    if (reference_mass && mass_ < 0.999 * *reference_mass)
      throw argument_error("quadrature captures less than 99.9% of the reference mass");
  }

  std::size_t dims() const { return dims_; }
  std::size_t nodes() const { return weight_.size(); }
  int nodes_per_dim() const { return nodes_per_dim_; }
  std::span<const double> node(std::size_t k) const {
    return {h_.data() + k * dims_, dims_};
  }
  double weight(std::size_t k) const { return weight_[k]; }
  double mass() const { return mass_; }

private:
  std::size_t dims_;
  int nodes_per_dim_;
  std::vector<double> h_;       // nodes x dims, row-major
  std::vector<double> weight_;  // pdf * trapezoid weight per node
  double mass_ = 0.0;
};

// Two-user Rayleigh-style gain density on the non-negative orthant.
inline ContinuousChannelModel gaussian_model(int nodes_per_dim = 128) {
  const double analytic_mass = std::erf(5.0 / std::sqrt(2.0)) * std::erf(5.0 / std::sqrt(2.0));
  DensityFn pdf = [](std::span<const double> h) {
    return (2.0 / 3.14159265358979323846) * std::exp(-0.5 * (h[0] * h[0] + h[1] * h[1]));
  };
  return ContinuousChannelModel(std::move(pdf), {{{0.0, 5.0}}, {{0.0, 5.0}}}, nodes_per_dim,
                                analytic_mass);
}

// Clamped stationary power at multiplier mu; identical algebra to the
// discrete closed form.
inline double p_continuous(std::span<const double> h, const EquationCoefficients& a, double mu) {
  if (mu <= 0.0) throw argument_error("multiplier must be positive");
  return clamped(p_kkt(h, a, mu));
}

// Domain of states whose ordering score strictly exceeds the shaping level,
// restricted to the good region. Strict comparisons keep boundary handling
// deterministic; the boundary itself has zero quadrature mass.
inline DomainPredicate shape_domain(const ContinuousChannelModel&, const EquationCoefficients& a,
                                    double c_t, int ordering) {
  if (ordering != 1 && ordering != 2) throw argument_error("ordering method must be 1 or 2");
  return [a, c_t, ordering](std::span<const double> h) {
    const double H = detail::norm_sq(h);
    if (!(H > misalignment(h, a))) return false;
    return order_criterion(h, a, ordering) > c_t;
  };
}

inline double expected_power(const ContinuousChannelModel& model, const EquationCoefficients& a,
                             const DomainPredicate& domain, double mu) {
  if (mu <= 0.0) throw argument_error("multiplier must be positive");
  std::vector<double> terms(model.nodes(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k) {
    const auto h = model.node(k);
    if (detail::norm_sq(h) <= 0.0) continue;
    if (!domain(h)) continue;
    terms[k] = p_continuous(h, a, mu) * model.weight(k);
  }
  return detail::pairwise_sum(terms);
}

struct ContinuousSolve {
  double mu = 0.0;
  double expected_rate = 0.0;
  double budget_used = 0.0;
  int iterations = 0;
};

namespace detail {

struct NodeCache {
  std::vector<char> inside;
  std::vector<KktCoefficients> k;
  std::vector<char> aligned;
  double domain_mass = 0.0;
};

inline NodeCache build_node_cache(const ContinuousChannelModel& model,
                                  const EquationCoefficients& a,
                                  const DomainPredicate& domain) {
  NodeCache c;
  c.inside.assign(model.nodes(), 0);
  c.k.resize(model.nodes());
  c.aligned.assign(model.nodes(), 0);
  std::vector<double> mass_terms(model.nodes(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k) {
    const auto h = model.node(k);
    if (norm_sq(h) <= 0.0) continue;
    if (!domain(h)) continue;
    c.inside[k] = 1;
    c.k[k] = kkt_coefficients(h, a);
    c.aligned[k] = is_collinear(h, a) || c.k[k].d == 0.0;
    mass_terms[k] = model.weight(k);
  }
  c.domain_mass = pairwise_sum(mass_terms);
  return c;
}

inline double cached_power(const NodeCache& c, std::size_t k, double mu) {
  const KktCoefficients& kc = c.k[k];
  double p;
  if (c.aligned[k]) {
    p = 1.0 / mu - 1.0 / kc.H;
  } else {
    const double disc = std::max(kc.b * kc.b - 4.0 * kc.d * kc.c(mu), 0.0);
    p = (-kc.b + std::sqrt(disc)) / (2.0 * kc.d);
  }
  return p > 0.0 ? p : 0.0;
}

inline double cached_budget(const ContinuousChannelModel& model, const NodeCache& c, double mu,
                            std::vector<double>& terms) {
  std::fill(terms.begin(), terms.end(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k)
    if (c.inside[k]) terms[k] = cached_power(c, k, mu) * model.weight(k);
  return pairwise_sum(terms);
}

// Clamped rate of the policy "stationary power inside the domain, zero
// outside", integrated over the full support.
inline double cached_rate(const ContinuousChannelModel& model, const NodeCache& c, double mu,
                          double A, std::vector<double>& terms) {
  std::fill(terms.begin(), terms.end(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k) {
    if (!c.inside[k]) continue;
    const double p = cached_power(c, k, mu);
    if (p <= 0.0) continue;
    const double rate =
        0.5 * std::log2((1.0 + p * c.k[k].H) / (A + p * c.k[k].eps));
    if (rate > 0.0) terms[k] = rate * model.weight(k);
  }
  return pairwise_sum(terms);
}

}  // namespace detail

// Multiplier bisection for the continuous symmetric problem on a domain.
inline ContinuousSolve solve_cp2(const ContinuousChannelModel& model,
                                 const EquationCoefficients& a, const DomainPredicate& domain,
                                 double pbar, const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  const detail::NodeCache cache = detail::build_node_cache(model, a, domain);
  if (cache.domain_mass <= 0.0) throw argument_error("domain has zero probability mass");

  std::vector<double> terms(model.nodes(), 0.0);
  auto q = [&](double mu) { return detail::cached_budget(model, cache, mu, terms); };

  double lo = cfg.lambda_lo;
  double hi = cfg.lambda_hi;
  while (q(lo) <= pbar && lo > 1e-12) lo *= 0.1;
  if (q(lo) <= pbar)
    throw solver_error("bisection bracket failure: q(mu_lo) below budget", lo, hi, 0);
  int widen = 0;
  while (q(hi) > pbar && widen < 6) {
    hi *= 10.0;
    ++widen;
  }
  if (q(hi) > pbar)
    throw solver_error("bisection bracket failure: q(mu_hi) above budget", lo, hi, 0);

  double mu = 0.5 * (lo + hi);
  double used = q(mu);
  int it = 0;
  while (pbar - used > cfg.power_tol || pbar - used < 0.0) {
    if (pbar - used > 0.0)
      hi = mu;
    else
      lo = mu;
    mu = 0.5 * (lo + hi);
    used = q(mu);
    if (++it > cfg.max_iter)
      throw solver_error("bisection exceeded max iterations", lo, hi, it);
  }

  ContinuousSolve out;
  out.mu = mu;
  out.budget_used = used;
  out.iterations = it;
  out.expected_rate = detail::cached_rate(model, cache, mu, a.norm_sq, terms);
  return out;
}

struct ShapingConfig {
  double c_t = 0.0;
  double step = 0.1;
  double rate_tol = 1e-3;
  int ordering = 1;
};

// Constant power on the good domain.
inline double algo_a0_continuous(const ContinuousChannelModel& model,
                                 const EquationCoefficients& a, double pbar) {
  if (pbar < 0.0) throw argument_error("power budget must be non-negative");
  const DomainPredicate good = shape_domain(model, a, 0.0, 1);
  std::vector<double> terms(model.nodes(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k) {
    const auto h = model.node(k);
    if (detail::norm_sq(h) <= 0.0 || !good(h)) continue;
    const double rate = symmetric_rate_unclamped(h, a, pbar);
    if (rate > 0.0) terms[k] = rate * model.weight(k);
  }
  return detail::pairwise_sum(terms);
}

struct IterativeContinuousReport {
  double best_mu = 0.0;
  double best_c_t = 0.0;
  double best_rate = 0.0;
  double first_mu = 0.0;  // multiplier of the first solve, at the configured shaping level
  double first_rate = 0.0;
  double constant_rate = 0.0;
  int ordering = 1;
  int solves = 0;
};

// Raise the shaping level step by step, re-solving on the shrinking domain,
// until the rate improvement falls below tolerance or the domain empties.
// Returns the best iterate seen; the first iterate and the constant-power
// baseline ride along for comparison.
inline IterativeContinuousReport algo_iterative_continuous(const ContinuousChannelModel& model,
                                                           const EquationCoefficients& a,
                                                           double pbar,
                                                           const ShapingConfig& shaping = {},
                                                           const BisectionConfig& cfg = {}) {
  if (pbar <= 0.0) throw argument_error("power budget must be positive");
  if (shaping.step <= 0.0) throw argument_error("shaping step must be positive");

  IterativeContinuousReport out;
  out.ordering = shaping.ordering;
  out.constant_rate = algo_a0_continuous(model, a, pbar);

  double c_t = shaping.c_t;
  ContinuousSolve cur = solve_cp2(model, a, shape_domain(model, a, c_t, shaping.ordering), pbar, cfg);
  out.first_mu = cur.mu;
  out.first_rate = cur.expected_rate;
  out.best_mu = cur.mu;
  out.best_c_t = c_t;
  out.best_rate = cur.expected_rate;
  out.solves = 1;

  double prev_rate = cur.expected_rate;
  while (true) {
    c_t += shaping.step;
    ContinuousSolve next;
    try {
      next = solve_cp2(model, a, shape_domain(model, a, c_t, shaping.ordering), pbar, cfg);
    } catch (const argument_error&) {
      break;  // domain emptied
    }
    ++out.solves;
    if (next.expected_rate > out.best_rate) {
      out.best_rate = next.expected_rate;
      out.best_mu = next.mu;
      out.best_c_t = c_t;
    }
    if (next.expected_rate - prev_rate <= shaping.rate_tol) break;
    prev_rate = next.expected_rate;
  }
  return out;
}

}  // namespace cfpower
