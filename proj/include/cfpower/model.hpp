#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cfpower/errors.hpp"

namespace cfpower {

// Integer coefficient vector of the linear combination the relay decodes.
struct EquationCoefficients {
  std::vector<int> a;
  std::vector<double> ad;  // double copy for dot products
  double norm_sq = 0.0;

  explicit EquationCoefficients(std::vector<int> coeffs) : a(std::move(coeffs)) {
    if (a.size() < 2) throw argument_error("coefficient vector needs at least 2 entries");
    ad.reserve(a.size());
    for (int v : a) {
      ad.push_back(static_cast<double>(v));
      norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    if (norm_sq < 1.0) throw argument_error("coefficient vector must not be all zero");
  }

  std::size_t size() const { return a.size(); }
};

struct ChannelState {
  std::vector<double> h;
  double f = 0.0;
};

// One user's channel gain distribution.
struct Marginal {
  std::vector<double> values;
  std::vector<double> probs;
};

// Joint channel model expanded from independent per-user marginals.
// States are enumerated row-major with the last user's value varying fastest.
class DiscreteChannelModel {
public:
  explicit DiscreteChannelModel(std::vector<Marginal> marginals)
      : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw argument_error("model needs at least one user");
    for (std::size_t u = 0; u < marginals_.size(); ++u) {
      auto& m = marginals_[u];
      const std::string where = "marginal " + std::to_string(u + 1);
      if (m.values.empty() || m.values.size() != m.probs.size())
        throw argument_error(where + ": values/probs must be nonempty and equal length");
      double sum = 0.0;
      for (std::size_t j = 0; j < m.values.size(); ++j) {
        if (m.values[j] < 0.0) throw argument_error(where + ": channel gains must be non-negative");
        if (m.probs[j] <= 0.0 || m.probs[j] > 1.0)
          throw argument_error(where + ": probabilities must lie in (0, 1]");
        sum += m.probs[j];
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw argument_error(where + ": probabilities sum to " + std::to_string(sum) +
                             ", expected 1 within 1e-9");
      for (double& p : m.probs) p /= sum;
    }

    states_.push_back(ChannelState{{}, 1.0});
    for (const auto& m : marginals_) {
      std::vector<ChannelState> expanded;
      expanded.reserve(states_.size() * m.values.size());
      for (const auto& s : states_) {
        for (std::size_t j = 0; j < m.values.size(); ++j) {
          ChannelState next = s;
          next.h.push_back(m.values[j]);
          next.f *= m.probs[j];
          expanded.push_back(std::move(next));
        }
      }
      states_ = std::move(expanded);
    }
    for (const auto& s : states_) {
      double n = 0.0;
      for (double v : s.h) n += v * v;
      if (n <= 0.0) throw argument_error("joint state with all-zero gain; remove zero from some marginal");
    }
  }

  std::size_t users() const { return marginals_.size(); }
  std::size_t state_count() const { return states_.size(); }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const std::vector<ChannelState>& states() const { return states_; }
  std::span<const double> h(std::size_t m) const { return states_[m].h; }
  double f(std::size_t m) const { return states_[m].f; }

private:
  std::vector<Marginal> marginals_;
  std::vector<ChannelState> states_;
};

// One power level per channel state, shared by all users.
struct SymmetricPolicy {
  std::vector<double> P;
};

// Per-user power levels, users x states, row-major.
struct AsymmetricPolicy {
  std::size_t L = 0;
  std::size_t M = 0;
  std::vector<double> P;

  AsymmetricPolicy() = default;
  AsymmetricPolicy(std::size_t users, std::size_t states)
      : L(users), M(states), P(users * states, 0.0) {}

  double& at(std::size_t l, std::size_t m) { return P[l * M + m]; }
  double at(std::size_t l, std::size_t m) const { return P[l * M + m]; }

  double column_norm_sq(std::size_t m) const {
    double n = 0.0;
    for (std::size_t l = 0; l < L; ++l) n += at(l, m) * at(l, m);
    return n;
  }
};

using Policy = std::variant<SymmetricPolicy, AsymmetricPolicy>;

struct SolveReport {
  Policy policy;
  std::vector<int> active_set;  // 0-based state indices, ascending
  double expected_rate = 0.0;
  std::optional<double> multiplier;
  int iterations = 0;
  std::string algorithm_id;
};

}  // namespace cfpower
