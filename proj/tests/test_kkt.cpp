#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cfpower/kkt.hpp"
#include "cfpower/presets.hpp"
#include "cfpower/rng.hpp"
#include "cfpower/symmetric.hpp"

using namespace cfpower;

namespace {

const EquationCoefficients a11({1, 1});

DiscreteChannelModel single_state() {
  // One joint state h = (1,1), collinear with a = (1,1).
  return DiscreteChannelModel({Marginal{{1.0}, {1.0}}, Marginal{{1.0}, {1.0}}});
}

}  // namespace

TEST_CASE("kkt coefficient identities") {
  const KktCoefficients k = kkt_coefficients(std::vector<double>{1, 0.5}, a11);
  CHECK(k.H == Catch::Approx(1.25).margin(1e-12));
  CHECK(k.A == Catch::Approx(2.0).margin(1e-12));
  CHECK(k.t == Catch::Approx(2.25).margin(1e-12));
  CHECK(k.eps == Catch::Approx(0.25).margin(1e-12));
  CHECK(k.d == Catch::Approx(0.3125).margin(1e-12));
  CHECK(k.b == Catch::Approx(2.75).margin(1e-12));
  CHECK(k.c(0.5) == Catch::Approx(-2.5).margin(1e-12));
  CHECK(k.b == Catch::Approx(k.H * k.A + k.eps).margin(1e-12));
}

TEST_CASE("stationary power hand values") {
  CHECK(p_kkt(std::vector<double>{1, 1}, a11, 0.5) == Catch::Approx(1.5).margin(1e-12));
  CHECK(p_kkt(std::vector<double>{1, 0.5}, a11, 0.5) == Catch::Approx(0.8307).margin(1e-4));
  CHECK(p_kkt(std::vector<double>{1, 0.5}, a11, 10.0) < 0.0);
  CHECK_THROWS_AS(p_kkt(std::vector<double>{1, 1}, a11, 0.0), argument_error);
  CHECK_THROWS_AS(p_kkt(std::vector<double>{1, 1}, a11, -1.0), argument_error);
}

TEST_CASE("stationary power is strictly decreasing in the multiplier") {
  std::mt19937_64 eng(23);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> h{0.05 + 3.95 * uniform01(eng), 0.05 + 3.95 * uniform01(eng)};
    const EquationCoefficients a({1 + static_cast<int>(eng() & 1),
                                  1 + static_cast<int>(eng() & 1)});
    double lambda = 1e-3 * std::pow(10.0, 5.0 * uniform01(eng));
    double prev = p_kkt(h, a, lambda);
    for (int j = 0; j < 8; ++j) {
      lambda *= 1.5;
      const double cur = p_kkt(h, a, lambda);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("analytic rate derivative matches finite differences") {
  std::mt19937_64 eng(29);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> h{0.1 + 3.0 * uniform01(eng), 0.1 + 3.0 * uniform01(eng)};
    const double P = 0.2 + 4.0 * uniform01(eng);
    const double step = 1e-6;
    const double fd = (symmetric_rate_unclamped(h, a11, P + step) -
                       symmetric_rate_unclamped(h, a11, P - step)) /
                      (2.0 * step);
    const double an = symmetric_rate_derivative(h, a11, P);
    CHECK(std::abs(an - fd) <= 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("water-filling bisection on a single collinear state") {
  const DiscreteChannelModel model = single_state();
  const std::vector<int> support{0};
  const SolveReport rep = solve_dp2s(model, a11, support, 1.5);
  const auto& policy = std::get<SymmetricPolicy>(rep.policy);
  CHECK(policy.P[0] == Catch::Approx(1.5).margin(2e-3));
  REQUIRE(rep.multiplier.has_value());
  CHECK(*rep.multiplier == Catch::Approx(0.5).margin(5e-4));
  CHECK(rep.expected_rate == Catch::Approx(0.5).margin(1e-3));
  CHECK(rep.active_set == std::vector<int>{0});
}

TEST_CASE("bisection meets the budget from below") {
  const DiscreteChannelModel ex1 = presets::example1();
  const std::vector<int> good = classify_states(ex1, a11).good;
  for (double pbar : {0.3, 1.0, 3.0, 7.5}) {
    const SolveReport rep = solve_dp2s(ex1, a11, good, pbar);
    const auto& policy = std::get<SymmetricPolicy>(rep.policy);
    double used = 0.0;
    for (std::size_t m = 0; m < ex1.state_count(); ++m) used += ex1.f(m) * policy.P[m];
    CHECK(pbar - used >= 0.0);
    CHECK(pbar - used <= 1e-3);
    CHECK(rep.expected_rate ==
          Catch::Approx(expected_rate(ex1, a11, rep.policy)).margin(1e-9));
  }
}

TEST_CASE("bisection at a budget above the threshold matches the exhaustive search") {
  const DiscreteChannelModel ex1 = presets::example1();
  const std::vector<int> good = classify_states(ex1, a11).good;
  const SolveReport direct = solve_dp2s(ex1, a11, good, 2.5);
  const SolveReport best = algo_a3(ex1, a11, 2.5);
  CHECK(direct.expected_rate == Catch::Approx(best.expected_rate).margin(1e-6));
}

TEST_CASE("bisection rejects bad support arguments") {
  const DiscreteChannelModel ex1 = presets::example1();
  CHECK_THROWS_AS(solve_dp2s(ex1, a11, std::vector<int>{}, 1.0), argument_error);
  CHECK_THROWS_AS(solve_dp2s(ex1, a11, std::vector<int>{4}, 1.0), argument_error);
  CHECK_THROWS_AS(solve_dp2s(ex1, a11, std::vector<int>{0}, 0.0), argument_error);
  BisectionConfig tight;
  tight.max_iter = 1;
  CHECK_THROWS_AS(solve_dp2s(ex1, a11, std::vector<int>{0, 1, 2, 3}, 1.0, tight), solver_error);
}

TEST_CASE("all-good budget thresholds of the built-in examples") {
  CHECK(threshold_pbar(presets::example1(), a11) == Catch::Approx(2.089209).margin(1e-4));
  CHECK(threshold_pbar(presets::example2(), a11) == Catch::Approx(5.018869).margin(1e-4));
  CHECK(threshold_pbar(presets::example3(), a11) == Catch::Approx(13.054428).margin(1e-4));
  CHECK(threshold_pbar(presets::example1(), a11) == Catch::Approx(2.09).margin(0.01));
  CHECK(threshold_pbar(presets::example2(), a11) == Catch::Approx(5.02).margin(0.01));
  CHECK(threshold_pbar(presets::example3(), a11) == Catch::Approx(13.05).margin(0.05));
}

TEST_CASE("threshold needs a nonempty good set") {
  const EquationCoefficients a22({2, 2});
  const DiscreteChannelModel bad({Marginal{{1.0}, {1.0}}, Marginal{{0.0}, {1.0}}});
  REQUIRE(classify_states(bad, a22).good.empty());
  CHECK_THROWS_AS(threshold_pbar(bad, a22), argument_error);
}
