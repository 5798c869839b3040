#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "airyproc/errors.hpp"
#include "airyproc/special_functions.hpp"
#include "oracles.hpp"

using namespace airyproc;

TEST_CASE("airy_ai at the origin matches the Gamma-value constants") {
  const double expected = oracle::ai(0.0);
  CHECK(expected == doctest::Approx(0.3550280538878172).epsilon(1e-15));
  CHECK(std::fabs(airy_ai(0.0) - expected) <= 1e-15);
  const double expected_prime = oracle::aip(0.0);
  CHECK(expected_prime == doctest::Approx(-0.2588194037928068).epsilon(1e-15));
  CHECK(std::fabs(airy_ai_prime(0.0) - expected_prime) <= 1e-15);
}

TEST_CASE("airy_ai(5) against the wide series, cross-checked by ODE integration") {
  const double series = oracle::ai(5.0);
  CHECK(series == doctest::Approx(1.0834442813607441e-4).epsilon(1e-12));
  CHECK(std::fabs(airy_ai(5.0) - series) <= 1e-12);

  // RK4 on y'' = x y from the origin, step 1e-4.
  double y = oracle::ai(0.0), yp = oracle::aip(0.0), x = 0.0;
  const double h = 1e-4;
  for (int i = 0; i < 50000; ++i) {
    auto f = [](double xx, double yy, double yyp) { return std::pair{yyp, xx * yy}; };
    auto [k1y, k1p] = f(x, y, yp);
    auto [k2y, k2p] = f(x + h / 2, y + h / 2 * k1y, yp + h / 2 * k1p);
    auto [k3y, k3p] = f(x + h / 2, y + h / 2 * k2y, yp + h / 2 * k2p);
    auto [k4y, k4p] = f(x + h, y + h * k3y, yp + h * k3p);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    yp += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    x += h;
  }
  // Forward integration of the decaying solution amplifies the Bi component.
  CHECK(std::fabs(y - series) <= 1e-8);
}

TEST_CASE("Airy ODE residual at 1.5 and derivative consistency at 1") {
  const double x = 1.5;
  CHECK(std::fabs(airy_ai_second(x) - x * airy_ai(x)) <= 1e-10);
  const double h = 1e-5;
  const double fd = (airy_ai(1.0 + h) - airy_ai(1.0 - h)) / (2 * h);
  CHECK(std::fabs(fd - airy_ai_prime(1.0)) <= 1e-8);
}

TEST_CASE("first zero of Ai") {
  // Newton on the wide series oracle.
  double r = -2.34;
  for (int i = 0; i < 20; ++i) r -= oracle::ai(r) / oracle::aip(r);
  CHECK(r == doctest::Approx(-2.338107410459767).epsilon(1e-14));
  CHECK(std::fabs(airy_ai(-2.338107410459767)) <= 1e-10);
  CHECK(airy_ai_prime(-2.338107410459767) == doctest::Approx(0.7012).epsilon(1e-3));
}

TEST_CASE("accuracy against the oracles over the whole supported range") {
  double worst_core = 0.0, worst_core_prime = 0.0, worst_outer = 0.0;
  for (double x = -20.0; x <= 10.0; x += 0.0731) {
    worst_core = std::fmax(worst_core, std::fabs(airy_ai(x) - oracle::ai(x)));
    worst_core_prime = std::fmax(worst_core_prime, std::fabs(airy_ai_prime(x) - oracle::aip(x)));
  }
  for (double x = -60.0; x <= 40.0; x += 0.377) {
    if (x >= -20.0 && x <= 10.0) continue;
    worst_outer = std::fmax(worst_outer, std::fabs(airy_ai(x) - oracle::boost_ai(x)));
  }
  CHECK(worst_core <= 1e-12);
  CHECK(worst_core_prime <= 1e-11);
  CHECK(worst_outer <= 1e-10);
}

TEST_CASE("ODE residual on random points from the branch expansions") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> dist(-15.0, 8.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = dist(gen);
    worst = std::fmax(worst, std::fabs(airy_ai_second(x) - x * airy_ai(x)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("branch joints agree") {
  for (double x0 : {detail::kSeriesUpper, detail::kSeriesLower}) {
    const AiryPair series = detail::airy_series(x0);
    const AiryPair outer = x0 > 0 ? detail::airy_decaying(x0) : detail::airy_oscillatory(x0);
    CHECK(std::fabs(series.ai - outer.ai) <= 1e-11);
    CHECK(std::fabs(series.aip - outer.aip) <= 1e-11);
  }
  CHECK(detail::airy_branch(0.0) == detail::AiryBranch::kSeries);
  CHECK(detail::airy_branch(9.0) == detail::AiryBranch::kDecaying);
  CHECK(detail::airy_branch(-9.0) == detail::AiryBranch::kOscillatory);
}

TEST_CASE("Ai is positive and strictly decreasing on [0, 20]") {
  double previous = airy_ai(0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double value = airy_ai(i * 1e-2);
    REQUIRE(value > 0.0);
    REQUIRE(value < previous);
    previous = value;
  }
}

TEST_CASE("out-of-range Airy arguments are rejected") {
  CHECK_THROWS_AS(airy_ai(-60.5), DomainError);
  CHECK_THROWS_AS(airy_ai(40.5), DomainError);
  CHECK_THROWS_AS(airy_ai_prime(std::nan("")), DomainError);
  CHECK_NOTHROW(airy_ai(-60.0));
  CHECK_NOTHROW(airy_ai(40.0));
}

TEST_CASE("gauss_legendre documented examples") {
  const auto one = gauss_legendre(1, -1.0, 1.0);
  REQUIRE(one.size() == 1);
  CHECK(one.nodes[0] == 0.0);
  CHECK(one.weights[0] == 2.0);

  const auto five = gauss_legendre(5, 0.0, 1.0);
  CHECK(std::fabs(five.integrate([](double x) { return std::pow(x, 9); }) - 0.1) <= 1e-14);

  const auto forty = gauss_legendre(40, 0.0, 20.0);
  CHECK(std::fabs(forty.integrate([](double z) { return std::exp(-z); }) - (1 - std::exp(-20.0))) <=
        1e-12);

  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(gauss_legendre(4, 1.0, 1.0), DomainError);
}

TEST_CASE("gauss_legendre invariants over many orders and intervals") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ends(-5.0, 5.0);
  for (int n = 1; n <= 120; n += (n < 20 ? 1 : 7)) {
    double a = ends(gen), b = ends(gen);
    if (a > b) std::swap(a, b);
    if (b - a < 0.1) b = a + 1.0;
    const auto rule = gauss_legendre(n, a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      REQUIRE(rule.weights[i] > 0.0);
      REQUIRE(rule.nodes[i] > a);
      REQUIRE(rule.nodes[i] < b);
      if (i > 0) REQUIRE(rule.nodes[i] > rule.nodes[i - 1]);
      sum += rule.weights[i];
    }
    CHECK(std::fabs(sum - (b - a)) <= 1e-13);
    // Monomials up to degree 2n-1, measured on a shifted interval to avoid
    // zero-valued exact integrals.
    const auto shifted = gauss_legendre(n, 1.0, 2.0);
    for (int k = 0; k <= 2 * n - 1 && k <= 60; ++k) {
      const double exact = (std::pow(2.0, k + 1) - 1.0) / (k + 1);
      const double approx = shifted.integrate([k](double x) { return std::pow(x, k); });
      REQUIRE(std::fabs(approx - exact) <= 1e-12 * exact);
    }
  }
}

TEST_CASE("gauss_legendre is deterministic under concurrent first use") {
  std::vector<QuadratureRule> results(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&results, i] { results[i] = gauss_legendre(173, -1.0, 3.0); });
  }
  for (auto& t : threads) t.join();
  for (int i = 1; i < 8; ++i) {
    CHECK(results[i].nodes == results[0].nodes);
    CHECK(results[i].weights == results[0].weights);
  }
}
