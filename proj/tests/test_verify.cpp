#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <vector>

#include "airyproc/errors.hpp"
#include "airyproc/parallel.hpp"
#include "airyproc/png_sim.hpp"
#include "airyproc/verify.hpp"
#include "oracles.hpp"

using namespace airyproc;

namespace {

// Chained two-window Brownian probability by a tensor Simpson rule.
double chained_simpson(double s2, double s3, double a2, double b2, double a3, double b3) {
  const int n = 400;
  auto p = [](double x, double s) { return std::exp(-x * x / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s); };
  auto w = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const double h2 = (b2 - a2) / n, h3 = (b3 - a3) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x2 = a2 + i * h2;
    double inner = 0.0;
    for (int j = 0; j <= n; ++j) inner += w(j) * p(a3 + j * h3 - x2, s3);
    sum += w(i) * p(x2, s2) * inner * h3 / 3.0;
  }
  return sum * h2 / 3.0;
}

PngExperimentPlan small_plan() {
  PngExperimentPlan p;
  p.N = 16;
  p.replicas = 20000;
  p.pilot_replicas = 2000;
  p.master_seed = 99;
  return p;
}

}  // namespace

TEST_CASE("Gaussian targets") {
  const double one[1] = {1.0};
  const std::pair<double, double> w1[1] = {{-1.0, 1.0}};
  CHECK(gaussian_window_target(one, w1) == doctest::Approx(std::erf(0.5)).epsilon(1e-13));
  CHECK(gaussian_window_target(one, w1) == doctest::Approx(0.5205).epsilon(1e-4));
  CHECK(gaussian_window_target(one, w1) == doctest::Approx(oracle::gaussian_window(-1.0, 1.0)).epsilon(1e-10));

  const double two[2] = {1.0, 1.0};
  const std::pair<double, double> w2[2] = {{-1.0, 1.0}, {-1.0, 1.0}};
  const double chained = gaussian_window_target(two, w2);
  CHECK(chained == doctest::Approx(chained_simpson(1.0, 1.0, -1.0, 1.0, -1.0, 1.0)).epsilon(1e-9));
  CHECK(chained == doctest::Approx(0.25413).epsilon(1e-4));

  const double uneven[2] = {0.5, 2.0};
  const std::pair<double, double> w3[2] = {{-0.3, 1.5}, {0.2, 2.0}};
  CHECK(gaussian_window_target(uneven, w3) ==
        doctest::Approx(chained_simpson(0.5, 2.0, -0.3, 1.5, 0.2, 2.0)).epsilon(1e-9));

  const std::pair<double, double> empty[1] = {{0.5, 0.5}};
  CHECK(gaussian_window_target(one, empty) == 0.0);
}

TEST_CASE("ks distance") {
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  // Inversion sampling from the target: the 99% Kolmogorov bound holds in nearly every batch.
  int inside = 0;
  const int batches = 200, n = 400;
  for (int b = 0; b < batches; ++b) {
    SplitMix64 rng(1000 + b);
    std::vector<double> xs(n);
    for (auto& x : xs) x = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * rng.uniform());
    inside += ks_distance(xs, cdf) < 1.63 / std::sqrt(static_cast<double>(n));
  }
  CHECK(inside >= batches * 0.97);

  const std::vector<double> constant(100, 0.0);
  CHECK(ks_distance(constant, cdf) >= 0.5);

  std::vector<double> quantiles(100);
  for (int i = 0; i < 100; ++i) quantiles[i] = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * (i + 1) / 100.0 - 1e-15);
  quantiles.back() = 10.0;
  CHECK(ks_distance(quantiles, cdf) <= 0.01 + 1e-12);

  CHECK_THROWS_AS(ks_distance(std::vector<double>(99, 0.0), cdf), DomainError);
}

TEST_CASE("ties form a single jump") {
  std::vector<double> xs(100, 0.0);
  for (int i = 0; i < 50; ++i) xs[i] = 1.0;
  // Uniform on [-1, 2]: F(0) = 1/3 against jumps 0 -> 1/2, F(1) = 2/3 against 1/2 -> 1.
  const auto uniform = [](double x) { return std::clamp((x + 1.0) / 3.0, 0.0, 1.0); };
  CHECK(ks_distance(xs, uniform) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  std::vector<double> spread(100);
  for (int i = 0; i < 100; ++i) spread[i] = -1.0 + 3.0 * (i + 0.5) / 100.0;
  CHECK(ks_distance(spread, uniform) == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("lattice layout rounding") {
  PngExperimentPlan p;
  p.N = 128;
  const auto layout = lattice_layout(p, 239);
  const PngScaling sc(0.25);
  REQUIRE(layout.sites.size() == 2);
  CHECK(layout.sites[0] == 0);
  CHECK(layout.sites[1] == 2 * std::lround(sc.space * std::cbrt(128.0)));
  CHECK(layout.height_windows[0].first == 235);
  CHECK(layout.height_windows[0].second == 243);
  CHECK(layout.s_realized[0] == doctest::Approx(8.0 / (sc.space * std::cbrt(128.0))).epsilon(1e-14));
  const double hs = sc.d * std::pow(128.0, 1.0 / 6.0);
  CHECK(layout.windows_realized[0].second == doctest::Approx(4.5 / hs).epsilon(1e-14));

  p.tau1 = 50.0;
  CHECK_THROWS_AS(lattice_layout(p, 0), DomainError);
}

TEST_CASE("plan validation") {
  PngExperimentPlan p = small_plan();
  p.gamma = 0.7;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = small_plan();
  p.replicas = 9999;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = small_plan();
  p.windows.push_back({0.0, 1.0});
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = small_plan();
  p.cell_budget = 1e3;
  CHECK_THROWS_AS(run_png_brownian_experiment(p), DomainError);
}

TEST_CASE("covering window gives estimate 1") {
  PngExperimentPlan p = small_plan();
  p.windows = {{-1e4, 1e4}};
  const auto r = run_png_brownian_experiment(p);
  CHECK(r.joint.p == 1.0);
  CHECK(r.joint.se == 0.0);
  CHECK(r.conditioned >= 500);
}

TEST_CASE("conditioning uses the pilot mode and counts exactly") {
  PngExperimentPlan p = small_plan();
  const auto r = run_png_brownian_experiment(p);
  const LightConeSimulator sim(p.q, 2 * p.N - 1, r.layout.sites);
  const auto h = simulate_replicas(sim, p.master_seed, p.replicas, Execution::kSerial);
  std::size_t cond = 0, hit = 0;
  for (std::size_t k = 0; k < p.replicas; ++k) {
    if (h[2 * k] != r.layout.J1) continue;
    ++cond;
    hit += h[2 * k + 1] >= r.layout.height_windows[0].first && h[2 * k + 1] <= r.layout.height_windows[0].second;
  }
  CHECK(r.conditioned == cond);
  CHECK(r.joint.n == cond);
  CHECK(r.joint.p == doctest::Approx(static_cast<double>(hit) / cond).epsilon(1e-15));
  CHECK(r.joint.se == doctest::Approx(std::sqrt(r.joint.p * (1 - r.joint.p) / cond)).epsilon(1e-15));
  CHECK(r.ks_distance > 0.0);
  CHECK(r.ks_distance < 0.3);
}

TEST_CASE("too few conditioned runs") {
  PngExperimentPlan p = small_plan();
  p.J1 = 0;
  CHECK_THROWS_AS(run_png_brownian_experiment(p), InsufficientDataError);
}

TEST_CASE("reports do not depend on the thread count") {
  PngExperimentPlan p = small_plan();
  const int before = current_threads();
  set_threads(1);
  const auto a = run_png_brownian_experiment(p);
  set_threads(4);
  const auto b = run_png_brownian_experiment(p);
  set_threads(before);
  CHECK(report_json(a) == report_json(b));
  CHECK(report_csv(a) == report_csv(b));
}

TEST_CASE("report formats") {
  const auto r = run_png_brownian_experiment(small_plan());
  const auto j = nlohmann::ordered_json::parse(report_json(r));
  CHECK(j.begin().key() == "version");
  CHECK(j["plan"]["master_seed"] == 99);
  CHECK(j["joint"]["se"].get<double>() > 0.0);
  CHECK(j.contains("runtime_seconds") == false);
  const auto t = nlohmann::json::parse(timing_json(r));
  CHECK(t["runtime_seconds"].get<double>() > 0.0);
  const auto csv = report_csv(r);
  CHECK(csv.rfind("window,a,b,lo,hi,estimate,se,n,target\n", 0) == 0);
  CHECK(csv.find("\njoint,") != std::string::npos);
}

TEST_CASE("Airy-Brownian table") {
  const WindowOffset degenerate[1] = {{1.0, 0.3, 0.3}};
  const double eps[1] = {0.1};
  const auto rows = run_airy_brownian_experiment(0.0, -1.0, eps, degenerate);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].estimate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rows[0].gaussian_target == 0.0);

  std::vector<AiryBrownianRow> table{{0.2, 0, 0, 0.10}, {0.1, 0, 0, 0.11}, {0.05, 0, 0, 0.05}};
  CHECK(error_trend_ok(table));
  table[1].abs_error = 0.13;
  CHECK_FALSE(error_trend_ok(table));
}
