// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "airyproc/airy_kernel.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/parallel.hpp"
#include "airyproc/png_kernel.hpp"
#include "airyproc/png_sim.hpp"
#include "airyproc/special_functions.hpp"
#include "airyproc/verify.hpp"
#include "oracles.hpp"

using namespace airyproc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome heat_identity() {
  const double pts[] = {-2.0, -0.5, 0.0, 1.0, 2.0};
  double worst = 0.0;
  int n = 0;
  for (double alpha : {0.25, 0.5, 1.0}) {
    for (double x : pts) {
      for (double y : pts) {
        worst = std::fmax(worst, std::fabs(heat_integral_quadrature(alpha, x, y) - heat_phi(alpha, x, y)));
        ++n;
      }
    }
  }
  return {n == 75 && worst <= 1e-8, "max residual " + num(worst) + " over " + std::to_string(n) + " points, tol 1e-8"};
}

Outcome equal_time_kernel() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> dist(-6.0, 6.0), time(-2.0, 2.0);
  double worst = 0.0;
  int n = 0;
  while (n < 100) {
    const double x = dist(gen), y = dist(gen), t = time(gen);
    if (std::fabs(x - y) < 1e-3) continue;
    const double closed = (oracle::boost_ai(x) * oracle::boost_aip(y) - oracle::boost_aip(x) * oracle::boost_ai(y)) / (x - y);
    worst = std::fmax(worst, std::fabs(extended_airy_kernel(t, t, x, y) - closed));
    ++n;
  }
  return {worst <= 1e-10, "max |K(t,x;t,y) - K_Ai(x,y)| " + num(worst) + " on 100 pairs, tol 1e-10"};
}

Outcome tw2_anchor() {
  const double at_zero = std::fabs(tw2_cdf(0.0) - oracle::classic_nystrom_cdf(0.0));
  double routes = 0.0;
  for (int s = -4; s <= 2; ++s) {
    const double extended = gap_probability(TimeGrid({0.0}, {static_cast<double>(s)}));
    routes = std::fmax(routes, std::fabs(extended - oracle::classic_nystrom_cdf(s)));
  }
  return {at_zero <= 1e-8 && routes <= 1e-8,
          "|F2(0) - oracle| " + num(at_zero) + ", route gap over s=-4..2 " + num(routes) + ", tol 1e-8"};
}

Outcome coupling() {
  int bad50 = 0, bad200 = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) bad50 += !coupling_check(seed, 50).exact;
  for (std::uint64_t seed = 0; seed < 100; ++seed) bad200 += !coupling_check(10000 + seed, 200).exact;
  return {bad50 == 0 && bad200 == 0, std::to_string(1000 - bad50) + "/1000 exact at N=50, " +
                                         std::to_string(100 - bad200) + "/100 exact at N=200"};
}

Outcome n1_exact() {
  double worst = 0.0;
  for (double q : {0.25, 0.5}) {
    const auto p = PngKernelParams::defaults(std::sqrt(q), 1);
    for (int m = 0; m <= 8; ++m) {
      worst = std::fmax(worst, std::fabs(discrete_gap_probability(p, 0, m) - (1.0 - std::pow(q, m + 1))));
    }
  }
  return {worst <= 1e-9, "max error vs geometric CDF " + num(worst) + ", tol 1e-9"};
}

Outcome n3_monte_carlo() {
  const double q = 0.25;
  const long samples = 1000000;
  const int thresholds[] = {0, 1, 2, 4, 7};
  std::vector<long> below(8, 0);
  for (long s = 0; s < samples; ++s) {
    const LppField f = sample_lpp_weights(3, 3, q, derive_stream(0xacce55, static_cast<std::uint64_t>(s)));
    const auto g = last_passage_G(3, 3, f.w);
    for (int m : thresholds) below[static_cast<std::size_t>(m)] += g <= m;
  }
  const auto p = PngKernelParams::defaults(std::sqrt(q), 3);
  double worst_z = 0.0;
  for (int m : thresholds) {
    const double exact = discrete_gap_probability(p, 0, m);
    const double freq = static_cast<double>(below[static_cast<std::size_t>(m)]) / samples;
    const double se = std::sqrt(exact * (1.0 - exact) / samples);
    worst_z = std::fmax(worst_z, std::fabs(freq - exact) / se);
  }
  return {worst_z <= 3.0, "max |empirical - kernel| / SE " + num(worst_z) + " at 5 thresholds, tol 3"};
}

Outcome variance_small_t() {
  const double r05 = increment_variance(0.05) / 0.05, r10 = increment_variance(0.1) / 0.1,
               r20 = increment_variance(0.2) / 0.2;
  const bool in = r05 >= 1.7 && r05 <= 2.3 && r10 >= 1.7 && r10 <= 2.3;
  return {in && std::fabs(r05 - 2.0) < std::fabs(r20 - 2.0),
          "Var/t at 0.05, 0.1, 0.2: " + num(r05) + ", " + num(r10) + ", " + num(r20)};
}

Outcome covariance_decay() {
  const double c3 = long_range_covariance(3.0), c6 = long_range_covariance(6.0);
  const double ratio = c3 / c6;
  return {ratio >= 2.5 && ratio <= 6.5, "cov(3) " + num(c3) + ", cov(6) " + num(c6) + ", ratio " + num(ratio)};
}

Outcome airy_brownian_trend() {
  const double eps[] = {0.2, 0.1, 0.05};
  const WindowOffset off[] = {{1.0, -1.0, 1.0}};
  const auto rows = run_airy_brownian_experiment(0.0, -1.0, eps, off);
  std::string d = "errors";
  for (const auto& r : rows) d += " " + num(r.abs_error);
  d += " vs target " + num(rows[0].gaussian_target);
  return {error_trend_ok(rows, 0.2) && rows.back().abs_error <= 0.08, d + ", last tol 0.08"};
}

Outcome png_monte_carlo() {
  auto run = [](int N) {
    PngExperimentPlan p;
    p.N = N;
    return run_png_brownian_experiment(p);
  };
  const auto r128 = run(128);
  const double target = r128.gaussian_target;
  const double e128 = std::fabs(r128.joint.p - target);
  const bool first = e128 <= 4.0 * r128.joint.se + 0.05;
  const auto r64 = run(64), r256 = run(256);
  const double e64 = std::fabs(r64.joint.p - target), e256 = std::fabs(r256.joint.p - target);
  const double pooled = std::hypot(r64.joint.se, r256.joint.se);
  const bool trend = e256 <= e64 + 2.0 * pooled;
  return {first && trend, "N=128: " + num(r128.joint.p) + " +- " + num(r128.joint.se) + " vs " + num(target) +
                              " (error " + num(e128) + ", allowed " + num(4.0 * r128.joint.se + 0.05) +
                              "); error N=64 " + num(e64) + ", N=256 " + num(e256) + ", pooled SE " + num(pooled)};
}

Outcome kernel_limit() {
  const int ns[] = {32, 64, 128, 256};
  const auto rows = klemmat_convergence_report(0.25, ns);
  bool dec = true;
  std::string d = "errors";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d += " " + num(rows[i].abs_error);
    if (i > 0) dec = dec && rows[i].abs_error < rows[i - 1].abs_error;
  }
  return {dec, d + " at N=32..256"};
}

Outcome phi_gaussian() {
  const int ns[] = {64, 128, 256};
  const auto rows = phi_gaussian_report(0.25, ns, 1.0 / 3.0, 1.0);
  std::string d = "max errors";
  for (const auto& r : rows) d += " " + num(r.max_error);
  return {rows.back().max_error < rows.front().max_error, d + " at N=64, 128, 256"};
}

Outcome determinism() {
  PngExperimentPlan p;
  p.N = 64;
  p.replicas = 40000;
  p.pilot_replicas = 4000;
  p.master_seed = 17;
  const int before = current_threads();
  set_threads(1);
  const auto a = run_png_brownian_experiment(p);
  set_threads(4);
  const auto b = run_png_brownian_experiment(p);
  set_threads(before);
  const bool same = report_json(a) == report_json(b) && report_csv(a) == report_csv(b);
  return {same, same ? "JSON and CSV identical for 1 and 4 threads" : "reports differ between 1 and 4 threads"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "heat-kernel identity", heat_identity},
      {2, "equal-time kernel", equal_time_kernel},
      {3, "F2 anchor and routes", tw2_anchor},
      {4, "exact coupling", coupling},
      {5, "N=1 exactness", n1_exact},
      {6, "N=3 vs Monte Carlo", n3_monte_carlo},
      {7, "increment variance", variance_small_t},
      {8, "covariance decay", covariance_decay},
      {9, "Airy conditional trend", airy_brownian_trend},
      {10, "PNG conditional Monte Carlo", png_monte_carlo},
      {11, "finite-N kernel limit", kernel_limit},
      {12, "phi Gaussian limit", phi_gaussian},
      {13, "thread determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %2d %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
