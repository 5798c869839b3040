#include <doctest.h>

#include <cmath>
#include <vector>

#include "airyproc/airy_kernel.hpp"
#include "airyproc/errors.hpp"
#include "airyproc/png_kernel.hpp"
#include "airyproc/png_sim.hpp"

using namespace airyproc;

namespace {

// Law of X - Y with X ~ NegBin(n, a) on {0, 1, ...} and Y an independent copy,
// by convolving geometric pmfs. Entry k + offset holds P[X - Y = k].
std::vector<double> negbin_difference(int n, double a, int support) {
  std::vector<double> pmf(static_cast<std::size_t>(support), 0.0);
  pmf[0] = 1.0;
  for (int r = 0; r < n; ++r) {
    std::vector<double> next(pmf.size(), 0.0);
    for (int i = 0; i < support; ++i) {
      double mass = 1.0 - a;
      for (int j = 0; i + j < support; ++j, mass *= a) next[static_cast<std::size_t>(i + j)] += pmf[static_cast<std::size_t>(i)] * mass;
    }
    pmf = next;
  }
  std::vector<double> diff(static_cast<std::size_t>(2 * support - 1), 0.0);
  for (int i = 0; i < support; ++i) {
    for (int j = 0; j < support; ++j) {
      diff[static_cast<std::size_t>(i - j + support - 1)] += pmf[static_cast<std::size_t>(i)] * pmf[static_cast<std::size_t>(j)];
    }
  }
  return diff;
}

}  // namespace

TEST_CASE("N = 1: gap probability is 1 - q^(M+1)") {
  for (double q : {0.25, 0.5}) {
    const auto p = PngKernelParams::defaults(std::sqrt(q), 1);
    for (int m = 0; m <= 8; ++m) {
      CHECK(std::fabs(discrete_gap_probability(p, 0, m) - (1.0 - std::pow(q, m + 1))) <= 1e-9);
    }
  }
}

TEST_CASE("N = 3: gap probabilities match last-passage sampling") {
  const double q = 0.25;
  const auto p = PngKernelParams::defaults(0.5, 3);
  const long samples = 1000000;
  // h(2u, 2N - 1) = G(N + u, N - u).
  for (int u : {0, 1}) {
    std::vector<long> below(12, 0);
    for (long s = 0; s < samples; ++s) {
      const LppField f = sample_lpp_weights(3 + u, 3 - u, q, static_cast<std::uint64_t>(s) * 7 + u);
      const auto g = last_passage_G(3 + u, 3 - u, f.w);
      for (int m = 0; m < 12; ++m) below[static_cast<std::size_t>(m)] += g <= m;
    }
    for (int m : {0, 1, 2, 4, 7}) {
      const double exact = discrete_gap_probability(p, u, m);
      const double freq = static_cast<double>(below[static_cast<std::size_t>(m)]) / samples;
      const double se = std::sqrt(exact * (1.0 - exact) / samples);
      CHECK(std::fabs(freq - exact) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("contour radii and point count do not change the kernel") {
  PngKernelParams a = PngKernelParams::defaults(0.5, 3);
  PngKernelParams b = a;
  a.r1 = 0.6;
  a.r2 = 1.1;
  b.r1 = 0.7;
  b.r2 = 1.3;
  const std::vector<int> small{0, 2, 5, 9, 14};
  for (int u = -2; u <= 2; ++u) {
    for (int v = -2; v <= 2; ++v) {
      CHECK((k_tilde_matrix(a, u, small, v, small) - k_tilde_matrix(b, u, small, v, small)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  PngKernelParams c = PngKernelParams::defaults(0.5, 20);
  PngKernelParams d = c;
  d.r1 = 0.85;
  d.r2 = 1.15;
  d.contour_points *= 2;
  const std::vector<int> xs{30, 40, 45, 55};
  for (int u : {-5, 0, 3}) {
    for (int v : {-2, 0, 6}) {
      CHECK((k_tilde_matrix(c, u, xs, v, xs) - k_tilde_matrix(d, u, xs, v, xs)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  c.verify = true;
  CHECK_NOTHROW(k_tilde_matrix(c, 0, xs, 2, xs));
}

TEST_CASE("too few contour points are reported") {
  PngKernelParams p = PngKernelParams::defaults(0.5, 200);
  p.contour_points = 64;
  p.r1 = 0.55;
  p.r2 = 1.9;
  const std::vector<int> xs{400};
  CHECK_THROWS_AS(k_tilde_matrix(p, 0, xs, 0, xs), NumericError);
}

TEST_CASE("serial and parallel kernel matrices agree") {
  const auto p = PngKernelParams::defaults(0.5, 64);
  std::vector<int> xs;
  for (int x = 110; x < 150; ++x) xs.push_back(x);
  const auto a = k_tilde_matrix(p, 0, xs, 4, xs, Execution::kSerial);
  const auto b = k_tilde_matrix(p, 0, xs, 4, xs, Execution::kParallel);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("equal-time kernel: diagonal in [0, 1], symmetric at u = 0") {
  const auto p = PngKernelParams::defaults(0.5, 40);
  std::vector<int> xs;
  for (int x = 60; x < 120; ++x) xs.push_back(x);
  for (int u : {0, 2, -7}) {
    const auto k = k_tilde_matrix(p, u, xs, u, xs);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      CHECK(k(i, i) >= -1e-12);
      CHECK(k(i, i) <= 1.0 + 1e-12);
    }
    if (u == 0) CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("phi: vanishes for u >= v and depends only on y - x") {
  const auto p = PngKernelParams::defaults(0.5, 50);
  CHECK(phi_discrete(p, 3, 3, 10, 10) == 0.0);
  CHECK(phi_discrete(p, 4, 3, 10, 12) == 0.0);
  CHECK(phi_discrete(p, 0, 5, 10, 13) == doctest::Approx(phi_discrete(p, 0, 5, 100, 103)).epsilon(1e-14));
  CHECK(phi_discrete(p, -3, 2, 10, 13) == doctest::Approx(phi_discrete(p, 0, 5, 7, 10)).epsilon(1e-14));
}

TEST_CASE("phi equals the law of a difference of negative binomials") {
  for (double a : {0.3, 0.5, 0.7}) {
    const auto p = PngKernelParams::defaults(a, 50);
    for (int gap : {1, 2, 5}) {
      const int support = 400;
      const auto law = negbin_difference(gap, a, support);
      for (int k = -8; k <= 8; ++k) {
        CHECK(std::fabs(phi_discrete(p, 0, gap, 0, k) - law[static_cast<std::size_t>(k + support - 1)]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("phi rows sum to one") {
  const auto p = PngKernelParams::defaults(0.5, 100);
  for (int gap : {1, 4, 20}) {
    double sum = 0.0;
    for (int y = -600; y <= 600; ++y) sum += phi_discrete(p, 0, gap, 0, y);
    CHECK(std::fabs(sum - 1.0) <= 1e-6);
  }
}

TEST_CASE("regression anchors") {
  const auto p = PngKernelParams::defaults(0.5, 64);
  CHECK(k_tilde(p, {0, 128}, {0, 128}) == doctest::Approx(0.0102518628275).epsilon(1e-9));
  CHECK(k_tilde(p, {0, 128}, {8, 120}) == doctest::Approx(0.017683043833).epsilon(1e-9));
  CHECK(k_n(p, {-4, 130}, {4, 126}) == doctest::Approx(-0.0439035866207).epsilon(1e-9));
}

TEST_CASE("gap probability is monotone in the threshold and tends to one") {
  const auto p = PngKernelParams::defaults(0.5, 16);
  double previous = 0.0;
  for (int m = 20; m <= 60; m += 4) {
    const double g = discrete_gap_probability(p, 0, m);
    CHECK(g >= previous - 1e-12);
    previous = g;
  }
  CHECK(previous > 1.0 - 1e-6);
  CHECK(discrete_gap_probability(p, 0, -1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scaled kernel approaches the extended Airy kernel") {
  const std::vector<int> ns{32, 64, 128, 256};
  struct Point {
    double tau, tau_prime, x, y;
  };
  for (const Point& pt : {Point{0, 0, 0, 0}, Point{0, 0.5, 0.5, -0.3}, Point{0.5, 0, 0.5, -0.3}}) {
    const auto rows = klemmat_convergence_report(0.25, ns, pt.tau, pt.tau_prime, pt.x, pt.y);
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].abs_error < rows[k - 1].abs_error);
  }
  const auto at_origin = klemmat_convergence_report(0.25, std::vector<int>{256});
  CHECK(at_origin[0].reference == doctest::Approx(airy_kernel_classic(0.0, 0.0)).epsilon(1e-12));
  CHECK(std::fabs(at_origin[0].scaled / at_origin[0].reference - 1.0) <= 0.10);
}

TEST_CASE("scaled kernel decays to the right") {
  const int n = 128;
  const PngScaling s(0.25);
  const auto p = PngKernelParams::defaults(0.5, n);
  const double scale = s.d * std::cbrt(static_cast<double>(n));
  std::vector<int> xs;
  std::vector<double> xp;
  for (double x = 0.0; x <= 6.0; x += 0.5) {
    xs.push_back(static_cast<int>(std::lround(s.mu * n + x * scale)));
    xp.push_back((xs.back() - s.mu * n) / scale);
  }
  const auto k = k_tilde_matrix(p, 0, xs, 0, xs);
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      CHECK(std::fabs(scale * k(i, j)) <= 10.0 * std::exp(-0.5 * (xp[static_cast<std::size_t>(i)] + xp[static_cast<std::size_t>(j)])));
    }
  }
}

TEST_CASE("phi approaches the heat kernel") {
  const auto rows = phi_gaussian_report(0.25, std::vector<int>{64, 128, 256}, 1.0 / 3.0, 1.0);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].max_error < rows[k - 1].max_error);
  for (const auto& r : rows) CHECK(std::fabs(r.s_realized - 1.0) < 0.1);
}

TEST_CASE("domain errors") {
  PngKernelParams p = PngKernelParams::defaults(0.5, 4);
  CHECK_THROWS_AS(k_tilde(p, {4, 0}, {0, 0}), DomainError);
  CHECK_THROWS_AS(k_tilde(p, {0, -1}, {0, 0}), DomainError);
  CHECK_THROWS_AS(discrete_gap_probability(p, 0, 3, 700), DomainError);
  p.r1 = 0.4;
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK_THROWS_AS(PngKernelParams::defaults(1.0, 4).validate(), DomainError);
  CHECK_THROWS_AS(phi_gaussian_report(0.25, std::vector<int>{64}, 0.8, 1.0), DomainError);
}
