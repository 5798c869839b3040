#include "airyproc/png_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "airyproc/airy_kernel.hpp"
#include "airyproc/errors.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/png_sim.hpp"

namespace airyproc {

namespace {

using cd = std::complex<double>;
using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic>;

constexpr double kImagTol = 1e-10;
constexpr double kVerifyTol = 1e-9;
constexpr int kChunk = 128;

void check_time(const PngKernelParams& p, int u, const char* who) {
  if (std::abs(u) >= p.N) throw DomainError(std::string(who) + ": need |u| < N");
}

Eigen::MatrixXd k_tilde_raw(const PngKernelParams& p, int u, std::span<const int> xs, int v, std::span<const int> ys,
                            Execution execution) {
  const int P = p.contour_points;
  const double a = p.alpha;
  const double lr1 = std::log(p.r1), lr2 = std::log(p.r2);
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto ny = static_cast<Eigen::Index>(ys.size());

  // G(z, w) = (1 - a)^{2(v-u)} A(z) B(w); the 1/P^2 of both trapezoid rules
  // and the constant go into one log offset.
  const double log_const = 2.0 * (v - u) * std::log1p(-a) - 2.0 * std::log(static_cast<double>(P));
  std::vector<cd> z(static_cast<std::size_t>(P)), w(static_cast<std::size_t>(P));
  std::vector<cd> log_a(z.size()), log_b(w.size());
  for (int k = 0; k < P; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / P;
    const cd log_z(lr2, theta), log_w(lr1, theta);
    z[static_cast<std::size_t>(k)] = std::exp(log_z);
    w[static_cast<std::size_t>(k)] = std::exp(log_w);
    const cd zk = z[static_cast<std::size_t>(k)], wk = w[static_cast<std::size_t>(k)];
    // Principal logarithms: Re(1 - a/z), Re(1 - a z) > 0 inside the annulus.
    log_a[static_cast<std::size_t>(k)] =
        static_cast<double>(p.N + u) * std::log(1.0 - a / zk) - static_cast<double>(p.N - u) * std::log(1.0 - a * zk);
    log_b[static_cast<std::size_t>(k)] =
        static_cast<double>(p.N - v) * std::log(1.0 - a * wk) - static_cast<double>(p.N + v) * std::log(1.0 - a / wk);
  }

  // right(l, y) = B(w_l) w_l^y; left(x, k) = A(z_k) z_k^{1 - x}.
  CMatrix right(P, ny), left(nx, P);
  for (int l = 0; l < P; ++l) {
    const cd log_w(lr1, 2.0 * std::numbers::pi * l / P);
    for (Eigen::Index b = 0; b < ny; ++b) {
      right(l, b) = std::exp(log_b[static_cast<std::size_t>(l)] + static_cast<double>(ys[static_cast<std::size_t>(b)]) * log_w);
    }
  }
  for (int k = 0; k < P; ++k) {
    const cd log_z(lr2, 2.0 * std::numbers::pi * k / P);
    for (Eigen::Index r = 0; r < nx; ++r) {
      left(r, k) = std::exp(log_const + log_a[static_cast<std::size_t>(k)] +
                            (1.0 - static_cast<double>(xs[static_cast<std::size_t>(r)])) * log_z);
    }
  }

  // middle = C right with C(k, l) = 1 / (z_k - w_l), built in row chunks.
  CMatrix middle(P, ny);
  const int chunks = (P + kChunk - 1) / kChunk;
  const bool parallel = execution == Execution::kParallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int c = 0; c < chunks; ++c) {
    const int lo = c * kChunk, hi = std::min(P, lo + kChunk);
    CMatrix cauchy(hi - lo, P);
    for (int k = lo; k < hi; ++k) {
      for (int l = 0; l < P; ++l) cauchy(k - lo, l) = 1.0 / (z[static_cast<std::size_t>(k)] - w[static_cast<std::size_t>(l)]);
    }
    middle.middleRows(lo, hi - lo) = cauchy * right;
  }
  const CMatrix result = left * middle;

  double worst_imag = 0.0;
  for (Eigen::Index i = 0; i < result.size(); ++i) worst_imag = std::max(worst_imag, std::fabs(result.data()[i].imag()));
  if (worst_imag > kImagTol) {
    throw NumericError("k_tilde: imaginary part above 1e-10; more contour points needed", 0.0, worst_imag);
  }
  return result.real();
}

}  // namespace

PngKernelParams PngKernelParams::defaults(double alpha, int N) {
  PngKernelParams p;
  p.alpha = alpha;
  p.N = N;
  const double delta = std::min({std::pow(static_cast<double>(std::max(N, 1)), -1.0 / 3.0), 0.5 * (1.0 - alpha),
                                 0.5 * (1.0 / alpha - 1.0)});
  p.r1 = 1.0 - delta;
  p.r2 = 1.0 + delta;
  p.contour_points = std::max(512, 8 * N);
  p.contour_points += p.contour_points % 2;
  return p;
}

void PngKernelParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("PngKernelParams: alpha must lie in (0, 1)");
  if (N < 1) throw DomainError("PngKernelParams: N must be >= 1");
  if (!(alpha < r1 && r1 < r2 && r2 < 1.0 / alpha)) {
    throw DomainError("PngKernelParams: need alpha < r1 < r2 < 1/alpha");
  }
  if (contour_points < 64 || contour_points % 2 != 0) {
    throw DomainError("PngKernelParams: contour_points must be even and >= 64");
  }
}

Eigen::MatrixXd k_tilde_matrix(const PngKernelParams& params, int u, std::span<const int> xs, int v,
                               std::span<const int> ys, Execution execution) {
  params.validate();
  check_time(params, u, "k_tilde");
  check_time(params, v, "k_tilde");
  for (int x : xs) {
    if (x < 0) throw DomainError("k_tilde: heights must be >= 0");
  }
  for (int y : ys) {
    if (y < 0) throw DomainError("k_tilde: heights must be >= 0");
  }
  Eigen::MatrixXd k = k_tilde_raw(params, u, xs, v, ys, execution);
  if (params.verify) {
    PngKernelParams other = params;
    other.contour_points *= 2;
    other.r1 = 0.5 * (params.r1 + std::max(params.alpha, 2.0 * params.r1 - params.r2));
    other.r2 = 0.5 * (params.r2 + std::min(1.0 / params.alpha, 2.0 * params.r2 - params.r1));
    const Eigen::MatrixXd check = k_tilde_raw(other, u, xs, v, ys, execution);
    const double diff = (check - k).cwiseAbs().maxCoeff();
    if (diff > kVerifyTol) {
      throw NumericError("k_tilde: value depends on contour radii or point count", k(0, 0), check(0, 0));
    }
  }
  return k;
}

double k_tilde(const PngKernelParams& params, LatticePoint p, LatticePoint q) {
  const int xs[1] = {p.x}, ys[1] = {q.x};
  return k_tilde_matrix(params, p.u, xs, q.u, ys, Execution::kSerial)(0, 0);
}

double phi_discrete(const PngKernelParams& params, int u, int v, int x, int y) {
  params.validate();
  check_time(params, u, "phi_discrete");
  check_time(params, v, "phi_discrete");
  if (u >= v) return 0.0;
  const double a = params.alpha;
  const double gap = v - u;
  const double shift = static_cast<double>(y) - static_cast<double>(x);
  // G(e^{i theta}, e^{i theta}) = ((1 - a)^2 / |1 - a e^{i theta}|^2)^{v - u},
  // real and even in theta.
  auto pass = [&](int points) {
    double sum = 0.0;
    for (int k = 0; k < points; ++k) {
      const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * k / points;
      const double g = std::exp(gap * std::log((1.0 - a) * (1.0 - a) / (1.0 - 2.0 * a * std::cos(theta) + a * a)));
      sum += std::cos(shift * theta) * g;
    }
    return sum / points;
  };
  // The rule aliases cos(shift theta) once points <= 2 |shift|, so start above that.
  int start = 64;
  while (start < 4.0 * std::fabs(shift) && start < (1 << 19)) start *= 2;
  double previous = pass(start);
  for (int points = 2 * start; points <= (1 << 20); points *= 2) {
    const double latest = pass(points);
    if (std::fabs(latest - previous) <= 1e-14) return latest;
    previous = latest;
  }
  throw NumericError("phi_discrete: trapezoid rule did not settle under point doubling", previous, pass(1 << 20));
}

double k_n(const PngKernelParams& params, LatticePoint p, LatticePoint q) {
  return k_tilde(params, p, q) - phi_discrete(params, p.u, q.u, p.x, q.x);
}

double discrete_gap_probability(const PngKernelParams& params, int u, int threshold, int window) {
  params.validate();
  check_time(params, u, "discrete_gap_probability");
  if (threshold < -1) throw DomainError("discrete_gap_probability: threshold must be >= -1");
  const PngScaling scaling(params.alpha * params.alpha);
  int w = window > 0 ? window : 8 * static_cast<int>(std::ceil(scaling.d * std::cbrt(static_cast<double>(params.N))));
  if (w > 600) throw DomainError("discrete_gap_probability: window must be <= 600");
  auto evaluate = [&](int width) {
    std::vector<int> xs(static_cast<std::size_t>(width));
    for (int k = 0; k < width; ++k) xs[static_cast<std::size_t>(k)] = threshold + 1 + k;
    // Equal times: phi vanishes and K_N = K~_N.
    return fredholm_determinant(k_tilde_matrix(params, u, xs, u, xs));
  };
  double previous = evaluate(w);
  while (2 * w <= 600) {
    w *= 2;
    const double latest = evaluate(w);
    if (std::fabs(latest - previous) < 1e-8) return latest;
    previous = latest;
  }
  throw NumericError("discrete_gap_probability: window doubling did not settle below W = 600", previous, previous);
}

std::vector<KernelLimitRow> klemmat_convergence_report(double q, std::span<const int> Ns, double tau, double tau_prime,
                                                   double x_prime, double y_prime) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("klemmat_convergence_report: q must lie in (0, 1)");
  const PngScaling s(q);
  const double alpha = std::sqrt(q);
  std::vector<KernelLimitRow> rows;
  for (int N : Ns) {
    if (N < 16 || N > 512) throw DomainError("klemmat_convergence_report: N must lie in [16, 512]");
    const double n13 = std::cbrt(static_cast<double>(N));
    const double unit = s.space * n13 * n13;  // lattice u per unit tau
    KernelLimitRow row;
    row.N = N;
    row.u = static_cast<int>(std::lround(unit * tau));
    row.v = static_cast<int>(std::lround(unit * tau_prime));
    const double t1 = row.u / unit, t2 = row.v / unit;
    row.x = static_cast<int>(std::lround(s.mu * N + (x_prime - tau * tau) * s.d * n13));
    row.y = static_cast<int>(std::lround(s.mu * N + (y_prime - tau_prime * tau_prime) * s.d * n13));
    const double xr = (row.x - s.mu * N) / (s.d * n13) + t1 * t1;
    const double yr = (row.y - s.mu * N) / (s.d * n13) + t2 * t2;
    const auto params = PngKernelParams::defaults(alpha, N);
    row.scaled = s.d * n13 * k_tilde(params, {row.u, row.x}, {row.v, row.y});
    const double airy = t1 < t2 ? a_tilde(t1, t2, xr, yr) : extended_airy_kernel(t1, t2, xr, yr);
    row.reference = std::exp((t1 * t1 * t1 - t2 * t2 * t2) / 3.0 + yr * t2 - xr * t1) * airy;
    row.abs_error = std::fabs(row.scaled - row.reference);
    rows.push_back(row);
  }
  return rows;
}

std::vector<PhiGaussianRow> phi_gaussian_report(double q, std::span<const int> Ns, double gamma, double s) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("phi_gaussian_report: q must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 2.0 / 3.0)) throw DomainError("phi_gaussian_report: gamma must lie in (0, 2/3)");
  if (!(s > 0.0)) throw DomainError("phi_gaussian_report: s must be positive");
  const PngScaling sc(q);
  std::vector<PhiGaussianRow> rows;
  for (int N : Ns) {
    const double n13 = std::cbrt(static_cast<double>(N));
    const double ng = std::pow(static_cast<double>(N), gamma);
    PhiGaussianRow row;
    row.N = N;
    row.gap = std::max(1, static_cast<int>(std::lround(sc.space * s * ng)));
    row.s_realized = row.gap / (sc.space * ng);
    if (row.gap >= N) throw DomainError("phi_gaussian_report: v - u must stay below N");
    const auto params = PngKernelParams::defaults(std::sqrt(q), N);
    const double variance = 2.0 * row.s_realized * std::pow(static_cast<double>(N), gamma - 2.0 / 3.0);
    const int x = static_cast<int>(std::lround(sc.mu * N));
    const int reach = static_cast<int>(std::floor(2.0 * sc.d * n13));
    for (int k = -reach; k <= reach; ++k) {
      const double lattice = phi_discrete(params, 0, row.gap, x, x + k);
      const double dx = k / (sc.d * n13);
      const double gaussian = std::exp(-dx * dx / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance) /
                              (sc.d * n13);
      row.max_error = std::max(row.max_error, std::fabs(lattice - gaussian));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace airyproc
