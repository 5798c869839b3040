#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "airyproc/parallel.hpp"

namespace airyproc {

/// Finite-N kernel of the multi-layer PNG process, q = alpha^2.
struct PngKernelParams {
  double alpha = 0.5;
  int N = 1;
  double r1 = 0.75;  // w-circle
  double r2 = 1.25;  // z-circle
  int contour_points = 512;
  /// Also evaluate with doubled points and shifted radii; NumericError if
  /// they disagree by more than 1e-9.
  bool verify = false;

  /// Radii 1 -/+ delta around the saddle at z = 1, delta = min(N^{-1/3},
  /// (1 - alpha)/2, (1/alpha - 1)/2); max(512, 8N) points per circle.
  static PngKernelParams defaults(double alpha, int N);
  /// alpha < r1 < r2 < 1/alpha, contour_points >= 64 and even, N >= 1.
  void validate() const;
};

struct LatticePoint {
  int u = 0;  // time 2u, |u| < N
  int x = 0;  // height
};

/// K~_N(2u, x; 2v, y) by the trapezoid rule on both circles.
double k_tilde(const PngKernelParams& params, LatticePoint p, LatticePoint q);

/// K~_N(2u, xs[a]; 2v, ys[b]) for all pairs in one pass.
Eigen::MatrixXd k_tilde_matrix(const PngKernelParams& params, int u, std::span<const int> xs, int v,
                               std::span<const int> ys, Execution execution = Execution::kParallel);

/// phi_{2u,2v}(x, y); 0 for u >= v. Trapezoid rule in theta with point
/// doubling until two passes agree to 1e-14.
double phi_discrete(const PngKernelParams& params, int u, int v, int x, int y);

/// K_N = K~_N - phi_{2u,2v}.
double k_n(const PngKernelParams& params, LatticePoint p, LatticePoint q);

/// P[top curve at time 2u has no particle above `threshold`] = det(I - K_N)
/// on {threshold + 1, ..., threshold + W}. W starts at `window` (0 picks
/// 8 ceil(d N^{1/3})) and doubles until the value moves by < 1e-8; W <= 600.
double discrete_gap_probability(const PngKernelParams& params, int u, int threshold, int window = 0);

struct KernelLimitRow {
  int N = 0;
  int u = 0, v = 0, x = 0, y = 0;  // lattice arguments actually used
  double scaled = 0.0;             // d N^{1/3} K~_N
  double reference = 0.0;          // e^{...} A~(tau, x'; tau', y') at the realized arguments
  double abs_error = 0.0;
};

/// Scaled finite-N kernel against its Airy limit for each N at the point
/// (tau, tau', x', y'), rounded to the lattice.
std::vector<KernelLimitRow> klemmat_convergence_report(double q, std::span<const int> Ns, double tau = 0.0,
                                                   double tau_prime = 0.0, double x_prime = 0.0,
                                                   double y_prime = 0.0);

struct PhiGaussianRow {
  int N = 0;
  int gap = 0;          // v - u
  double s_realized = 0.0;
  double max_error = 0.0;  // max over |x' - y'| <= 2 of |phi - Gaussian|
};

/// phi_{2u,2v} against (d N^{1/3})^{-1} times the heat kernel with variance
/// 2 s N^{gamma - 2/3}, s recomputed from the rounded v - u.
std::vector<PhiGaussianRow> phi_gaussian_report(double q, std::span<const int> Ns, double gamma, double s);

}  // namespace airyproc
