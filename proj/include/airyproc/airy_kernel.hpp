#pragma once

#include <span>

#include "airyproc/special_functions.hpp"

namespace airyproc {

/// A point on time line `t` at spatial position `x`.
struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;
};

/// Time gap of the heat kernel; alpha > 0 enforced on construction.
class HeatKernelParams {
 public:
  explicit HeatKernelParams(double alpha);
  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Lowest spatial argument accepted by the kernel routines.
inline constexpr double kKernelMinArgument = -20.0;

/// Extended Airy kernel A_{s,t}(x, y).
///
/// For s >= t the half-line integral of exp(-z (s - t)) Ai(x+z) Ai(y+z) is
/// evaluated directly. For s < t the kernel is a_tilde - heat_phi when that
/// difference is well conditioned (t - s <= 1 and heat_phi <= 1e4); otherwise
/// the exponentially damped integral over z < 0 is used.
double extended_airy_kernel(double s, double t, double x, double y);

/// Integral over z > 0 of exp(z (t - s)) Ai(x+z) Ai(y+z); requires 0 < t - s <= 2.
double a_tilde(double s, double t, double x, double y);

/// Closed form of the full-line integral of exp(alpha z) Ai(x+z) Ai(y+z).
double heat_phi(double alpha, double x, double y);
double heat_phi(const HeatKernelParams& params, double x, double y);

/// The classic (equal-time) Airy kernel from Ai and Ai'.
double airy_kernel_classic(double x, double y);

/// Full-line integral of exp(alpha z) Ai(x+z) Ai(y+z) by quadrature. The
/// independent left-hand side of the heat-kernel identity.
double heat_integral_quadrature(double alpha, double x, double y);

/// k-point correlation det[A(z_i, z_j)], 1 <= k <= 12.
double correlation_R(std::span<const SpaceTimePoint> points);

namespace detail {

/// Nodes z = u^2 on [0, zmax] for integrands Ai(x+z) Ai(y+z) exp(growth z)
/// with x, y >= lowest. Weights include the Jacobian 2u.
QuadratureRule positive_line_rule(double lowest, double growth, int panels, int per_panel);

/// Nodes on [-Z, 0] for the damped integrand exp(decay z) Ai(x+z) Ai(y+z),
/// Z chosen so the discarded tail is below 1e-16. Panel lengths shrink with
/// the local oscillation frequency; `per_panel` nodes on each.
QuadratureRule negative_line_rule(double lowest, double decay, int per_panel);

/// True when the s < t kernel at gap `alpha` should be assembled as
/// a_tilde - heat_phi rather than by the damped negative-line integral.
bool use_tilde_route(double alpha, double x, double y);

}  // namespace detail

}  // namespace airyproc
