#include "airyproc/airy_kernel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "airyproc/errors.hpp"

namespace airyproc {

namespace {

constexpr double kConvergedTol = 1e-12;
constexpr double kAcceptTol = 1e-10;

void check_argument(double v, const char* who) {
  if (!std::isfinite(v) || v < kKernelMinArgument) {
    throw DomainError(std::string(who) + ": spatial argument " + std::to_string(v) +
                      " below supported window [-20, inf)");
  }
}

// Runs `eval(level)` for level = 0, 1, ... (each level doubling resolution)
// until two successive values agree.
template <class Eval>
double converge(Eval&& eval, const char* who) {
  double previous = eval(0);
  double latest = previous;
  for (int level = 1; level <= 4; ++level) {
    latest = eval(level);
    const double diff = std::fabs(latest - previous);
    if (diff <= kConvergedTol * std::fmax(1.0, std::fabs(latest))) return latest;
    previous = latest;
  }
  if (std::fabs(latest - previous) <= kAcceptTol) return latest;
  throw NumericError(std::string(who) + ": quadrature did not converge under node doubling",
                     previous, latest);
}

double product_integral(const QuadratureRule& rule, double x, double y, double rate) {
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double z = rule.nodes[k];
    const double ax = detail::airy_ai_unchecked(x + z);
    const double ay = (x == y) ? ax : detail::airy_ai_unchecked(y + z);
    sum += rule.weights[k] * std::exp(rate * z) * ax * ay;
  }
  return sum;
}

// Integral over z > 0 of exp(rate z) Ai(x+z) Ai(y+z).
double positive_integral(double x, double y, double rate, const char* who) {
  const double lowest = std::fmin(x, y);
  return converge(
      [&](int level) {
        const auto rule = detail::positive_line_rule(lowest, std::fmax(rate, 0.0), 4 << level, 64);
        return product_integral(rule, x, y, rate);
      },
      who);
}

// Integral over z < 0 of exp(decay z) Ai(x+z) Ai(y+z), decay > 0.
double negative_integral(double x, double y, double decay, const char* who) {
  const double lowest = std::fmin(x, y);
  return converge(
      [&](int level) {
        const auto rule = detail::negative_line_rule(lowest, decay, 24 << level);
        return product_integral(rule, x, y, decay);
      },
      who);
}

}  // namespace

HeatKernelParams::HeatKernelParams(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("HeatKernelParams: alpha must be > 0");
  }
}

namespace detail {

QuadratureRule positive_line_rule(double lowest, double growth, int panels, int per_panel) {
  // Past zmax the integrand is below exp(-37) * O(1).
  double z = std::fmax(1.0, -lowest);
  for (;;) {
    const double w = lowest + z;
    if (w > 1.0 && 4.0 / 3.0 * w * std::sqrt(w) - growth * z >= 37.0) break;
    z += 0.25;
  }
  const double umax = std::sqrt(z);
  QuadratureRule rule = composite_gauss_legendre(panels, per_panel, 0.0, umax);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double u = rule.nodes[k];
    rule.nodes[k] = u * u;
    rule.weights[k] *= 2.0 * u;
  }
  rule.a = 0.0;
  rule.b = z;
  return rule;
}

QuadratureRule negative_line_rule(double lowest, double decay, int per_panel) {
  const double cutoff = 37.0 / decay;
  QuadratureRule rule;
  rule.a = -cutoff;
  rule.b = 0.0;
  double hi = 0.0;
  while (hi > -cutoff) {
    // Ai(x+z) Ai(y+z) oscillates at up to 2 sqrt(|x+z|) radians per unit.
    const double depth = std::fmax(0.0, -(lowest + hi));
    const double frequency = 2.0 * std::sqrt(depth) + 1.0;
    const double length = std::fmin(2.0, 6.0 / frequency);
    const double lo = std::fmax(-cutoff, hi - length);
    const QuadratureRule piece = gauss_legendre(per_panel, lo, hi);
    rule.nodes.insert(rule.nodes.begin(), piece.nodes.begin(), piece.nodes.end());
    rule.weights.insert(rule.weights.begin(), piece.weights.begin(), piece.weights.end());
    hi = lo;
  }
  return rule;
}

bool use_tilde_route(double alpha, double x, double y) {
  return alpha <= 1.0 && heat_phi(alpha, x, y) <= 1e4;
}

}  // namespace detail

double heat_phi(double alpha, double x, double y) {
  if (!(alpha > 0.0)) throw DomainError("heat_phi: alpha must be > 0");
  const double d = x - y;
  return std::exp(-d * d / (4.0 * alpha) - 0.5 * alpha * (x + y) + alpha * alpha * alpha / 12.0) /
         std::sqrt(4.0 * std::numbers::pi * alpha);
}

double heat_phi(const HeatKernelParams& params, double x, double y) {
  return heat_phi(params.alpha(), x, y);
}

double airy_kernel_classic(double x, double y) {
  const AiryPair px = detail::airy_pair_unchecked(x);
  if (std::fabs(x - y) < 1e-6) {
    // Diagonal Ai'^2 - x Ai^2, plus the first-order term -Ai(x)^2 (y - x) / 2.
    return px.aip * px.aip - x * px.ai * px.ai - 0.5 * px.ai * px.ai * (y - x);
  }
  const AiryPair py = detail::airy_pair_unchecked(y);
  return (px.ai * py.aip - px.aip * py.ai) / (x - y);
}

double a_tilde(double s, double t, double x, double y) {
  const double alpha = t - s;
  if (!(alpha > 0.0) || alpha > 2.0) {
    throw DomainError("a_tilde: requires 0 < t - s <= 2");
  }
  check_argument(x, "a_tilde");
  check_argument(y, "a_tilde");
  return positive_integral(x, y, alpha, "a_tilde");
}

double extended_airy_kernel(double s, double t, double x, double y) {
  check_argument(x, "extended_airy_kernel");
  check_argument(y, "extended_airy_kernel");
  if (s >= t) return positive_integral(x, y, -(s - t), "extended_airy_kernel");
  const double alpha = t - s;
  if (detail::use_tilde_route(alpha, x, y)) {
    return a_tilde(s, t, x, y) - heat_phi(alpha, x, y);
  }
  return -negative_integral(x, y, alpha, "extended_airy_kernel");
}

double heat_integral_quadrature(double alpha, double x, double y) {
  if (!(alpha > 0.0)) throw DomainError("heat_integral_quadrature: alpha must be > 0");
  check_argument(x, "heat_integral_quadrature");
  check_argument(y, "heat_integral_quadrature");
  return positive_integral(x, y, alpha, "heat_integral_quadrature") +
         negative_integral(x, y, alpha, "heat_integral_quadrature");
}

double correlation_R(std::span<const SpaceTimePoint> points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  if (k < 1 || k > 12) throw DomainError("correlation_R: needs 1 to 12 points");
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& zi = points[static_cast<std::size_t>(i)];
      const auto& zj = points[static_cast<std::size_t>(j)];
      m(i, j) = extended_airy_kernel(zi.t, zj.t, zi.x, zj.x);
    }
  }
  if (k == 1) return m(0, 0);
  return m.partialPivLu().determinant();
}

}  // namespace airyproc
