#pragma once

#include <cstddef>
#include <vector>

namespace airyproc {

/// Nodes and weights of a quadrature rule on (a, b).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Supported argument range of the Airy routines.
inline constexpr double kAiryMin = -60.0;
inline constexpr double kAiryMax = 40.0;

/// Ai(x) for x in [kAiryMin, kAiryMax]; throws DomainError outside.
double airy_ai(double x);
/// Ai'(x), same range contract as airy_ai.
double airy_ai_prime(double x);
/// Ai''(x) assembled from the branch expansions themselves (term-wise second
/// derivative), not from the identity Ai'' = x Ai. Used to test the branches.
double airy_ai_second(double x);

/// Value and derivative in one call.
struct AiryPair {
  double ai;
  double aip;
};
AiryPair airy_pair(double x);

namespace detail {
/// No range check. Arguments above kAiryMax return 0 (true value < 1e-70);
/// the oscillatory expansion is used for any negative argument below the
/// series window, which is accurate but not part of the public contract.
AiryPair airy_pair_unchecked(double x);
double airy_ai_unchecked(double x);

/// Evaluation regimes of the Airy routines, exposed for branch-joint tests.
enum class AiryBranch { kSeries, kDecaying, kOscillatory };
AiryBranch airy_branch(double x);
AiryPair airy_series(double x);
AiryPair airy_decaying(double x);
AiryPair airy_oscillatory(double x);
inline constexpr double kSeriesUpper = 7.25;
inline constexpr double kSeriesLower = -8.0;

/// Piecewise Chebyshev interpolant of Ai on [kAiryMin, kAiryMax], built once
/// from airy_ai_unchecked. Absolute error below 5e-14; about ten times faster
/// than the direct routine. Used for bulk quadrature tables. Returns 0 above
/// kAiryMax and falls back to the direct routine below kAiryMin.
double fast_airy_ai(double x);
}  // namespace detail

/// n-point Gauss-Legendre rule mapped to (a, b).
QuadratureRule gauss_legendre(int n, double a, double b);

/// `panels` equal sub-intervals of (a, b), each with an n-point rule.
QuadratureRule composite_gauss_legendre(int panels, int n, double a, double b);

}  // namespace airyproc
