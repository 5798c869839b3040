#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "airyproc/parallel.hpp"

namespace airyproc {

/// Times t_1 < ... < t_m with thresholds xi_i; the event is A(t_i) <= xi_i.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> times, std::vector<double> thresholds);

  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

  static constexpr std::size_t kMaxTimes = 8;

 private:
  std::vector<double> times_;
  std::vector<double> thresholds_;
};

/// A bounded interval (lo, hi] on time line t. `weight` multiplies the kernel
/// on this piece (1 for gap probabilities, lambda for thinned counts).
struct TimeSegment {
  double t = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double weight = 1.0;
};

struct DiscretizationOptions {
  int nodes = 0;           // per segment; 0 picks a default from the time gaps
  int z_panels = 4;        // panels of the inner z-quadrature (z = u^2)
  int z_per_panel = 64;
  Execution execution = Execution::kParallel;
};

/// Symmetrized Nystrom matrix sqrt(w_a) A_{t_i,t_j}(x_a, x_b) sqrt(w_b).
struct DiscretizedOperator {
  Eigen::MatrixXd block_matrix;
  std::vector<std::vector<double>> nodes;    // per segment
  std::vector<std::vector<double>> weights;  // per segment
  std::vector<double> segment_weight;        // lambda per segment
  std::vector<std::size_t> offsets;          // first row of each segment

  /// det(I - D diag(lambda)) restricted to the listed segments.
  double determinant(std::span<const std::size_t> segments) const;
  /// det(I - D diag(lambda)) over all segments.
  double determinant() const;
};

/// Default node count per segment for the given time points.
int default_nodes(std::span<const double> times);

DiscretizedOperator discretize(std::span<const TimeSegment> segments, const DiscretizationOptions& options);

/// det(I - M) by partial-pivot LU, accumulated as sign * exp(sum log|u_ii|).
double fredholm_determinant(const Eigen::MatrixXd& m);

/// Spectral radius of the operator matrix (debug/test diagnostics).
double spectral_radius(const DiscretizedOperator& op);

inline constexpr double kDefaultCutoff = 12.0;

/// P[A(t_i) <= xi_i for all i] at a fixed discretization, no refinement.
double gap_probability_fixed(const TimeGrid& grid, int nodes, double cutoff,
                             Execution execution = Execution::kParallel);

/// As gap_probability_fixed, checked against the (2n, L + 4) refinement; the
/// refined value is returned. NumericError if the two differ by > 1e-8.
/// nodes = 0 picks default_nodes(times).
double gap_probability(const TimeGrid& grid, int nodes = 0, double cutoff = kDefaultCutoff);

/// Tracy-Widom GUE distribution function, s >= -8.
double tw2_cdf(double s);
/// Central difference of tw2_cdf with half-width delta.
double tw2_pdf(double s, double delta = 1e-3);

/// One window of the conditional event: the next time is s_gap * epsilon
/// after the previous one, the position window is p1 + [a, b] sqrt(epsilon).
struct WindowOffset {
  double s_gap = 1.0;
  double a = -1.0;
  double b = 1.0;
};

struct ConditionalEstimate {
  double value = 0.0;       // Richardson combination of the two step sizes
  double coarse = 0.0;      // finite difference of width delta1
  double fine = 0.0;        // width delta1 / 2
};

/// P[A(t_i) in A_i, i >= 2 | A(t1) = p1] from finite-delta ratios of gap
/// probabilities, inclusion-exclusion over window endpoints.
ConditionalEstimate conditional_window_estimate(double t1, double p1, std::span<const WindowOffset> offsets,
                                                double epsilon, double delta1 = 0.02);
double conditional_window_probability(double t1, double p1, std::span<const WindowOffset> offsets,
                                      double epsilon, double delta1 = 0.02);

/// Two-time moments from the Hoeffding integral of joint distribution
/// functions over [-8, 8]^2.
struct TwoTimeMoments {
  double variance = 0.0;     // Var A(0) from the tw2 density
  double covariance = 0.0;   // Cov(A(t), A(0))
};
TwoTimeMoments two_time_moments(double t);

/// Var(A(t) - A(0)) for 0.02 <= t <= 0.5 (t = 0 gives 0).
double increment_variance(double t);
/// Cov(A(t), A(0)) for 2 <= t <= 6.
double long_range_covariance(double t);

/// Mean and variance of tw2 from the density.
std::pair<double, double> tw2_moments();

struct MomentBox {
  std::size_t time_index = 0;
  double lo = 0.0;
  double hi = 0.0;
  int k = 1;
};

struct MomentComparison {
  double lhs = 0.0;  // from thinned gap probabilities
  double rhs = 0.0;  // from integrating correlation functions
};

/// Both sides of E[prod #B_i^{[k_i]}] = int R over the box product.
MomentComparison moment_identity_check(const TimeGrid& grid, std::span<const MomentBox> boxes);

}  // namespace airyproc
