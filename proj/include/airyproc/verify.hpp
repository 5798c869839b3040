#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "airyproc/fredholm.hpp"

namespace airyproc {

/// Conditioned PNG experiment: condition on h(2K_1, 2N-1) = J_1 and count
/// h(2K_i, 2N-1) in J_1 + [a_i, b_i] d N^{gamma/2} for i >= 2.
struct PngExperimentPlan {
  double q = 0.25;
  int N = 128;
  double gamma = 1.0 / 3.0;
  double tau1 = 0.0;
  std::vector<double> s_gaps{1.0};                          // s_2, ..., s_m
  std::vector<std::pair<double, double>> windows{{-1.0, 1.0}};  // (a_i, b_i), i >= 2
  std::size_t replicas = 200000;
  std::uint64_t master_seed = 1;
  std::optional<std::int64_t> J1;  // unset: empirical mode of a pilot run
  std::size_t pilot_replicas = 10000;
  double cell_budget = 2e11;       // replicas x light-cone cells

  void validate() const;
};

struct ProbabilityEstimate {
  double p = 0.0;
  double se = 0.0;  // sqrt(p (1 - p) / n)
  std::size_t n = 0;
};

/// Integer lattice the plan was rounded to.
struct LatticeLayout {
  std::vector<int> sites;                            // 2 K_i
  std::int64_t J1 = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> height_windows;  // inclusive
  std::vector<double> s_realized;
  std::vector<std::pair<double, double>> windows_realized;  // half-integer edges, rescaled
};

struct ExperimentReport {
  PngExperimentPlan plan;
  LatticeLayout layout;
  ProbabilityEstimate joint;                  // all windows at once
  std::vector<ProbabilityEstimate> marginals;  // one window at a time
  double gaussian_target = 0.0;               // at the requested s_i, (a_i, b_i)
  double lattice_target = 0.0;                // at the realized ones
  std::vector<double> marginal_targets;       // lattice, per window
  /// Airy-process conditional probability of the same event at p1 = A(tau1)
  /// from J_1 and epsilon = N^{gamma - 2/3}; NaN when outside its domain.
  double airy_conditional = 0.0;
  double ks_distance = 0.0;                   // unconditioned H_N(tau1) + tau1^2 vs F2
  std::size_t conditioned = 0;
  std::int64_t cells_per_replica = 0;
  double runtime_seconds = 0.0;
};

/// P[B(s_2 + ... + s_i) in [a_i, b_i] for all i] for a Brownian motion with
/// diffusion coefficient 2 started at 0 (transition density
/// (4 pi s)^{-1/2} e^{-x^2 / (4 s)}). Up to 4 windows.
double gaussian_window_target(std::span<const double> s_gaps, std::span<const std::pair<double, double>> windows);

/// Rounds the plan onto the lattice. J1 must already be known.
LatticeLayout lattice_layout(const PngExperimentPlan& plan, std::int64_t J1);

/// Runs the experiment. InsufficientDataError when fewer than 500 runs hit J_1.
ExperimentReport run_png_brownian_experiment(const PngExperimentPlan& plan);

struct AiryBrownianRow {
  double epsilon = 0.0;
  double estimate = 0.0;
  double gaussian_target = 0.0;
  double abs_error = 0.0;
};

/// conditional_window_probability for each epsilon, next to the Gaussian target.
std::vector<AiryBrownianRow> run_airy_brownian_experiment(double t1, double p1, std::span<const double> epsilons,
                                                          std::span<const WindowOffset> offsets);

/// True when abs_error does not grow by more than a factor 1 + slack from one
/// row to the next.
bool error_trend_ok(std::span<const AiryBrownianRow> rows, double slack = 0.2);

/// sup_x |F_n(x) - F(x)| over both one-sided limits at each jump of the
/// empirical CDF. Tied samples form one jump. Needs >= 100 samples; F is
/// evaluated once per distinct value.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

/// JSON report with a fixed key order; runtime is left out so that equal plans
/// give byte-identical output.
std::string report_json(const ExperimentReport& report);
/// One row per window plus a joint row: window,a,b,lo,hi,estimate,se,n,target.
std::string report_csv(const ExperimentReport& report);
/// Runtime and cell counts, kept apart from the deterministic report.
std::string timing_json(const ExperimentReport& report);

}  // namespace airyproc
