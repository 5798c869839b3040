#include "airyproc/fredholm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "airyproc/airy_kernel.hpp"
#include "airyproc/errors.hpp"
#include "airyproc/special_functions.hpp"

namespace airyproc {

namespace {

constexpr double kRefineTol = 1e-8;
constexpr double kLowestThreshold = -8.0;
constexpr int kNegativePerPanel = 32;

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

// Row-major n x K table of Ai(x_a + z_k).
Eigen::MatrixXd airy_table(const std::vector<double>& x, const std::vector<double>& z) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(z.size()));
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t k = 0; k < z.size(); ++k) {
      t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = detail::fast_airy_ai(x[a] + z[k]);
    }
  }
  return t;
}

enum class Route { kPositive, kTilde, kNegative };

struct BlockPlan {
  std::size_t p = 0;
  std::size_t q = 0;
  Route route = Route::kPositive;
  double rate = 0.0;  // exponent of exp(rate z) in the z-integral
};

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times, std::vector<double> thresholds)
    : times_(std::move(times)), thresholds_(std::move(thresholds)) {
  require(!times_.empty() && times_.size() <= kMaxTimes, "TimeGrid: need 1 to 8 times");
  require(times_.size() == thresholds_.size(), "TimeGrid: times and thresholds differ in length");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    require(std::isfinite(times_[i]) && std::isfinite(thresholds_[i]), "TimeGrid: non-finite entry");
    if (i > 0) require(times_[i] > times_[i - 1], "TimeGrid: times must be strictly increasing");
  }
}

int default_nodes(std::span<const double> times) {
  if (times.size() < 2) return 48;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) gap = std::fmin(gap, std::fabs(times[i] - times[i - 1]));
  // The s < t blocks carry a Gaussian ridge of width sqrt(2 gap) that the
  // rule has to resolve.
  const double n = 20.0 / std::sqrt(gap);
  return static_cast<int>(std::clamp(std::ceil(n / 8.0) * 8.0, 48.0, 320.0));
}

DiscretizedOperator discretize(std::span<const TimeSegment> segments, const DiscretizationOptions& options) {
  const std::size_t m = segments.size();
  require(m >= 1, "discretize: no segments");
  std::vector<double> times;
  for (const auto& s : segments) {
    require(s.hi >= s.lo, "discretize: segment with hi < lo");
    require(s.lo >= kKernelMinArgument, "discretize: segment below the kernel window");
    times.push_back(s.t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const int n = options.nodes > 0 ? options.nodes : default_nodes(times);
  const bool parallel = options.execution == Execution::kParallel;

  DiscretizedOperator op;
  op.nodes.resize(m);
  op.weights.resize(m);
  op.offsets.resize(m);
  double lowest = segments[0].lo;
  for (std::size_t p = 0; p < m; ++p) {
    const auto rule = gauss_legendre(n, segments[p].lo, segments[p].hi);
    op.nodes[p] = rule.nodes;
    op.weights[p] = rule.weights;
    op.segment_weight.push_back(segments[p].weight);
    op.offsets[p] = p * static_cast<std::size_t>(n);
    lowest = std::fmin(lowest, segments[p].lo);
  }

  // Route every block; the shared positive rule must tolerate the largest
  // growth rate among the a_tilde blocks.
  std::vector<BlockPlan> plans;
  double growth = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) {
      BlockPlan plan{p, q, Route::kPositive, 0.0};
      const double delta = segments[p].t - segments[q].t;
      if (delta >= 0.0) {
        plan.rate = -delta;
      } else {
        const double alpha = -delta;
        const double low = std::fmin(segments[p].lo, segments[q].lo);
        plan.rate = alpha;
        if (detail::use_tilde_route(alpha, low, low)) {
          plan.route = Route::kTilde;
          growth = std::fmax(growth, alpha);
        } else {
          plan.route = Route::kNegative;
        }
      }
      plans.push_back(plan);
    }
  }

  const QuadratureRule zrule = detail::positive_line_rule(lowest, growth, options.z_panels, options.z_per_panel);
  std::vector<Eigen::MatrixXd> tables(m);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t p = 0; p < m; ++p) tables[p] = airy_table(op.nodes[p], zrule.nodes);

  // Negative-line tables, one set per distinct decay rate.
  std::map<double, QuadratureRule> negative_rules;
  for (const auto& plan : plans) {
    if (plan.route == Route::kNegative && !negative_rules.count(plan.rate)) {
      negative_rules.emplace(plan.rate, detail::negative_line_rule(lowest, plan.rate, kNegativePerPanel));
    }
  }
  std::map<double, std::vector<Eigen::MatrixXd>> negative_tables;
  for (const auto& [rate, rule] : negative_rules) {
    auto& set = negative_tables[rate];
    set.resize(m);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::size_t p = 0; p < m; ++p) set[p] = airy_table(op.nodes[p], rule.nodes);
  }

  const auto dim = static_cast<Eigen::Index>(m * static_cast<std::size_t>(n));
  op.block_matrix.resize(dim, dim);
  const auto nn = static_cast<Eigen::Index>(n);

  // One block per iteration, each computed whole by one thread, so the result
  // does not depend on the team size.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t b = 0; b < plans.size(); ++b) {
    const BlockPlan& plan = plans[b];
    Eigen::MatrixXd block;
    if (plan.route == Route::kNegative) {
      const QuadratureRule& rule = negative_rules.at(plan.rate);
      const auto& set = negative_tables.at(plan.rate);
      Eigen::VectorXd c(static_cast<Eigen::Index>(rule.size()));
      for (std::size_t k = 0; k < rule.size(); ++k) {
        c(static_cast<Eigen::Index>(k)) = -rule.weights[k] * std::exp(plan.rate * rule.nodes[k]);
      }
      block = (set[plan.p] * c.asDiagonal()) * set[plan.q].transpose();
    } else {
      Eigen::VectorXd c(static_cast<Eigen::Index>(zrule.size()));
      for (std::size_t k = 0; k < zrule.size(); ++k) {
        c(static_cast<Eigen::Index>(k)) = zrule.weights[k] * std::exp(plan.rate * zrule.nodes[k]);
      }
      block = (tables[plan.p] * c.asDiagonal()) * tables[plan.q].transpose();
      if (plan.route == Route::kTilde) {
        for (Eigen::Index a = 0; a < nn; ++a) {
          for (Eigen::Index bb = 0; bb < nn; ++bb) {
            block(a, bb) -= heat_phi(plan.rate, op.nodes[plan.p][static_cast<std::size_t>(a)],
                                     op.nodes[plan.q][static_cast<std::size_t>(bb)]);
          }
        }
      }
    }
    for (Eigen::Index a = 0; a < nn; ++a) {
      const double wa = std::sqrt(op.weights[plan.p][static_cast<std::size_t>(a)]);
      for (Eigen::Index bb = 0; bb < nn; ++bb) {
        block(a, bb) *= wa * std::sqrt(op.weights[plan.q][static_cast<std::size_t>(bb)]);
      }
    }
    op.block_matrix.block(static_cast<Eigen::Index>(op.offsets[plan.p]), static_cast<Eigen::Index>(op.offsets[plan.q]),
                          nn, nn) = block;
  }

#ifndef NDEBUG
  bool check = true;
  for (const auto& s : segments) check = check && s.lo >= -6.0 && s.hi - s.lo >= 10.0 && s.weight == 1.0;
  if (check) {
    const double rho = spectral_radius(op);
    if (!(rho < 1.0)) throw NumericError("discretize: spectral radius not below 1", rho, rho);
  }
#endif
  return op;
}

double fredholm_determinant(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m.rows(), m.cols()) - m;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  double sign = lu.permutationP().determinant();
  double log_abs = 0.0;
  const Eigen::MatrixXd& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double d = u(i, i);
    if (d == 0.0) return 0.0;
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::fabs(d));
  }
  return sign * std::exp(log_abs);
}

double DiscretizedOperator::determinant(std::span<const std::size_t> segments) const {
  const std::size_t n = nodes.empty() ? 0 : nodes[0].size();
  const auto nn = static_cast<Eigen::Index>(n);
  const auto dim = static_cast<Eigen::Index>(segments.size() * n);
  Eigen::MatrixXd sub(dim, dim);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = 0; j < segments.size(); ++j) {
      sub.block(static_cast<Eigen::Index>(i * n), static_cast<Eigen::Index>(j * n), nn, nn) =
          block_matrix.block(static_cast<Eigen::Index>(offsets[segments[i]]),
                             static_cast<Eigen::Index>(offsets[segments[j]]), nn, nn) *
          segment_weight[segments[j]];
    }
  }
  return fredholm_determinant(sub);
}

double DiscretizedOperator::determinant() const {
  std::vector<std::size_t> all(nodes.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return determinant(all);
}

double spectral_radius(const DiscretizedOperator& op) {
  Eigen::MatrixXd m = op.block_matrix;
  const std::size_t n = op.nodes.empty() ? 0 : op.nodes[0].size();
  for (std::size_t j = 0; j < op.nodes.size(); ++j) {
    m.middleCols(static_cast<Eigen::Index>(op.offsets[j]), static_cast<Eigen::Index>(n)) *= op.segment_weight[j];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

std::vector<TimeSegment> gap_segments(const TimeGrid& grid, double cutoff) {
  std::vector<TimeSegment> segments;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = grid.thresholds()[i];
    segments.push_back({grid.times()[i], xi, xi + cutoff, 1.0});
  }
  return segments;
}

void check_gap_args(const TimeGrid& grid, int nodes, double cutoff, const char* who) {
  for (double xi : grid.thresholds()) {
    require(xi >= kLowestThreshold, std::string(who) + ": thresholds must be >= -8");
  }
  require(nodes >= 16, std::string(who) + ": need at least 16 nodes");
  require(cutoff >= 8.0, std::string(who) + ": cutoff length must be >= 8");
}

}  // namespace

double gap_probability_fixed(const TimeGrid& grid, int nodes, double cutoff, Execution execution) {
  check_gap_args(grid, nodes, cutoff, "gap_probability");
  DiscretizationOptions options;
  options.nodes = nodes;
  options.execution = execution;
  const auto segments = gap_segments(grid, cutoff);
  return discretize(segments, options).determinant();
}

double gap_probability(const TimeGrid& grid, int nodes, double cutoff) {
  const int n = nodes > 0 ? nodes : default_nodes(grid.times());
  check_gap_args(grid, n, cutoff, "gap_probability");
  const double coarse = gap_probability_fixed(grid, n, cutoff);
  const double fine = gap_probability_fixed(grid, 2 * n, cutoff + 4.0);
  if (std::fabs(fine - coarse) > kRefineTol) {
    throw NumericError("gap_probability: refinement (n, L) -> (2n, L + 4) did not settle", coarse, fine);
  }
  return fine;
}

double tw2_cdf(double s) {
  require(s >= kLowestThreshold, "tw2_cdf: s must be >= -8");
  return gap_probability(TimeGrid({0.0}, {s}));
}

double tw2_pdf(double s, double delta) {
  require(s >= -7.5, "tw2_pdf: s must be >= -7.5");
  require(delta >= 1e-4 && delta <= 1e-2, "tw2_pdf: delta must lie in [1e-4, 1e-2]");
  return (tw2_cdf(s + delta) - tw2_cdf(s - delta)) / (2.0 * delta);
}

std::pair<double, double> tw2_moments() {
  const auto rule = composite_gauss_legendre(31, 10, -7.5, 8.0);
  std::vector<double> density(rule.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < rule.size(); ++i) density[i] = tw2_pdf(rule.nodes[i]);
  double mass = 0.0, first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double w = rule.weights[i] * density[i];
    const double x = rule.nodes[i];
    mass += w;
    first += w * x;
    second += w * x * x;
  }
  const double mean = first / mass;
  return {mean, second / mass - mean * mean};
}

namespace {

// P[A(t_i) <= x_i for all i]; events below the lowest supported threshold
// have probability under F2(-8) < 1e-17 and count as 0.
double corner_probability(const std::vector<double>& times, const std::vector<double>& x) {
  for (double v : x) {
    if (v < kLowestThreshold) return 0.0;
  }
  return gap_probability(TimeGrid(times, x));
}

// P[A(t1) in (p1 - h, p1 + h], A(t_i) in (lo_i, hi_i] for i >= 2] / P[A(t1) in (p1 - h, p1 + h]].
double window_ratio(const std::vector<double>& times, double p1, double half, const std::vector<double>& lo,
                    const std::vector<double>& hi) {
  const std::size_t m = times.size();
  double numerator = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<double> x(m);
    int sign = 1;
    for (std::size_t i = 0; i < m; ++i) {
      const bool upper = (mask >> i) & 1U;
      if (i == 0) {
        x[i] = upper ? p1 + half : p1 - half;
      } else {
        x[i] = upper ? hi[i] : lo[i];
      }
      if (!upper) sign = -sign;
    }
    numerator += sign * corner_probability(times, x);
  }
  const double denominator = corner_probability({times[0]}, {p1 + half}) - corner_probability({times[0]}, {p1 - half});
  if (denominator < 1e-8) {
    throw NumericError("conditional_window_probability: denominator below 1e-8", denominator, numerator);
  }
  return numerator / denominator;
}

}  // namespace

ConditionalEstimate conditional_window_estimate(double t1, double p1, std::span<const WindowOffset> offsets,
                                                double epsilon, double delta1) {
  require(!offsets.empty() && offsets.size() <= 3, "conditional_window_probability: need 1 to 3 windows");
  require(epsilon >= 0.01 && epsilon <= 0.5, "conditional_window_probability: epsilon must lie in [0.01, 0.5]");
  require(delta1 >= 1e-3 && delta1 <= 1e-1, "conditional_window_probability: delta1 must lie in [1e-3, 1e-1]");
  require(p1 - delta1 >= kLowestThreshold, "conditional_window_probability: p1 too far in the lower tail");
  std::vector<double> times{t1};
  std::vector<double> lo{0.0}, hi{0.0};
  const double root = std::sqrt(epsilon);
  for (const auto& w : offsets) {
    require(w.s_gap > 0.0, "conditional_window_probability: s_gap must be positive");
    require(w.b >= w.a, "conditional_window_probability: window with b < a");
    times.push_back(times.back() + w.s_gap * epsilon);
    lo.push_back(p1 + w.a * root);
    hi.push_back(p1 + w.b * root);
  }
  ConditionalEstimate e;
  e.coarse = window_ratio(times, p1, 0.5 * delta1, lo, hi);
  e.fine = window_ratio(times, p1, 0.25 * delta1, lo, hi);
  e.value = (4.0 * e.fine - e.coarse) / 3.0;
  return e;
}

double conditional_window_probability(double t1, double p1, std::span<const WindowOffset> offsets, double epsilon,
                                      double delta1) {
  return conditional_window_estimate(t1, p1, offsets, epsilon, delta1).value;
}

namespace {

constexpr double kBox = 8.0;
constexpr double kGridTol = 5e-3;

// Integral over x < y in [-8, 8]^2 of F(x, y) - F(x) F(y), in coordinates
// c = (x + y) / 2, r = y - x. The r panels are graded from the width of the
// diagonal ridge.
double upper_triangle(double t, int c_nodes, int r_nodes, int nyst) {
  static constexpr std::array<double, 13> kCuts{-8, -6, -4, -3, -2, -1, 0, 1, 2, 3, 4, 6, 8};
  const double sigma = 0.5 * std::fmin(std::sqrt(2.0 * t), 1.0);
  struct Point {
    double x, y, w;
  };
  std::vector<Point> points;
  for (std::size_t i = 0; i + 1 < kCuts.size(); ++i) {
    const auto crule = gauss_legendre(c_nodes, kCuts[i], kCuts[i + 1]);
    for (std::size_t a = 0; a < crule.size(); ++a) {
      const double c = crule.nodes[a];
      const double rmax = 2.0 * (kBox - std::fabs(c));
      double lo = 0.0, width = sigma;
      while (lo < rmax) {
        const double hi = std::fmin(rmax, lo + width);
        const auto rrule = gauss_legendre(r_nodes, lo, hi);
        for (std::size_t b = 0; b < rrule.size(); ++b) {
          const double r = rrule.nodes[b];
          points.push_back({c - 0.5 * r, c + 0.5 * r, crule.weights[a] * rrule.weights[b]});
        }
        lo = hi;
        if (lo >= sigma) width *= 2.0;
      }
    }
  }
  std::vector<double> values(points.size());
  DiscretizationOptions options;
  options.nodes = nyst;
  options.execution = Execution::kSerial;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < points.size(); ++k) {
    const TimeSegment segs[2] = {{0.0, points[k].x, points[k].x + kDefaultCutoff, 1.0},
                                 {t, points[k].y, points[k].y + kDefaultCutoff, 1.0}};
    const DiscretizedOperator op = discretize(segs, options);
    const std::size_t first[1] = {0}, second[1] = {1};
    values[k] = op.determinant() - op.determinant(first) * op.determinant(second);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) sum += points[k].w * values[k];
  return sum;
}

// The joint law of (A(0), A(t)) is symmetric under exchange, so the lower
// triangle contributes the same as the upper one.
double covariance(double t) {
  const double times[2] = {0.0, t};
  const int nyst = default_nodes(times);
  const double coarse = 2.0 * upper_triangle(t, 5, 6, nyst);
  const double fine = 2.0 * upper_triangle(t, 8, 9, nyst);
  if (std::fabs(fine - coarse) > kGridTol) {
    throw NumericError("covariance: integration grid refinement disagrees", coarse, fine);
  }
  return fine;
}

}  // namespace

TwoTimeMoments two_time_moments(double t) {
  require(t > 0.0, "two_time_moments: t must be positive");
  return {tw2_moments().second, covariance(t)};
}

double increment_variance(double t) {
  if (t == 0.0) return 0.0;
  require(t >= 0.02 && t <= 0.5, "increment_variance: t must be 0 or lie in [0.02, 0.5]");
  const TwoTimeMoments mm = two_time_moments(t);
  // Stationarity: Var A(t) = Var A(0).
  return 2.0 * mm.variance - 2.0 * mm.covariance;
}

double long_range_covariance(double t) {
  require(t >= 2.0 && t <= 6.0, "long_range_covariance: t must lie in [2, 6]");
  return covariance(t);
}

namespace {

constexpr double kStep = 0.02;

// Stencil (offsets, weights) for the k-th derivative at 0, k in {1, 2}.
std::pair<std::array<double, 5>, std::array<double, 5>> stencil(int k) {
  const std::array<double, 5> at{-2.0, -1.0, 0.0, 1.0, 2.0};
  if (k == 1) return {at, {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0}};
  return {at, {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0}};
}

}  // namespace

MomentComparison moment_identity_check(const TimeGrid& grid, std::span<const MomentBox> boxes) {
  require(!boxes.empty(), "moment_identity_check: no boxes");
  int total = 0;
  for (const auto& b : boxes) {
    require(b.time_index < grid.size(), "moment_identity_check: time index out of range");
    require(b.k == 1 || b.k == 2, "moment_identity_check: k must be 1 or 2");
    require(b.hi >= b.lo && b.lo >= kKernelMinArgument, "moment_identity_check: bad interval");
    total += b.k;
  }
  require(total <= 3, "moment_identity_check: total order must be <= 3");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (boxes[i].time_index != boxes[j].time_index) continue;
      require(boxes[i].hi <= boxes[j].lo || boxes[j].hi <= boxes[i].lo,
              "moment_identity_check: intervals on one time line overlap");
    }
  }
  for (const auto& b : boxes) {
    if (b.hi == b.lo) return {0.0, 0.0};
  }

  // Left side: (-1)^k times the mixed lambda-derivative at 0 of
  // det(I - sum lambda_i K chi_{B_i}), by tensor finite differences.
  std::vector<TimeSegment> segments;
  for (const auto& b : boxes) segments.push_back({grid.times()[b.time_index], b.lo, b.hi, 0.0});
  DiscretizationOptions options;
  options.nodes = 48;
  const DiscretizedOperator base = discretize(segments, options);
  double lhs = 0.0;
  const std::size_t nb = boxes.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < nb; ++i) combos *= 5;
  for (std::size_t code = 0; code < combos; ++code) {
    DiscretizedOperator op = base;
    double coefficient = 1.0;
    std::size_t rest = code;
    for (std::size_t i = 0; i < nb; ++i) {
      const auto [at, w] = stencil(boxes[i].k);
      const std::size_t s = rest % 5;
      rest /= 5;
      coefficient *= w[s] / std::pow(kStep, boxes[i].k);
      op.segment_weight[i] = at[s] * kStep;
    }
    if (coefficient == 0.0) continue;
    lhs += coefficient * op.determinant();
  }
  if (total % 2 == 1) lhs = -lhs;

  // Right side: integral of the correlation function over the box product.
  constexpr int kPerBox = 12;
  std::vector<QuadratureRule> rules;
  std::vector<double> point_times;
  for (const auto& b : boxes) {
    for (int r = 0; r < b.k; ++r) {
      rules.push_back(gauss_legendre(kPerBox, b.lo, b.hi));
      point_times.push_back(grid.times()[b.time_index]);
    }
  }
  std::size_t count = 1;
  for (std::size_t d = 0; d < rules.size(); ++d) count *= kPerBox;
  std::vector<double> terms(count);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<SpaceTimePoint> pts(rules.size());
    double w = 1.0;
    std::size_t rest = code;
    for (std::size_t d = 0; d < rules.size(); ++d) {
      const std::size_t idx = rest % kPerBox;
      rest /= kPerBox;
      pts[d] = {point_times[d], rules[d].nodes[idx]};
      w *= rules[d].weights[idx];
    }
    terms[code] = w * correlation_R(pts);
  }
  double rhs = 0.0;
  for (double v : terms) rhs += v;
  return {lhs, rhs};
}

}  // namespace airyproc
