#include "airyproc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <json.hpp>

#include "airyproc/errors.hpp"
#include "airyproc/parallel.hpp"
#include "airyproc/png_sim.hpp"
#include "airyproc/special_functions.hpp"

namespace airyproc {

namespace {

constexpr std::size_t kMinConditioned = 500;
constexpr std::uint64_t kPilotTag = 0x70696c6f74ULL;

double brownian_level(std::span<const double> s, std::span<const std::pair<double, double>> w, std::size_t k,
                      double from) {
  const auto [a, b] = w[k];
  if (!(a < b)) return 0.0;
  const double sd = 2.0 * std::sqrt(s[k]);  // erf argument scale for variance 2 s
  if (k + 1 == w.size()) return 0.5 * (std::erf((b - from) / sd) - std::erf((a - from) / sd));
  const auto rule = gauss_legendre(64, a, b);
  return rule.integrate([&](double x) {
    const double dx = x - from;
    const double density = std::exp(-dx * dx / (4.0 * s[k])) / std::sqrt(4.0 * std::numbers::pi * s[k]);
    return density * brownian_level(s, w, k + 1, x);
  });
}

std::int64_t empirical_mode(const std::vector<std::int64_t>& values) {
  std::map<std::int64_t, std::size_t> counts;
  for (auto v : values) ++counts[v];
  std::int64_t mode = 0;
  std::size_t best = 0;
  for (const auto& [v, c] : counts) {
    if (c > best) {
      best = c;
      mode = v;
    }
  }
  return mode;
}

ProbabilityEstimate binomial(std::size_t hits, std::size_t n) {
  ProbabilityEstimate e;
  e.n = n;
  if (n == 0) return e;
  e.p = static_cast<double>(hits) / static_cast<double>(n);
  e.se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(n));
  return e;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void PngExperimentPlan::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("plan: q must lie in (0, 1)");
  if (N < 4) throw DomainError("plan: N must be >= 4");
  if (!(gamma > 0.0 && gamma < 2.0 / 3.0)) throw DomainError("plan: gamma must lie in (0, 2/3)");
  if (s_gaps.empty() || s_gaps.size() > 4) throw DomainError("plan: 1 to 4 gaps");
  if (windows.size() != s_gaps.size()) throw DomainError("plan: one window per gap");
  for (double s : s_gaps) {
    if (!(s > 0.0)) throw DomainError("plan: gaps must be positive");
  }
  for (const auto& [a, b] : windows) {
    if (!(a <= b)) throw DomainError("plan: windows need a <= b");
  }
  if (replicas < 10000) throw DomainError("plan: at least 1e4 replicas");
  if (!J1 && pilot_replicas < 1000) throw DomainError("plan: pilot needs at least 1000 replicas");
}

double gaussian_window_target(std::span<const double> s_gaps, std::span<const std::pair<double, double>> windows) {
  if (s_gaps.size() != windows.size() || windows.empty() || windows.size() > 4) {
    throw DomainError("gaussian_window_target: need 1 to 4 windows, one per gap");
  }
  for (double s : s_gaps) {
    if (!(s > 0.0)) throw DomainError("gaussian_window_target: gaps must be positive");
  }
  return brownian_level(s_gaps, windows, 0, 0.0);
}

LatticeLayout lattice_layout(const PngExperimentPlan& plan, std::int64_t J1) {
  plan.validate();
  const PngScaling sc(plan.q);
  const double n = static_cast<double>(plan.N);
  const double per_tau = sc.space * std::pow(n, 2.0 / 3.0);
  const double per_s = sc.space * std::pow(n, plan.gamma);
  const double height_scale = sc.d * std::pow(n, plan.gamma / 2.0);

  LatticeLayout out;
  out.J1 = J1;
  long K = std::lround(per_tau * plan.tau1);
  out.sites.push_back(static_cast<int>(2 * K));
  for (std::size_t i = 0; i < plan.s_gaps.size(); ++i) {
    const long step = std::max(1L, std::lround(per_s * plan.s_gaps[i]));
    K += step;
    out.sites.push_back(static_cast<int>(2 * K));
    out.s_realized.push_back(static_cast<double>(step) / per_s);
    const auto [a, b] = plan.windows[i];
    const auto lo = static_cast<std::int64_t>(std::ceil(static_cast<double>(J1) + a * height_scale - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(static_cast<double>(J1) + b * height_scale + 1e-9));
    out.height_windows.emplace_back(lo, hi);
    if (lo > hi) {
      out.windows_realized.emplace_back(0.0, 0.0);
    } else {
      out.windows_realized.emplace_back((static_cast<double>(lo - J1) - 0.5) / height_scale,
                                        (static_cast<double>(hi - J1) + 0.5) / height_scale);
    }
  }
  for (int site : out.sites) {
    if (std::abs(site) > 2 * plan.N - 2) throw DomainError("plan: sites leave the growth cone |x| <= 2N - 2");
  }
  return out;
}

ExperimentReport run_png_brownian_experiment(const PngExperimentPlan& plan) {
  const auto start = std::chrono::steady_clock::now();
  plan.validate();
  const PngScaling sc(plan.q);
  const int final_time = 2 * plan.N - 1;

  ExperimentReport r;
  r.plan = plan;
  std::int64_t J1 = 0;
  if (plan.J1) {
    J1 = *plan.J1;
  } else {
    const auto probe = lattice_layout(plan, 0);
    const LightConeSimulator pilot(plan.q, final_time, {probe.sites[0]});
    J1 = empirical_mode(simulate_replicas(pilot, derive_stream(plan.master_seed, kPilotTag), plan.pilot_replicas));
  }
  r.layout = lattice_layout(plan, J1);

  const LightConeSimulator sim(plan.q, final_time, r.layout.sites);
  r.cells_per_replica = sim.cells();
  if (static_cast<double>(sim.cells()) * static_cast<double>(plan.replicas) > plan.cell_budget) {
    throw DomainError("plan: replicas x cells exceeds the compute budget");
  }
  const auto heights = simulate_replicas(sim, plan.master_seed, plan.replicas);
  const std::size_t width = r.layout.sites.size();
  const std::size_t windows = width - 1;

  std::vector<double> scaled(plan.replicas);
  const double n13 = std::cbrt(static_cast<double>(plan.N));
  const double tau1 = r.layout.sites[0] / (2.0 * sc.space * n13 * n13);
  std::size_t cond = 0, joint = 0;
  std::vector<std::size_t> marginal(windows, 0);
  for (std::size_t k = 0; k < plan.replicas; ++k) {
    const std::int64_t* row = heights.data() + k * width;
    scaled[k] = (static_cast<double>(row[0]) - sc.mu * plan.N) / (sc.d * n13) + tau1 * tau1;
    if (row[0] != J1) continue;
    ++cond;
    bool all = true;
    for (std::size_t i = 0; i < windows; ++i) {
      const auto [lo, hi] = r.layout.height_windows[i];
      const bool in = row[i + 1] >= lo && row[i + 1] <= hi;
      marginal[i] += in;
      all = all && in;
    }
    joint += all;
  }
  r.conditioned = cond;
  if (cond < kMinConditioned) {
    throw InsufficientDataError("conditioned subsample has " + std::to_string(cond) +
                                " runs (< 500); move J1 to the empirical mode or raise replicas");
  }
  r.joint = binomial(joint, cond);
  for (std::size_t i = 0; i < windows; ++i) r.marginals.push_back(binomial(marginal[i], cond));

  r.gaussian_target = gaussian_window_target(plan.s_gaps, plan.windows);
  r.lattice_target = gaussian_window_target(r.layout.s_realized, r.layout.windows_realized);
  double s_sum = 0.0;
  for (std::size_t i = 0; i < windows; ++i) {
    s_sum += r.layout.s_realized[i];
    const double s_one[1] = {s_sum};
    const std::pair<double, double> w_one[1] = {r.layout.windows_realized[i]};
    r.marginal_targets.push_back(gaussian_window_target(s_one, w_one));
  }

  const double eps = std::pow(static_cast<double>(plan.N), plan.gamma - 2.0 / 3.0);
  std::vector<WindowOffset> offsets;
  for (std::size_t i = 0; i < windows; ++i) {
    offsets.push_back({r.layout.s_realized[i], r.layout.windows_realized[i].first, r.layout.windows_realized[i].second});
  }
  try {
    const double p1 = (static_cast<double>(J1) - sc.mu * plan.N) / (sc.d * n13) + tau1 * tau1;
    r.airy_conditional = conditional_window_probability(tau1, p1, offsets, eps);
  } catch (const DomainError&) {
    r.airy_conditional = std::numeric_limits<double>::quiet_NaN();
  } catch (const NumericError&) {
    r.airy_conditional = std::numeric_limits<double>::quiet_NaN();
  }

  r.ks_distance = ks_distance(scaled, [](double x) {
    if (x < -8.0) return 0.0;
    if (x > 8.0) return 1.0;
    return tw2_cdf(x);
  });
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<AiryBrownianRow> run_airy_brownian_experiment(double t1, double p1, std::span<const double> epsilons,
                                                          std::span<const WindowOffset> offsets) {
  std::vector<double> gaps;
  std::vector<std::pair<double, double>> windows;
  for (const auto& o : offsets) {
    gaps.push_back(o.s_gap);
    windows.emplace_back(o.a, o.b);
  }
  const double target = gaussian_window_target(gaps, windows);
  std::vector<AiryBrownianRow> rows;
  for (double eps : epsilons) {
    AiryBrownianRow row;
    row.epsilon = eps;
    row.estimate = conditional_window_probability(t1, p1, offsets, eps);
    row.gaussian_target = target;
    row.abs_error = std::fabs(row.estimate - target);
    rows.push_back(row);
  }
  return rows;
}

bool error_trend_ok(std::span<const AiryBrownianRow> rows, double slack) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].abs_error > (1.0 + slack) * rows[k - 1].abs_error) return false;
  }
  return true;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 100) throw DomainError("ks_distance: needs at least 100 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    worst = std::max({worst, std::fabs(f - static_cast<double>(i) / n), std::fabs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return worst;
}

std::string report_json(const ExperimentReport& r) {
  using nlohmann::ordered_json;
  const auto& p = r.plan;
  ordered_json plan;
  plan["q"] = p.q;
  plan["N"] = p.N;
  plan["gamma"] = p.gamma;
  plan["tau1"] = p.tau1;
  plan["s_gaps"] = p.s_gaps;
  ordered_json win = ordered_json::array();
  for (const auto& [a, b] : p.windows) win.push_back({a, b});
  plan["windows"] = win;
  plan["replicas"] = p.replicas;
  plan["master_seed"] = p.master_seed;
  plan["J1"] = p.J1 ? ordered_json(*p.J1) : ordered_json(nullptr);
  plan["pilot_replicas"] = p.pilot_replicas;

  ordered_json lattice;
  lattice["sites"] = r.layout.sites;
  lattice["J1"] = r.layout.J1;
  ordered_json hw = ordered_json::array();
  for (const auto& [lo, hi] : r.layout.height_windows) hw.push_back({lo, hi});
  lattice["height_windows"] = hw;
  lattice["s_realized"] = r.layout.s_realized;
  ordered_json wr = ordered_json::array();
  for (const auto& [a, b] : r.layout.windows_realized) wr.push_back({a, b});
  lattice["windows_realized"] = wr;

  auto estimate = [](const ProbabilityEstimate& e) {
    ordered_json j;
    j["p"] = e.p;
    j["se"] = e.se;
    j["n"] = e.n;
    return j;
  };
  ordered_json out;
  out["version"] = AIRYPROC_VERSION;
  out["git_describe"] = AIRYPROC_GIT_DESCRIBE;
  out["plan"] = plan;
  out["lattice"] = lattice;
  out["conditioned"] = r.conditioned;
  out["joint"] = estimate(r.joint);
  ordered_json marg = ordered_json::array();
  for (const auto& e : r.marginals) marg.push_back(estimate(e));
  out["marginals"] = marg;
  out["gaussian_target"] = r.gaussian_target;
  out["lattice_target"] = r.lattice_target;
  out["marginal_targets"] = r.marginal_targets;
  out["airy_conditional"] = std::isnan(r.airy_conditional) ? ordered_json(nullptr) : ordered_json(r.airy_conditional);
  out["ks_distance"] = r.ks_distance;
  return out.dump(2) + "\n";
}

std::string report_csv(const ExperimentReport& r) {
  std::string out = "window,a,b,lo,hi,estimate,se,n,target\n";
  for (std::size_t i = 0; i < r.marginals.size(); ++i) {
    const auto [a, b] = r.layout.windows_realized[i];
    const auto [lo, hi] = r.layout.height_windows[i];
    const auto& e = r.marginals[i];
    out += std::to_string(i + 2) + "," + fmt17(a) + "," + fmt17(b) + "," + std::to_string(lo) + "," +
           std::to_string(hi) + "," + fmt17(e.p) + "," + fmt17(e.se) + "," + std::to_string(e.n) + "," +
           fmt17(r.marginal_targets[i]) + "\n";
  }
  out += "joint,,,,," + fmt17(r.joint.p) + "," + fmt17(r.joint.se) + "," + std::to_string(r.joint.n) + "," +
         fmt17(r.lattice_target) + "\n";
  return out;
}

std::string timing_json(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["runtime_seconds"] = r.runtime_seconds;
  j["cells_per_replica"] = r.cells_per_replica;
  j["replicas"] = r.plan.replicas;
  j["threads"] = current_threads();
  return j.dump(2) + "\n";
}

}  // namespace airyproc
