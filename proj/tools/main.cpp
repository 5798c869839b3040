#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "airyproc/airy_kernel.hpp"
#include "airyproc/errors.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/parallel.hpp"
#include "airyproc/png_kernel.hpp"
#include "airyproc/png_sim.hpp"
#include "airyproc/verify.hpp"
#include "cli_support.hpp"

using namespace airyproc;
using airyproc::cli::fmt;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInsufficient = 4;

struct Common {
  std::string out_dir = ".";
  std::string name;
  std::string config;
  std::uint64_t seed = 1;
  int threads = 0;
  bool svg = false;
  cli::Header header;

  std::string path(const std::string& ext) const { return (std::filesystem::path(out_dir) / (name + ext)).string(); }
};

void add_common(CLI::App* app, Common& c) {
  c.name = app->get_name();
  app->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  app->add_option("--name", c.name, "Base name of output files")->capture_default_str();
  app->add_option("--config", c.config, "JSON file with flag values; flags on the command line win");
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--threads", c.threads, std::string("OpenMP threads (0: ") + kThreadsEnv + ", then hardware)");
  app->add_flag("--svg", c.svg, "Also write an SVG plot");
}

void require(CLI::Option* opt) {
  if (opt->count() == 0) throw CLI::RequiredError(opt->get_name());
}

std::vector<double> grid_of(const std::vector<std::string>& parts) {
  std::vector<double> out;
  for (const auto& p : parts) {
    const auto g = cli::parse_grid(p);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

std::vector<std::pair<double, double>> windows_of(const std::vector<std::string>& parts) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : parts) out.push_back(cli::parse_window(p));
  return out;
}

std::vector<WindowOffset> offsets_of(const std::vector<double>& gaps, const std::vector<std::string>& windows) {
  const auto w = windows_of(windows);
  if (w.size() != gaps.size()) throw CLI::ValidationError("--windows", "need one window per entry of --s-gaps");
  std::vector<WindowOffset> out;
  for (std::size_t i = 0; i < gaps.size(); ++i) out.push_back({gaps[i], w[i].first, w[i].second});
  return out;
}

void prepare(CLI::App* app, Common& c) {
  if (!c.config.empty()) cli::apply_json_config(*app, c.config);
  std::filesystem::create_directories(c.out_dir);
  set_threads(c.threads);
  c.header.seed = std::to_string(c.seed);
}

// ---------------------------------------------------------------- kernel

struct KernelArgs {
  Common c;
  double s = 0.0, t = 0.0;
  std::vector<std::string> x, y;
  bool heat = false;
  bool okounkov = false;
  std::vector<double> alpha{0.25, 0.5, 1.0};
  CLI::Option* x_opt = nullptr;
  CLI::Option* y_opt = nullptr;
};

int run_kernel(CLI::App* app, KernelArgs& a) {
  prepare(app, a.c);
  if (a.okounkov) {
    const std::vector<double> pts{-2.0, -0.5, 0.0, 1.0, 2.0};
    std::string csv = "alpha,x,y,quadrature,closed_form,residual\n";
    double worst = 0.0;
    for (double al : a.alpha) {
      for (double x : pts) {
        for (double y : pts) {
          const double lhs = heat_integral_quadrature(al, x, y), rhs = heat_phi(al, x, y);
          worst = std::max(worst, std::fabs(lhs - rhs));
          csv += fmt(al) + "," + fmt(x) + "," + fmt(y) + "," + fmt(lhs) + "," + fmt(rhs) + "," + fmt(lhs - rhs) + "\n";
        }
      }
    }
    cli::write_csv(a.c.path(".csv"), a.c.header, csv);
    std::cout << "max |residual| = " << fmt(worst) << " over " << a.alpha.size() * pts.size() * pts.size()
              << " points\n";
    return worst <= 1e-8 ? 0 : kExitNumeric;
  }
  require(a.x_opt);
  require(a.y_opt);
  const auto xs = grid_of(a.x), ys = grid_of(a.y);
  std::string csv = "s,t,x,y,value\n";
  cli::Series series{a.heat ? "heat_phi" : "kernel", {}, {}};
  for (double x : xs) {
    for (double y : ys) {
      const double v = a.heat ? heat_phi(a.t - a.s, x, y) : extended_airy_kernel(a.s, a.t, x, y);
      csv += fmt(a.s) + "," + fmt(a.t) + "," + fmt(x) + "," + fmt(y) + "," + fmt(v) + "\n";
      if (y == ys.front()) {
        series.x.push_back(x);
        series.y.push_back(v);
      }
    }
  }
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  if (a.c.svg) {
    cli::write_svg(a.c.path(".svg"), a.c.header,
                   cli::line_plot("kernel at y = " + fmt(ys.front()), "x", "value", {series}));
  }
  std::cout << xs.size() * ys.size() << " rows written to " << a.c.path(".csv") << "\n";
  return 0;
}

// ---------------------------------------------------------------- tw2 / gap / conditional

struct Tw2Args {
  Common c;
  std::vector<std::string> grid;
  bool pdf = false;
  CLI::Option* grid_opt = nullptr;
};

int run_tw2(CLI::App* app, Tw2Args& a) {
  prepare(app, a.c);
  require(a.grid_opt);
  const auto s = grid_of(a.grid);
  std::string csv = a.pdf ? "s,cdf,pdf\n" : "s,cdf\n";
  cli::Series cdf{"F2", {}, {}}, pdf{"F2'", {}, {}, "#d62728"};
  for (double v : s) {
    const double f = tw2_cdf(v);
    csv += fmt(v) + "," + fmt(f);
    cdf.x.push_back(v);
    cdf.y.push_back(f);
    if (a.pdf) {
      const double d = tw2_pdf(v);
      csv += "," + fmt(d);
      pdf.x.push_back(v);
      pdf.y.push_back(d);
    }
    csv += "\n";
  }
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  if (a.c.svg) {
    std::vector<cli::Series> all{cdf};
    if (a.pdf) all.push_back(pdf);
    cli::write_svg(a.c.path(".svg"), a.c.header, cli::line_plot("Tracy-Widom GUE", "s", "", all));
  }
  std::cout << s.size() << " rows written to " << a.c.path(".csv") << "\n";
  return 0;
}

struct GapArgs {
  Common c;
  std::vector<double> times, thresholds;
  CLI::Option* times_opt = nullptr;
  CLI::Option* thr_opt = nullptr;
};

int run_gap(CLI::App* app, GapArgs& a) {
  prepare(app, a.c);
  require(a.times_opt);
  require(a.thr_opt);
  if (a.times.size() != a.thresholds.size()) {
    throw CLI::ValidationError("--thresholds", "need one threshold per time");
  }
  const double p = gap_probability(TimeGrid(a.times, a.thresholds));
  std::string csv;
  for (std::size_t i = 0; i < a.times.size(); ++i) csv += "t" + std::to_string(i + 1) + ",";
  for (std::size_t i = 0; i < a.times.size(); ++i) csv += "xi" + std::to_string(i + 1) + ",";
  csv += "probability\n";
  for (double t : a.times) csv += fmt(t) + ",";
  for (double x : a.thresholds) csv += fmt(x) + ",";
  csv += fmt(p) + "\n";
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  std::cout << fmt(p) << "\n";
  return 0;
}

struct ConditionalArgs {
  Common c;
  double t1 = 0.0, p1 = -1.0;
  std::vector<double> epsilons;
  std::vector<double> s_gaps{1.0};
  std::vector<std::string> windows{"-1:1"};
  CLI::Option* eps_opt = nullptr;
};

void add_conditional_options(CLI::App* sub, ConditionalArgs& a) {
  add_common(sub, a.c);
  sub->add_option("--t1", a.t1, "Conditioning time")->capture_default_str();
  sub->add_option("--p1", a.p1, "Conditioning value A(t1)")->capture_default_str();
  a.eps_opt = sub->add_option("--epsilons", a.epsilons, "Time scales, e.g. 0.2,0.1,0.05")->delimiter(',');
  sub->add_option("--s-gaps", a.s_gaps, "Gaps s_2, ..., s_m in units of epsilon")->delimiter(',')->capture_default_str();
  sub->add_option("--windows", a.windows, "Windows a:b in units of sqrt(epsilon), one per gap")
      ->delimiter(',')
      ->capture_default_str();
}

int run_conditional(CLI::App* app, ConditionalArgs& a) {
  prepare(app, a.c);
  require(a.eps_opt);
  const auto offsets = offsets_of(a.s_gaps, a.windows);
  const auto rows = run_airy_brownian_experiment(a.t1, a.p1, a.epsilons, offsets);
  std::string csv = "epsilon,estimate,gaussian_target,abs_error\n";
  cli::Series est{"conditional", {}, {}, "#1f77b4", true}, tgt{"Gaussian", {}, {}, "#d62728"};
  for (const auto& r : rows) {
    csv += fmt(r.epsilon) + "," + fmt(r.estimate) + "," + fmt(r.gaussian_target) + "," + fmt(r.abs_error) + "\n";
    est.x.push_back(r.epsilon);
    est.y.push_back(r.estimate);
    tgt.x.push_back(r.epsilon);
    tgt.y.push_back(r.gaussian_target);
  }
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  if (a.c.svg) {
    cli::write_svg(a.c.path(".svg"), a.c.header,
                   cli::line_plot("conditional window probability", "epsilon", "probability", {est, tgt}));
  }
  for (const auto& r : rows) std::cout << "eps " << fmt(r.epsilon) << "  |error| " << fmt(r.abs_error) << "\n";
  std::cout << "error trend: " << (error_trend_ok(rows) ? "decreasing" : "not decreasing") << "\n";
  return 0;
}

// ---------------------------------------------------------------- png

struct PngArgs {
  Common c;
  int n = 50;
  double q = 0.25;
  bool coupling = false;
  int seeds = 1;
  bool log_noise = false;
};

int run_png(CLI::App* app, PngArgs& a) {
  prepare(app, a.c);
  if (a.coupling) {
    if (a.seeds < 1) throw CLI::ValidationError("--seeds", "must be >= 1");
    std::string csv = "seed,exact,i,j\n";
    int exact = 0;
    for (int k = 0; k < a.seeds; ++k) {
      const auto seed = a.c.seed + static_cast<std::uint64_t>(k);
      const auto r = coupling_check(seed, a.n, a.q);
      exact += r.exact;
      csv += std::to_string(seed) + "," + (r.exact ? "1" : "0") + "," + std::to_string(r.i) + "," +
             std::to_string(r.j) + "\n";
      if (!r.exact) std::cout << r.report << "\n";
    }
    cli::write_csv(a.c.path(".csv"), a.c.header, csv);
    std::cout << exact << "/" << a.seeds << " exact\n";
    return exact == a.seeds ? 0 : kExitNumeric;
  }
  PngConfig cfg{a.q, 2 * a.n - 1, a.c.seed, a.log_noise};
  const HeightField f = simulate_png(cfg);
  std::string csv = "x,h\n";
  cli::Series profile{"h(x, 2N-1)", {}, {}};
  for (int x = -(2 * a.n - 2); x <= 2 * a.n - 2; ++x) {
    csv += std::to_string(x) + "," + std::to_string(f.height(x)) + "\n";
    profile.x.push_back(x);
    profile.y.push_back(static_cast<double>(f.height(x)));
  }
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  if (a.log_noise) {
    std::string noise = "t,x,value\n";
    for (const auto& e : f.noise_log()) {
      noise += std::to_string(e.t) + "," + std::to_string(e.x) + "," + std::to_string(e.value) + "\n";
    }
    cli::write_csv(a.c.path(".noise.csv"), a.c.header, noise);
  }
  if (a.c.svg) {
    cli::write_svg(a.c.path(".svg"), a.c.header, cli::line_plot("PNG interface", "x", "height", {profile}));
  }
  std::cout << "h(0, " << 2 * a.n - 1 << ") = " << f.height(0) << "\n";
  return 0;
}

// ---------------------------------------------------------------- png-kernel

struct PngKernelArgs {
  Common c;
  double q = 0.25;
  int n = 1;
  int u = 0;
  bool n1 = false, kernel_limit = false, phi_gaussian = false;
  std::vector<std::string> thresholds;
  std::vector<int> ns{32, 64, 128, 256};
  double tau = 0.0, tau_prime = 0.0, xp = 0.0, yp = 0.0;
  double gamma = 1.0 / 3.0, s_gap = 1.0;
  CLI::Option* thr_opt = nullptr;
};

int run_png_kernel(CLI::App* app, PngKernelArgs& a) {
  prepare(app, a.c);
  if (!(a.q > 0.0 && a.q < 1.0)) throw CLI::ValidationError("--q", "must lie in (0, 1)");
  if (a.n1) {
    const auto p = PngKernelParams::defaults(std::sqrt(a.q), 1);
    std::string csv = "threshold,kernel,geometric,abs_error\n";
    double worst = 0.0;
    for (int m = 0; m <= 8; ++m) {
      const double k = discrete_gap_probability(p, 0, m), g = 1.0 - std::pow(a.q, m + 1);
      worst = std::max(worst, std::fabs(k - g));
      csv += std::to_string(m) + "," + fmt(k) + "," + fmt(g) + "," + fmt(std::fabs(k - g)) + "\n";
    }
    cli::write_csv(a.c.path(".csv"), a.c.header, csv);
    std::cout << "max abs error vs geometric CDF = " << fmt(worst) << "\n";
    return worst <= 1e-9 ? 0 : kExitNumeric;
  }
  if (a.kernel_limit) {
    const auto rows = klemmat_convergence_report(a.q, a.ns, a.tau, a.tau_prime, a.xp, a.yp);
    std::string csv = "N,u,v,x,y,scaled,reference,abs_error\n";
    cli::Series err{"|error|", {}, {}, "#1f77b4", true};
    for (const auto& r : rows) {
      csv += std::to_string(r.N) + "," + std::to_string(r.u) + "," + std::to_string(r.v) + "," + std::to_string(r.x) +
             "," + std::to_string(r.y) + "," + fmt(r.scaled) + "," + fmt(r.reference) + "," + fmt(r.abs_error) + "\n";
      err.x.push_back(r.N);
      err.y.push_back(r.abs_error);
      std::cout << "N " << r.N << "  |error| " << fmt(r.abs_error) << "\n";
    }
    cli::write_csv(a.c.path(".csv"), a.c.header, csv);
    if (a.c.svg) {
      cli::write_svg(a.c.path(".svg"), a.c.header, cli::line_plot("scaled kernel vs Airy limit", "N", "abs error", {err}));
    }
    return 0;
  }
  if (a.phi_gaussian) {
    const auto rows = phi_gaussian_report(a.q, a.ns, a.gamma, a.s_gap);
    std::string csv = "N,gap,s_realized,max_error\n";
    cli::Series err{"max |error|", {}, {}, "#1f77b4", true};
    for (const auto& r : rows) {
      csv += std::to_string(r.N) + "," + std::to_string(r.gap) + "," + fmt(r.s_realized) + "," + fmt(r.max_error) + "\n";
      err.x.push_back(r.N);
      err.y.push_back(r.max_error);
      std::cout << "N " << r.N << "  max |error| " << fmt(r.max_error) << "\n";
    }
    cli::write_csv(a.c.path(".csv"), a.c.header, csv);
    if (a.c.svg) {
      cli::write_svg(a.c.path(".svg"), a.c.header, cli::line_plot("phi vs heat kernel", "N", "max abs error", {err}));
    }
    return 0;
  }
  require(a.thr_opt);
  const auto p = PngKernelParams::defaults(std::sqrt(a.q), a.n);
  std::string csv = "threshold,probability\n";
  cli::Series cdf{"P[top curve <= M]", {}, {}};
  for (double m : grid_of(a.thresholds)) {
    if (m != std::floor(m)) throw CLI::ValidationError("--thresholds", "thresholds must be integers");
    const double g = discrete_gap_probability(p, a.u, static_cast<int>(m));
    csv += std::to_string(static_cast<long>(m)) + "," + fmt(g) + "\n";
    cdf.x.push_back(m);
    cdf.y.push_back(g);
  }
  cli::write_csv(a.c.path(".csv"), a.c.header, csv);
  if (a.c.svg) cli::write_svg(a.c.path(".svg"), a.c.header, cli::line_plot("finite-N gap probability", "M", "", {cdf}));
  std::cout << cdf.x.size() << " rows written to " << a.c.path(".csv") << "\n";
  return 0;
}

// ---------------------------------------------------------------- verify

struct PngBrownianArgs {
  Common c;
  PngExperimentPlan plan;
  std::vector<std::string> windows{"-1:1"};
  std::optional<std::int64_t> j1;
};

int run_png_brownian(CLI::App* app, PngBrownianArgs& a) {
  prepare(app, a.c);
  a.plan.master_seed = a.c.seed;
  a.plan.windows = windows_of(a.windows);
  a.plan.J1 = a.j1;
  const auto r = run_png_brownian_experiment(a.plan);
  cli::write_json(a.c.path(".json"), a.c.header, report_json(r));
  cli::write_csv(a.c.path(".csv"), a.c.header, report_csv(r));
  cli::write_json(a.c.path(".timing.json"), a.c.header, timing_json(r));
  if (a.c.svg) {
    cli::Series est{"estimate", {}, {}, "#1f77b4", true}, tgt{"lattice Gaussian", {}, {}, "#d62728", true};
    cli::Series airy{"Airy conditional", {}, {}, "#2ca02c", true};
    for (std::size_t i = 0; i < r.marginals.size(); ++i) {
      const double x = static_cast<double>(i + 2);
      est.x.push_back(x);
      est.y.push_back(r.marginals[i].p);
      tgt.x.push_back(x);
      tgt.y.push_back(r.marginal_targets[i]);
    }
    airy.x.push_back(static_cast<double>(r.marginals.size() + 2));
    airy.y.push_back(r.airy_conditional);
    est.x.push_back(static_cast<double>(r.marginals.size() + 2));
    est.y.push_back(r.joint.p);
    tgt.x.push_back(static_cast<double>(r.marginals.size() + 2));
    tgt.y.push_back(r.lattice_target);
    cli::write_svg(a.c.path(".svg"), a.c.header,
                   cli::line_plot("conditioned PNG windows (last point: joint)", "window", "probability", {est, tgt, airy}));
  }
  std::cout << "conditioned " << r.conditioned << "  estimate " << fmt(r.joint.p) << " +- " << fmt(r.joint.se)
            << "  Gaussian " << fmt(r.gaussian_target) << "  lattice Gaussian " << fmt(r.lattice_target) << "\n";
  return 0;
}

std::string invocation(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.find_first_of(" \t\"'") != std::string::npos) arg = "'" + arg + "'";
    out += (i ? " " : "") + arg;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airy process and polynuclear growth numerics"};
  app.set_version_flag("--version", std::string(AIRYPROC_VERSION) + " (" + AIRYPROC_GIT_DESCRIBE + ")");
  app.require_subcommand(1);

  KernelArgs kernel;
  auto* kernel_cmd = app.add_subcommand("kernel", "Extended Airy kernel or heat kernel on a grid");
  add_common(kernel_cmd, kernel.c);
  kernel_cmd->add_option("--s", kernel.s, "First time")->capture_default_str();
  kernel_cmd->add_option("--t", kernel.t, "Second time")->capture_default_str();
  kernel.x_opt = kernel_cmd->add_option("--x-grid,--x", kernel.x, "x values: start:stop:step or a,b,c");
  kernel.y_opt = kernel_cmd->add_option("--y-grid,--y", kernel.y, "y values: start:stop:step or a,b,c");
  kernel_cmd->add_flag("--heat", kernel.heat, "Evaluate the heat kernel with alpha = t - s");
  kernel_cmd->add_flag("--okounkov-check", kernel.okounkov, "Quadrature vs closed form of the heat-kernel identity");
  kernel_cmd->add_option("--alpha", kernel.alpha, "alpha values for --okounkov-check")->delimiter(',');

  Tw2Args tw2;
  auto* tw2_cmd = app.add_subcommand("tw2", "Tracy-Widom GUE distribution table");
  add_common(tw2_cmd, tw2.c);
  tw2.grid_opt = tw2_cmd->add_option("--s-grid", tw2.grid, "s values: start:stop:step or a,b,c");
  tw2_cmd->add_flag("--pdf", tw2.pdf, "Add the density column");

  GapArgs gap;
  auto* gap_cmd = app.add_subcommand("gap", "P[A(t_i) <= xi_i for all i]");
  add_common(gap_cmd, gap.c);
  gap.times_opt = gap_cmd->add_option("--times", gap.times, "Times t_1 < ... < t_m")->delimiter(',');
  gap.thr_opt = gap_cmd->add_option("--thresholds", gap.thresholds, "Thresholds xi_i")->delimiter(',');

  ConditionalArgs cond;
  auto* cond_cmd = app.add_subcommand("conditional", "Conditional window probabilities against Gaussian targets");
  add_conditional_options(cond_cmd, cond);

  PngArgs png;
  auto* png_cmd = app.add_subcommand("png", "Discrete polynuclear growth");
  add_common(png_cmd, png.c);
  png_cmd->add_option("--n", png.n, "Run to time 2N - 1")->capture_default_str()->check(CLI::Range(1, 100000));
  png_cmd->add_option("--q", png.q, "Geometric parameter")->capture_default_str();
  png_cmd->add_flag("--coupling-check", png.coupling, "Compare with last-passage percolation on --seeds seeds");
  png_cmd->add_option("--seeds", png.seeds, "Number of seeds for --coupling-check")->capture_default_str();
  png_cmd->add_flag("--log-noise", png.log_noise, "Also write the nucleation events");

  PngKernelArgs pk;
  auto* pk_cmd = app.add_subcommand("png-kernel", "Finite-N PNG kernel");
  add_common(pk_cmd, pk.c);
  pk_cmd->add_option("--q", pk.q, "Geometric parameter")->capture_default_str();
  pk_cmd->add_option("--n", pk.n, "N")->capture_default_str();
  pk_cmd->add_option("--u", pk.u, "Time index (time 2u)")->capture_default_str();
  pk.thr_opt = pk_cmd->add_option("--thresholds", pk.thresholds, "Integer thresholds M");
  pk_cmd->add_flag("--n1-exact", pk.n1, "N = 1 against 1 - q^(M+1), M = 0..8");
  pk_cmd->add_flag("--kernel-limit", pk.kernel_limit, "Scaled kernel against its Airy limit over --ns");
  pk_cmd->add_flag("--phi-gaussian", pk.phi_gaussian, "phi against the heat kernel over --ns");
  pk_cmd->add_option("--ns", pk.ns, "Values of N for the reports")->delimiter(',')->capture_default_str();
  pk_cmd->add_option("--tau", pk.tau, "tau")->capture_default_str();
  pk_cmd->add_option("--tau-prime", pk.tau_prime, "tau'")->capture_default_str();
  pk_cmd->add_option("--xp", pk.xp, "x'")->capture_default_str();
  pk_cmd->add_option("--yp", pk.yp, "y'")->capture_default_str();
  pk_cmd->add_option("--gamma", pk.gamma, "gamma for --phi-gaussian")->capture_default_str();
  pk_cmd->add_option("--s-gap", pk.s_gap, "s for --phi-gaussian")->capture_default_str();

  auto* verify_cmd = app.add_subcommand("verify", "Verification experiments against Brownian limits");
  verify_cmd->require_subcommand(1);
  PngBrownianArgs pb;
  auto* pb_cmd = verify_cmd->add_subcommand("png-brownian", "Conditioned PNG Monte Carlo against Brownian targets");
  add_common(pb_cmd, pb.c);
  pb_cmd->add_option("--q", pb.plan.q, "Geometric parameter")->capture_default_str();
  pb_cmd->add_option("--n", pb.plan.N, "N")->capture_default_str();
  pb_cmd->add_option("--gamma", pb.plan.gamma, "Gap exponent")->capture_default_str();
  pb_cmd->add_option("--tau1", pb.plan.tau1, "Conditioning time")->capture_default_str();
  pb_cmd->add_option("--s-gaps", pb.plan.s_gaps, "s_2, ..., s_m")->delimiter(',')->capture_default_str();
  pb_cmd->add_option("--windows", pb.windows, "Windows a:b, one per gap")->delimiter(',')->capture_default_str();
  pb_cmd->add_option("--replicas", pb.plan.replicas, "Replicas")->capture_default_str();
  pb_cmd->add_option("--pilot-replicas", pb.plan.pilot_replicas, "Pilot replicas for the J1 mode")->capture_default_str();
  pb_cmd->add_option("--j1", pb.j1, "Conditioning height (default: pilot mode)");
  pb_cmd->add_option("--budget", pb.plan.cell_budget, "Maximum replicas x cells")->capture_default_str();
  ConditionalArgs ab;
  auto* ab_cmd = verify_cmd->add_subcommand("airy-brownian", "Airy-process conditional probabilities over epsilon");
  add_conditional_options(ab_cmd, ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string inv = invocation(argc, argv);
  const std::string version = std::string(AIRYPROC_VERSION) + " (" + AIRYPROC_GIT_DESCRIBE + ")";
  for (Common* c : {&kernel.c, &tw2.c, &gap.c, &cond.c, &png.c, &pk.c, &pb.c, &ab.c}) {
    c->header.invocation = inv;
    c->header.version = version;
  }

  try {
    if (kernel_cmd->parsed()) return run_kernel(kernel_cmd, kernel);
    if (tw2_cmd->parsed()) return run_tw2(tw2_cmd, tw2);
    if (gap_cmd->parsed()) return run_gap(gap_cmd, gap);
    if (cond_cmd->parsed()) return run_conditional(cond_cmd, cond);
    if (png_cmd->parsed()) return run_png(png_cmd, png);
    if (pk_cmd->parsed()) return run_png_kernel(pk_cmd, pk);
    if (pb_cmd->parsed()) return run_png_brownian(pb_cmd, pb);
    if (ab_cmd->parsed()) return run_conditional(ab_cmd, ab);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: leave --j1 unset so the pilot mode is used, or raise --replicas\n";
    return kExitInsufficient;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
