#include "airyproc/png_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "airyproc/errors.hpp"

namespace airyproc {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double bits_to_uniform(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double SplitMix64::uniform() noexcept { return bits_to_uniform(next()); }

double site_uniform(std::uint64_t stream, std::int64_t t, std::int64_t x) noexcept {
  const std::uint64_t key = (static_cast<std::uint64_t>(t) << 32) ^ static_cast<std::uint32_t>(x);
  return bits_to_uniform(mix64(stream ^ mix64(key)));
}

GeometricSampler::GeometricSampler(double q) : q_(q), log_q_(std::log(q)) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("geometric: q must lie in (0, 1)");
  double p = q;
  for (int k = 1; k <= 16; ++k) {
    powers_.push_back(p);
    p *= q;
  }
}

std::int64_t GeometricSampler::operator()(double u) const noexcept {
  std::int64_t m = 0;
  for (double p : powers_) {
    if (u > p) return m;
    ++m;
  }
  return static_cast<std::int64_t>(std::floor(std::log(u) / log_q_));
}

std::int64_t sample_geometric(double q, SplitMix64& rng) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("sample_geometric: q must lie in (0, 1)");
  return static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / std::log(q)));
}

void validate(const PngConfig& config) {
  if (!(config.q > 0.0 && config.q < 1.0)) throw DomainError("PngConfig: q must lie in (0, 1)");
  if (config.n_steps < 1) throw DomainError("PngConfig: n_steps must be >= 1");
}

NoiseFn seeded_noise(double q, std::uint64_t seed) {
  const GeometricSampler sampler(q);
  return [sampler, seed](int t, int x) { return sampler(site_uniform(seed, t, x)); };
}

NoiseFn zero_noise() {
  return [](int, int) -> std::int64_t { return 0; };
}

NoiseFn replay_noise(std::span<const NoiseEntry> log) {
  std::map<std::pair<int, int>, std::int64_t> table;
  for (const auto& e : log) table[{e.t, e.x}] = e.value;
  return [table = std::move(table)](int t, int x) -> std::int64_t {
    const auto it = table.find({t, x});
    return it == table.end() ? 0 : it->second;
  };
}

HeightField::HeightField(int capacity)
    : capacity_(capacity), heights_(static_cast<std::size_t>(2 * capacity + 1), 0) {
  if (capacity < 0) throw DomainError("HeightField: negative capacity");
}

std::int64_t HeightField::height(int x) const noexcept {
  if (x < -capacity_ || x > capacity_) return 0;
  return heights_[static_cast<std::size_t>(x + capacity_)];
}

HeightField png_step(const HeightField& field, const NoiseFn& noise, bool log_noise) {
  const int next = field.t_ + 1;
  if (next > field.capacity_) throw DomainError("png_step: field capacity exhausted");
  HeightField out = field;
  const int c = field.capacity_;
  const auto& h = field.heights_;
  // Only |x| <= next - 1 can be nonzero after the step.
  for (int x = -(next - 1); x <= next - 1; ++x) {
    const auto i = static_cast<std::size_t>(x + c);
    std::int64_t v = h[i];
    if (x - 1 >= -c) v = std::max(v, h[i - 1]);
    if (x + 1 <= c) v = std::max(v, h[i + 1]);
    if (active_site(next, x)) {
      const std::int64_t w = noise(next, x);
      v += w;
      if (log_noise) out.noise_log_.push_back({next, x, w});
    }
    out.heights_[i] = v;
  }
  out.t_ = next;
  return out;
}

HeightField simulate_png(int n_steps, const NoiseFn& noise, bool log_noise) {
  if (n_steps < 1) throw DomainError("simulate_png: n_steps must be >= 1");
  HeightField field(n_steps);
  for (int s = 0; s < n_steps; ++s) field = png_step(field, noise, log_noise);
  return field;
}

HeightField simulate_png(const PngConfig& config) {
  validate(config);
  return simulate_png(config.n_steps, seeded_noise(config.q, config.seed), config.log_noise);
}

LppField sample_lpp_weights(int rows, int cols, double q, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw DomainError("sample_lpp_weights: need rows, cols >= 1");
  SplitMix64 rng(seed);
  LppField f;
  f.rows = rows;
  f.cols = cols;
  f.w.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (auto& v : f.w) v = sample_geometric(q, rng);
  return f;
}

std::int64_t last_passage_G(LppField& field) {
  const int m = field.rows, n = field.cols;
  if (m < 1 || n < 1) throw DomainError("last_passage_G: need M, N >= 1");
  if (field.w.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n)) {
    throw DomainError("last_passage_G: weight matrix has the wrong size");
  }
  field.g.assign(field.w.size(), 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(i * n + j);
      if (field.w[k] < 0) throw DomainError("last_passage_G: negative weight");
      const std::int64_t up = i > 0 ? field.g[k - static_cast<std::size_t>(n)] : 0;
      const std::int64_t left = j > 0 ? field.g[k - 1] : 0;
      field.g[k] = field.w[k] + std::max(up, left);
    }
  }
  return field.g.back();
}

std::int64_t last_passage_G(int rows, int cols, std::span<const std::int64_t> w) {
  LppField f;
  f.rows = rows;
  f.cols = cols;
  f.w.assign(w.begin(), w.end());
  return last_passage_G(f);
}

CouplingResult coupling_check(std::uint64_t seed, int n, double q, std::optional<std::pair<int, int>> corrupt) {
  if (n < 1 || n > 200) throw DomainError("coupling_check: N must lie in [1, 200]");
  LppField lpp = sample_lpp_weights(n, n, q, seed);
  last_passage_G(lpp);

  // omega(i - j, i + j - 1) = w(i, j). Active sites outside the square get 0;
  // none of them lies in the backward cone of a compared site.
  std::vector<NoiseEntry> log;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      std::int64_t v = lpp.weight(i, j);
      if (corrupt && corrupt->first == i && corrupt->second == j) v += 1;
      log.push_back({i + j - 1, i - j, v});
    }
  }
  // G(i, j) with i + j - 1 = t is compared right after step t.
  CouplingResult result;
  HeightField f(2 * n - 1);
  const NoiseFn noise = replay_noise(log);
  for (int t = 1; t <= 2 * n - 1; ++t) {
    f = png_step(f, noise);
    for (int i = std::max(1, t + 1 - n); i <= std::min(n, t); ++i) {
      const int j = t + 1 - i;
      const std::int64_t g = lpp.passage(i, j);
      const std::int64_t h = f.height(i - j);
      if (g != h && result.exact) {
        result.exact = false;
        result.i = i;
        result.j = j;
        result.lpp = g;
        result.png = h;
      }
    }
  }
  if (!result.exact) {
    std::ostringstream os;
    os << "coupling mismatch at (i, j) = (" << result.i << ", " << result.j << "): G = " << result.lpp
       << ", h(" << result.i - result.j << ", " << result.i + result.j - 1 << ") = " << result.png;
    result.report = os.str();
  }
  return result;
}

PngScaling::PngScaling(double q_) : q(q_) {
  if (!(q_ > 0.0 && q_ < 1.0)) throw DomainError("PngScaling: q must lie in (0, 1)");
  const double r = std::sqrt(q_);
  d = std::cbrt(r) * std::cbrt(1.0 + r) / (1.0 - r);
  mu = 2.0 * r / (1.0 - r);
  space = (1.0 + r) / (1.0 - r) / d;
}

double rescale_H(const HeightField& field, double t, double q) {
  const int T = field.t();
  if (T < 1 || T % 2 == 0) throw DomainError("rescale_H: field time must be 2N - 1");
  const int n = (T + 1) / 2;
  const PngScaling s(q);
  const double n13 = std::cbrt(static_cast<double>(n));
  const double k = s.space * n13 * n13 * t;  // half the spatial argument
  const double lower = std::floor(k);
  const double frac = k - lower;
  const auto site_value = [&](double kk) {
    const double x = 2.0 * kk;
    if (std::fabs(x) > T - 1) throw DomainError("rescale_H: site outside the growth cone");
    return (static_cast<double>(field.height(static_cast<int>(x))) - s.mu * n) / (s.d * n13);
  };
  const double a = site_value(lower);
  if (frac == 0.0) return a;
  return (1.0 - frac) * a + frac * site_value(lower + 1.0);
}

LightConeSimulator::LightConeSimulator(double q, int final_time, std::vector<int> sites)
    : sampler_(q), final_time_(final_time), sites_(std::move(sites)) {
  if (final_time < 1) throw DomainError("LightConeSimulator: final time must be >= 1");
  if (sites_.empty()) throw DomainError("LightConeSimulator: no sites");
  const auto [mn, mx] = std::minmax_element(sites_.begin(), sites_.end());
  lo_.resize(static_cast<std::size_t>(final_time) + 1);
  hi_.resize(static_cast<std::size_t>(final_time) + 1);
  for (int t = 1; t <= final_time; ++t) {
    const int reach = final_time - t;
    lo_[static_cast<std::size_t>(t)] = std::max(*mn - reach, -(t - 1));
    hi_[static_cast<std::size_t>(t)] = std::min(*mx + reach, t - 1);
    cells_ += std::max(0, hi_[static_cast<std::size_t>(t)] - lo_[static_cast<std::size_t>(t)] + 1);
  }
}

std::vector<std::int64_t> LightConeSimulator::run(std::uint64_t stream) const {
  const int c = final_time_ + 1;
  std::vector<std::int64_t> prev(static_cast<std::size_t>(2 * c + 1), 0), cur(prev.size(), 0);
  for (int t = 1; t <= final_time_; ++t) {
    const int lo = lo_[static_cast<std::size_t>(t)];
    const int hi = hi_[static_cast<std::size_t>(t)];
    for (int x = lo; x <= hi; ++x) {
      const auto i = static_cast<std::size_t>(x + c);
      std::int64_t v = std::max(prev[i], std::max(prev[i - 1], prev[i + 1]));
      if (((t - x) & 1) != 0) v += sampler_(site_uniform(stream, t, x));
      cur[i] = v;
    }
    std::swap(prev, cur);
  }
  std::vector<std::int64_t> out;
  out.reserve(sites_.size());
  for (int x : sites_) {
    out.push_back(std::abs(x) <= final_time_ + 1 ? prev[static_cast<std::size_t>(x + c)] : 0);
  }
  return out;
}

std::vector<std::int64_t> simulate_replicas(const LightConeSimulator& sim, std::uint64_t master, std::size_t count,
                                            Execution execution) {
  const std::size_t k = sim.sites().size();
  std::vector<std::int64_t> out(count * k);
  const bool parallel = execution == Execution::kParallel;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::size_t r = 0; r < count; ++r) {
    const auto h = sim.run(derive_stream(master, r));
    std::copy(h.begin(), h.end(), out.begin() + static_cast<std::ptrdiff_t>(r * k));
  }
  return out;
}

}  // namespace airyproc
