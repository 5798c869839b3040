#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airyproc/parallel.hpp"

namespace airyproc {

/// 64-bit mixing function (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed of replica `index` under `master`; distinct indices give unrelated streams.
std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) noexcept;

/// Sequential splitmix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

/// Uniform on (0, 1) from the top 52 bits of `bits`, never 0 or 1.
double bits_to_uniform(std::uint64_t bits) noexcept;

/// Uniform on (0, 1) attached to lattice site (t, x) of stream `stream`. A
/// pure function, so a noise field does not depend on evaluation order.
double site_uniform(std::uint64_t stream, std::int64_t t, std::int64_t x) noexcept;

/// Inversion sampler for P[m] = (1 - q) q^m: m = floor(log U / log q), i.e.
/// the largest k with U <= q^k. The first thresholds are tabulated so the
/// common small values avoid the logarithm.
class GeometricSampler {
 public:
  explicit GeometricSampler(double q);
  double q() const noexcept { return q_; }
  std::int64_t operator()(double u) const noexcept;

 private:
  double q_;
  double log_q_;
  std::vector<double> powers_;  // q^1, q^2, ...
};

std::int64_t sample_geometric(double q, SplitMix64& rng);

struct PngConfig {
  double q = 0.25;
  int n_steps = 1;
  std::uint64_t seed = 0;
  bool log_noise = false;
};

/// Validates 0 < q < 1 and n_steps >= 1; throws DomainError otherwise.
void validate(const PngConfig& config);

struct NoiseEntry {
  int t = 0;  // time at which the block is placed
  int x = 0;
  std::int64_t value = 0;
};

/// Noise source: value of omega(x, t) at an active site (|x| <= t - 1 and
/// t - x odd). Never called for inactive sites.
using NoiseFn = std::function<std::int64_t(int t, int x)>;

/// Geometric noise keyed by (seed, t, x) through site_uniform.
NoiseFn seeded_noise(double q, std::uint64_t seed);
/// omega identically 0.
NoiseFn zero_noise();
/// Replays a logged field; sites absent from the log get 0.
NoiseFn replay_noise(std::span<const NoiseEntry> log);

/// True when omega(x, t) may be nonzero.
constexpr bool active_site(int t, int x) noexcept {
  const int ax = x < 0 ? -x : x;
  return ax <= t - 1 && ((t - x) % 2 + 2) % 2 == 1;
}

/// Interface h(., t) on the flat array x in [-capacity, capacity].
class HeightField {
 public:
  explicit HeightField(int capacity = 0);

  int t() const noexcept { return t_; }
  int capacity() const noexcept { return capacity_; }
  /// h(x, t); 0 outside the stored range.
  std::int64_t height(int x) const noexcept;
  const std::vector<std::int64_t>& heights() const noexcept { return heights_; }
  const std::vector<NoiseEntry>& noise_log() const noexcept { return noise_log_; }

  friend HeightField png_step(const HeightField& field, const NoiseFn& noise, bool log_noise);

 private:
  int t_ = 0;
  int capacity_ = 0;
  std::vector<std::int64_t> heights_;
  std::vector<NoiseEntry> noise_log_;
};

/// One step h(x, t+1) = max(h(x-1,t), h(x,t), h(x+1,t)) + omega(x, t+1).
/// Throws DomainError when t + 1 exceeds the field capacity.
HeightField png_step(const HeightField& field, const NoiseFn& noise, bool log_noise = false);

/// Runs config.n_steps steps from the flat initial interface with seeded noise.
HeightField simulate_png(const PngConfig& config);
/// Same with an explicit noise source.
HeightField simulate_png(int n_steps, const NoiseFn& noise, bool log_noise = false);

/// Weights w(i, j) and last-passage times g(i, j), 1-based (i, j) stored at
/// [(i - 1) * cols + (j - 1)].
struct LppField {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> w;
  std::vector<std::int64_t> g;

  std::int64_t weight(int i, int j) const { return w[static_cast<std::size_t>((i - 1) * cols + (j - 1))]; }
  std::int64_t passage(int i, int j) const { return g[static_cast<std::size_t>((i - 1) * cols + (j - 1))]; }
};

/// M x N geometric weights drawn sequentially from SplitMix64(seed).
LppField sample_lpp_weights(int rows, int cols, double q, std::uint64_t seed);

/// Fills g by g(i,j) = w(i,j) + max(g(i-1,j), g(i,j-1)); returns G(M, N).
std::int64_t last_passage_G(LppField& field);
/// G(M, N) for row-major weights w (M x N, nonnegative).
std::int64_t last_passage_G(int rows, int cols, std::span<const std::int64_t> w);

struct CouplingResult {
  bool exact = true;
  int i = 0;  // first violating (i, j) in row-major order, when not exact
  int j = 0;
  std::int64_t lpp = 0;
  std::int64_t png = 0;
  std::string report;
};

/// Draws an N x N weight field, runs PNG on omega(i-j, i+j-1) = w(i,j) and
/// compares G(i,j) with h(i-j, i+j-1) everywhere. `corrupt` adds 1 to the
/// noise at one (i, j) after the mapping, to test the checker.
CouplingResult coupling_check(std::uint64_t seed, int n, double q = 0.25,
                              std::optional<std::pair<int, int>> corrupt = std::nullopt);

/// Scaling constants of the rescaled height.
struct PngScaling {
  double q;
  double d;            // (sqrt q)^{1/3} (1 + sqrt q)^{1/3} / (1 - sqrt q)
  double mu;           // 2 sqrt q / (1 - sqrt q)
  double space;        // (1 + sqrt q) / (1 - sqrt q) / d, so site 2K sits at t = K / (space N^{2/3})
  explicit PngScaling(double q);
};

/// H_N(t) from an interface at time 2N - 1: defined at even sites 2K with
/// 2K = 2 space N^{2/3} t, linear in between. DomainError when a site needed
/// lies outside |x| <= 2N - 2.
double rescale_H(const HeightField& field, double t, double q);

/// Heights h(x_k, T) at the requested sites, simulating only the backward
/// light cone of those sites. Noise from site_uniform(stream, ., .), so the
/// result equals simulate_png with seeded_noise(q, stream) at those sites.
class LightConeSimulator {
 public:
  LightConeSimulator(double q, int final_time, std::vector<int> sites);

  std::vector<std::int64_t> run(std::uint64_t stream) const;
  /// Cells updated per replica.
  std::int64_t cells() const noexcept { return cells_; }
  int final_time() const noexcept { return final_time_; }
  const std::vector<int>& sites() const noexcept { return sites_; }

 private:
  GeometricSampler sampler_;
  int final_time_;
  std::vector<int> sites_;
  std::vector<int> lo_, hi_;  // range updated at each time
  std::int64_t cells_ = 0;
};

/// Heights at `sites` for replicas 0..count-1 under derive_stream(master, r).
/// Row-major [replica][site]; identical for any thread count.
std::vector<std::int64_t> simulate_replicas(const LightConeSimulator& sim, std::uint64_t master,
                                            std::size_t count, Execution execution = Execution::kParallel);

}  // namespace airyproc
