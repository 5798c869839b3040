#include "airyproc/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "airyproc/errors.hpp"

namespace airyproc {
namespace detail {
namespace {

// Ai(0) and -Ai'(0) to long double precision.
constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kMinusAip0 = 0.258819403792806798405183560189203964L;

struct SeriesSums {
  long double v0 = 0.0L;  // value
  long double v1 = 0.0L;  // first derivative
  long double v2 = 0.0L;  // second derivative
};

// Maclaurin sums of the two power-series solutions of y'' = x y:
//   f = sum c_{3k} x^{3k},   g = sum d_k x^{3k+1}.
void maclaurin(long double x, SeriesSums& f, SeriesSums& g) {
  const long double x3 = x * x * x;
  long double c = 1.0L;  // c_{3k}
  long double d = 1.0L;  // d_k
  long double p0 = 1.0L;  // x^{3k}
  long double pm1 = x * x;  // x^{3k-1} starting at k = 1
  long double pm2 = x;  // x^{3k-2} starting at k = 1
  f.v0 = 1.0L;
  g.v0 = x;
  g.v1 = 1.0L;
  for (int k = 1; k < 400; ++k) {
    const long double k3 = 3.0L * k;
    c /= k3 * (k3 - 1.0L);
    d /= (k3 + 1.0L) * k3;
    const long double q0 = p0 * x3;  // x^{3k}
    const long double tf0 = c * q0;
    const long double tf1 = k3 * c * pm1;
    const long double tf2 = k3 * (k3 - 1.0L) * c * pm2;
    const long double tg0 = d * q0 * x;
    const long double tg1 = (k3 + 1.0L) * d * q0;
    const long double tg2 = (k3 + 1.0L) * k3 * d * pm1;
    f.v0 += tf0;
    f.v1 += tf1;
    f.v2 += tf2;
    g.v0 += tg0;
    g.v1 += tg1;
    g.v2 += tg2;
    p0 = q0;
    pm1 *= x3;
    pm2 *= x3;
    const long double biggest =
        std::fmax(std::fmax(std::fabs(tf0), std::fabs(tf1)),
                  std::fmax(std::fmax(std::fabs(tf2), std::fabs(tg0)),
                            std::fmax(std::fabs(tg1), std::fabs(tg2))));
    const long double scale = std::fabs(f.v0) + std::fabs(g.v0) + std::fabs(f.v1) + std::fabs(g.v1) +
                              std::fabs(f.v2) + std::fabs(g.v2);
    if (k > 2 && biggest < 1e-21L * scale) break;
  }
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AsymptoticCoefficients {
  static constexpr int kTerms = 40;
  double u[kTerms];
  double v[kTerms];
  AsymptoticCoefficients() {
    u[0] = 1.0;
    v[0] = 1.0;
    for (int k = 1; k < kTerms; ++k) {
      const double kk = k;
      u[k] = u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) / ((2 * kk - 1) * 216.0 * kk);
      v[k] = -(6 * kk + 1) / (6 * kk - 1) * u[k];
    }
  }
};

const AsymptoticCoefficients& coefficients() {
  static const AsymptoticCoefficients table;
  return table;
}

// Value and zeta-derivative of a truncated asymptotic sum
//   S(zeta) = sum_k sign_k a_k zeta^{-(k0 + step*k)}
// stopped at the smallest term.
struct AsymptoticSum {
  double value = 0.0;
  double derivative = 0.0;
};

AsymptoticSum asymptotic_sum(const double* a, double zeta, int first, int step, bool alternate) {
  AsymptoticSum s;
  const double inv = 1.0 / zeta;
  const double inv_step = step == 1 ? inv : inv * inv;
  double power = first == 0 ? 1.0 : inv;
  double previous = INFINITY;
  int sign = 1;
  for (int idx = first; idx < AsymptoticCoefficients::kTerms; idx += step) {
    const double term = sign * a[idx] * power;
    if (std::fabs(term) > previous) break;
    s.value += term;
    s.derivative -= idx * term * inv;
    previous = std::fabs(term);
    if (previous < 1e-18 * std::fabs(s.value)) break;
    power *= inv_step;
    if (alternate) sign = -sign;
  }
  return s;
}

struct Triple {
  double ai;
  double aip;
  double aipp;
};

// Value only: the two sums f and g without derivatives.
double series_value(double x) {
  const long double xl = x;
  const long double x3 = xl * xl * xl;
  long double c = 1.0L, d = 1.0L, p = 1.0L;
  long double f = 1.0L, g = xl;
  for (int k = 1; k < 400; ++k) {
    const long double k3 = 3.0L * k;
    c /= k3 * (k3 - 1.0L);
    d /= (k3 + 1.0L) * k3;
    p *= x3;
    const long double tf = c * p;
    const long double tg = d * p * xl;
    f += tf;
    g += tg;
    if (std::fabs(tf) + std::fabs(tg) < 1e-21L * (std::fabs(f) + std::fabs(g))) break;
  }
  return static_cast<double>(kAi0 * f - kMinusAip0 * g);
}

Triple series_triple(double x) {
  SeriesSums f, g;
  maclaurin(static_cast<long double>(x), f, g);
  return {static_cast<double>(kAi0 * f.v0 - kMinusAip0 * g.v0),
          static_cast<double>(kAi0 * f.v1 - kMinusAip0 * g.v1),
          static_cast<double>(kAi0 * f.v2 - kMinusAip0 * g.v2)};
}

Triple decaying_triple(double x) {
  const auto& c = coefficients();
  const double sqrt_x = std::sqrt(x);
  const double zeta = 2.0 / 3.0 * x * sqrt_x;
  const double x14 = std::sqrt(sqrt_x);
  const double pref = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  const AsymptoticSum su = asymptotic_sum(c.u, zeta, 0, 1, true);
  const AsymptoticSum sv = asymptotic_sum(c.v, zeta, 0, 1, true);
  const double ai = pref / x14 * su.value;
  const double aip = -x14 * pref * sv.value;
  // d/dx of -x^{1/4} e^{-zeta} S_v(zeta) / (2 sqrt(pi)), dzeta/dx = sqrt(x).
  const double x34 = x14 * sqrt_x;
  const double aipp =
      -pref * (0.25 / x34 * sv.value - x34 * sv.value + x34 * sv.derivative);
  return {ai, aip, aipp};
}

Triple oscillatory_triple(double x) {
  const auto& c = coefficients();
  const double z = -x;
  const double sqrt_z = std::sqrt(z);
  const double zeta = 2.0 / 3.0 * z * sqrt_z;
  const double z14 = std::sqrt(sqrt_z);
  const double theta = zeta - std::numbers::pi / 4.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const AsymptoticSum pu = asymptotic_sum(c.u, zeta, 0, 2, true);
  const AsymptoticSum qu = asymptotic_sum(c.u, zeta, 1, 2, true);
  const AsymptoticSum pv = asymptotic_sum(c.v, zeta, 0, 2, true);
  const AsymptoticSum qv = asymptotic_sum(c.v, zeta, 1, 2, true);
  const double ai = inv_sqrt_pi / z14 * (cos_t * pu.value + sin_t * qu.value);
  const double bracket = sin_t * pv.value - cos_t * qv.value;
  const double aip = inv_sqrt_pi * z14 * bracket;
  // Y(z) = Ai'(-z); Ai''(x) = -dY/dz with dzeta/dz = dtheta/dz = sqrt(z).
  const double dbracket = sqrt_z * (cos_t * pv.value + sin_t * pv.derivative +
                                    sin_t * qv.value - cos_t * qv.derivative);
  const double dY = inv_sqrt_pi * (0.25 / (z14 * sqrt_z) * bracket + z14 * dbracket);
  return {ai, aip, -dY};
}

Triple any_triple(double x) {
  if (x > kSeriesUpper) return decaying_triple(x);
  if (x < kSeriesLower) return oscillatory_triple(x);
  return series_triple(x);
}

void check_range(double x, const char* who) {
  if (!(x >= kAiryMin && x <= kAiryMax)) {
    throw DomainError(std::string(who) + ": argument " + std::to_string(x) +
                      " outside supported range [-60, 40]");
  }
}

}  // namespace

AiryBranch airy_branch(double x) {
  if (x > kSeriesUpper) return AiryBranch::kDecaying;
  if (x < kSeriesLower) return AiryBranch::kOscillatory;
  return AiryBranch::kSeries;
}

AiryPair airy_series(double x) {
  const Triple t = series_triple(x);
  return {t.ai, t.aip};
}
AiryPair airy_decaying(double x) {
  const Triple t = decaying_triple(x);
  return {t.ai, t.aip};
}
AiryPair airy_oscillatory(double x) {
  const Triple t = oscillatory_triple(x);
  return {t.ai, t.aip};
}

AiryPair airy_pair_unchecked(double x) {
  if (x > kAiryMax) return {0.0, 0.0};
  const Triple t = any_triple(x);
  return {t.ai, t.aip};
}

double airy_ai_unchecked(double x) {
  if (x > kAiryMax) return 0.0;
  if (x > kSeriesUpper) return decaying_triple(x).ai;
  if (x < kSeriesLower) return oscillatory_triple(x).ai;
  return series_value(x);
}

namespace {

class ChebyshevAiry {
 public:
  static constexpr double kWidth = 0.25;
  static constexpr int kDegree = 15;
  static constexpr int kIntervals = static_cast<int>((kAiryMax - kAiryMin) / kWidth);

  ChebyshevAiry() : coefficients_(static_cast<std::size_t>(kIntervals) * (kDegree + 1)) {
    constexpr int n = kDegree + 1;
    double values[n];
    for (int iv = 0; iv < kIntervals; ++iv) {
      const double mid = kAiryMin + (iv + 0.5) * kWidth;
      for (int j = 0; j < n; ++j) {
        const double node = std::cos(std::numbers::pi * (j + 0.5) / n);
        values[j] = airy_ai_unchecked(mid + 0.5 * kWidth * node);
      }
      double* c = &coefficients_[static_cast<std::size_t>(iv) * n];
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += values[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
        c[k] = 2.0 * sum / n;
      }
      c[0] *= 0.5;
    }
  }

  double operator()(double x) const {
    const int iv = std::min(kIntervals - 1, static_cast<int>((x - kAiryMin) / kWidth));
    const double mid = kAiryMin + (iv + 0.5) * kWidth;
    const double u = 2.0 * (x - mid) / kWidth;
    const double* c = &coefficients_[static_cast<std::size_t>(iv) * (kDegree + 1)];
    // Clenshaw recurrence.
    double b1 = 0.0, b2 = 0.0;
    for (int k = kDegree; k >= 1; --k) {
      const double b0 = 2.0 * u * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return u * b1 - b2 + c[0];
  }

 private:
  std::vector<double> coefficients_;
};

}  // namespace

double fast_airy_ai(double x) {
  static const ChebyshevAiry table;
  if (x > kAiryMax) return 0.0;
  if (x < kAiryMin) return airy_ai_unchecked(x);
  return table(x);
}

}  // namespace detail

AiryPair airy_pair(double x) {
  detail::check_range(x, "airy_pair");
  return detail::airy_pair_unchecked(x);
}

double airy_ai(double x) {
  detail::check_range(x, "airy_ai");
  return detail::airy_ai_unchecked(x);
}

double airy_ai_prime(double x) {
  detail::check_range(x, "airy_ai_prime");
  return detail::airy_pair_unchecked(x).aip;
}

double airy_ai_second(double x) {
  detail::check_range(x, "airy_ai_second");
  return detail::any_triple(x).aipp;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre

namespace {

struct ReferenceRule {
  std::vector<double> nodes;    // on (-1, 1), increasing
  std::vector<double> weights;
};

ReferenceRule build_reference_rule(int n) {
  ReferenceRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) {
        // one more evaluation for the derivative at the converged root
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::shared_ptr<const ReferenceRule> reference_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const ReferenceRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const ReferenceRule>(
      n == 1 ? ReferenceRule{{0.0}, {2.0}} : build_reference_rule(n));
  cache.emplace(n, rule);
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  if (!(a < b)) throw DomainError("gauss_legendre: requires a < b");
  const auto ref = reference_rule(n);
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * ref->nodes[i];
    rule.weights[i] = half * ref->weights[i];
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int n, double a, double b) {
  if (panels < 1) throw DomainError("composite_gauss_legendre: panels must be >= 1");
  if (!(a < b)) throw DomainError("composite_gauss_legendre: requires a < b");
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * n);
  rule.weights.reserve(static_cast<std::size_t>(panels) * n);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double hi = (p + 1 == panels) ? b : a + (p + 1) * h;
    const QuadratureRule piece = gauss_legendre(n, lo, hi);
    rule.nodes.insert(rule.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    rule.weights.insert(rule.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  return rule;
}

}  // namespace airyproc
