#include "platoon/mcp_counts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "platoon/numerics.hpp"

namespace platoon {

// ---------------------------------------------------------------------------
// DiscretePMF
// ---------------------------------------------------------------------------

DiscretePMF DiscretePMF::from_masses(std::vector<double> masses) {
  DiscretePMF p;
  p.masses = std::move(masses);
  p.tail_mass = std::max(0.0, 1.0 - p.total());
  return p;
}

DiscretePMF DiscretePMF::point_mass(int k) {
  if (k < 0) throw std::invalid_argument("DiscretePMF::point_mass: k must be >= 0");
  DiscretePMF p;
  p.masses.assign(static_cast<std::size_t>(k) + 1, 0.0);
  p.masses.back() = 1.0;
  return p;
}

double DiscretePMF::total() const {
  double s = 0.0;
  for (double v : masses) s += v;
  return s;
}

double DiscretePMF::raw_moment(int order) const {
  double s = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k)
    s += std::pow(static_cast<double>(k), order) * masses[k];
  return s;
}

double DiscretePMF::mean() const { return raw_moment(1); }

double DiscretePMF::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    s += d * d * masses[k];
  }
  return s;
}

double DiscretePMF::pgf(double s) const {
  double acc = 0.0;
  for (std::size_t k = masses.size(); k-- > 0;) acc = acc * s + masses[k];
  return acc;
}

double DiscretePMF::exceedance(int k) const {
  if (k < 0) return 1.0;
  double cum = 0.0;
  for (int j = 0; j <= k && j < static_cast<int>(masses.size()); ++j)
    cum += masses[static_cast<std::size_t>(j)];
  return std::max(0.0, 1.0 - cum);
}

void DiscretePMF::trim(double bound) {
  double cum = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    cum += masses[k];
    if (cum >= 1.0 - bound) {
      masses.resize(k + 1);
      break;
    }
  }
  tail_mass = std::max(0.0, 1.0 - total());
}

void DiscretePMF::sanitize() {
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (masses[k] < -1e-12) {
      std::ostringstream msg;
      msg << "negative probability mass " << masses[k] << " at k=" << k;
      throw NumericalError(msg.str(), masses[k]);
    }
    masses[k] = std::max(0.0, masses[k]);
  }
}

double tv_distance(const DiscretePMF& p, const DiscretePMF& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) d += std::abs(p[static_cast<int>(k)] - q[static_cast<int>(k)]);
  d += std::abs(p.tail_mass - q.tail_mass);
  return 0.5 * d;
}

DiscretePMF certified_pmf(int fixed_K, double tail_bound, double mean, double variance,
                          const std::function<std::vector<double>(int)>& build,
                          const char* what) {
  auto finish = [&](int K) {
    auto pmf = DiscretePMF::from_masses(build(K));
    pmf.sanitize();
    return pmf;
  };
  if (fixed_K > 0) return finish(fixed_K);
  const double sd = std::sqrt(std::max(variance, 0.0));
  int K = std::min(kMaxSupport, static_cast<int>(std::ceil(mean + 12.0 * sd)) + 10);
  while (true) {
    auto pmf = finish(K);
    if (pmf.tail_mass < tail_bound) {
      pmf.trim(tail_bound);
      return pmf;
    }
    if (K >= kMaxSupport) {
      std::ostringstream msg;
      msg << what << ": support cap " << kMaxSupport << " reached with tail " << pmf.tail_mass;
      throw NumericalError(msg.str(), pmf.tail_mass);
    }
    K = std::min(kMaxSupport, 2 * K);
  }
}

// ---------------------------------------------------------------------------
// g(s, r) and friends
// ---------------------------------------------------------------------------

namespace {

struct BallGeometry {
  double beta;      // 2 min(r, a)
  double beta_bar;  // min(r, a) / a
  double gap;       // |r - a|
};

BallGeometry ball(double r, const NetworkParams& p) {
  if (r < 0.0) throw std::domain_error("counting radius must be >= 0");
  const double mn = std::min(r, p.a);
  return {2.0 * mn, mn / p.a, std::abs(r - p.a)};
}

// g written with expm1 so that it vanishes cleanly at s = 1; `ratio` is
// expm1(x) / x for x = lambda_d * beta * (s - 1).
double g_with_ratio(double s, const BallGeometry& b, const NetworkParams& p, double ratio) {
  return 2.0 * p.lambda_p * (b.gap * std::expm1(p.m * b.beta_bar * (s - 1.0)) + b.beta * (ratio - 1.0));
}

}  // namespace

double g_closed_form(double s, double r, const NetworkParams& p) {
  const auto b = ball(r, p);
  const double x = p.lambda_d() * b.beta * (s - 1.0);
  const double ratio = x == 0.0 ? 1.0 : std::expm1(x) / x;
  return g_with_ratio(s, b, p, ratio);
}

double g_taylor(double s, double r, const NetworkParams& p) {
  const auto b = ball(r, p);
  const double x = p.lambda_d() * b.beta * (s - 1.0);
  return g_with_ratio(s, b, p, 1.0 + x / 2.0 + x * x / 6.0);
}

double g_of(double s, double r, const NetworkParams& p) {
  if (s > 1.0) throw std::domain_error("g_of: s must be <= 1");
  return std::abs(s - 1.0) < 1e-6 ? g_taylor(s, r, p) : g_closed_form(s, r, p);
}

double g_deriv_at_zero(int i, double r, const NetworkParams& p) {
  if (i < 1) throw std::domain_error("g_deriv_at_zero: i must be >= 1");
  const auto b = ball(r, p);
  if (p.m == 0.0 || r == 0.0) return 0.0;
  const double z = p.m * b.beta_bar;
  const double first = std::exp(i * std::log(z) - z) * b.gap;
  const double second = (2.0 * p.a / p.m) * gamma_lower(i + 1.0, z);
  return 2.0 * p.lambda_p * (first + second);
}

std::vector<double> g_coefficients(int K, double r, const NetworkParams& p) {
  if (K < 0) throw std::domain_error("g_coefficients: K must be >= 0");
  std::vector<double> c(static_cast<std::size_t>(K) + 1, 0.0);
  c[0] = g_closed_form(0.0, r, p);
  const auto b = ball(r, p);
  const double z = p.m * b.beta_bar;
  if (K == 0 || z == 0.0) return c;

  const auto upper = poisson_tail_table(z, K + 1);
  const double scale = 2.0 * p.a / p.m;
  for (int j = 1; j <= K; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    c[uj] = 2.0 * p.lambda_p * (poisson_pmf(j, z) * b.gap + scale * upper[uj + 1]);
  }
  return c;
}

double kappa(double r, int k, const NetworkParams& p) {
  if (k < 1) throw std::domain_error("kappa: k must be >= 1");
  const auto b = ball(r, p);
  return 2.0 * p.lambda_p * std::pow(p.m * b.beta_bar, k) *
         (r + p.a - b.beta * k / (k + 1.0));
}

double pgf_S(double s, double r, const NetworkParams& p) {
  if (s < 0.0 || s > 1.0) throw std::domain_error("pgf_S: s must lie in [0, 1]");
  return std::exp(g_of(s, r, p));
}

std::vector<double> exp_series(const std::vector<double>& c, int K) {
  if (c.empty()) throw std::invalid_argument("exp_series: need c[0]");
  std::vector<double> out(static_cast<std::size_t>(K) + 1, 0.0);
  out[0] = std::exp(c[0]);
  const int J = static_cast<int>(c.size()) - 1;
  for (int k = 1; k <= K; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= std::min(k, J); ++j)
      acc += j * c[static_cast<std::size_t>(j)] * out[static_cast<std::size_t>(k - j)];
    out[static_cast<std::size_t>(k)] = acc / k;
  }
  return out;
}

DiscretePMF pmf_S(int K, double r, const NetworkParams& p) {
  if (K < 0) throw std::domain_error("pmf_S: K must be >= 0");
  auto pmf = DiscretePMF::from_masses(exp_series(g_coefficients(K, r, p), K));
  pmf.sanitize();
  return pmf;
}

DiscretePMF pmf_S_auto(double r, const NetworkParams& p, double tail_bound) {
  const double mu = kappa(r, 1, p);
  const double var = kappa(r, 2, p) + mu;
  return certified_pmf(0, tail_bound, mu, var,
                       [&](int K) { return exp_series(g_coefficients(K, r, p), K); }, "pmf_S");
}

// ---------------------------------------------------------------------------
// I(n, k) and its tagged counterpart
// ---------------------------------------------------------------------------

namespace {

double binom(int n, int j) { return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0))); }

// Integral of kappa(r/2, k)^n against the Gamma(shape, 2 lambda_r) law of the
// cell length. Below r = 2a the half-cell sits inside one cluster span and
// kappa is a polynomial in r; above it kappa is affine in r.
double kappa_power_moment(int n, int k, int shape, const NetworkParams& p) {
  if (n < 1 || k < 1) throw std::domain_error("I moments need n, k >= 1");
  const double two_lr = 2.0 * p.lambda_r;
  const double x = 4.0 * p.lambda_r * p.a;
  const double c = (1.0 - k) / (1.0 + k);
  const double eta1 = p.a * c;
  const double gs = std::tgamma(shape);

  double inner = 0.0;
  for (int j = 0; j <= n; ++j) {
    const int q = n * k + j;
    // (m/a)^{nk} a^{n-j} c^j 2^{-q} gamma(q + shape, x) / (2 lambda_r)^q, in logs where possible.
    const double log_mag = n * k * std::log(p.m / p.a) + (n - j) * std::log(p.a) -
                           q * std::log(2.0 * two_lr) + std::log(gamma_lower(q + shape, x));
    inner += binom(n, j) * std::pow(c, j) * std::exp(log_mag);
  }
  double outer = 0.0;
  for (int j = 0; j <= n; ++j) {
    outer += binom(n, j) * std::pow(eta1, n - j) * std::pow(2.0 * two_lr, -j) *
             gamma_upper(j + shape, x);
  }
  const double lead = std::pow(2.0 * p.lambda_p, n);
  return lead * (inner + std::pow(p.m, n * k) * outer) / gs;
}

}  // namespace

double I_moment(int n, int k, const NetworkParams& p) {
  if (p.m == 0.0) return 0.0;
  return kappa_power_moment(n, k, 2, p);
}

double I_tilde_moment(int n, int k, const NetworkParams& p) {
  if (p.m == 0.0) return 0.0;
  return kappa_power_moment(n, k, 3, p);
}

PgfEvaluator::PgfEvaluator(const NetworkParams& params, double r) : params_(params), r_(r) {
  params_.validate();
  if (r < 0.0) throw std::invalid_argument("PgfEvaluator: r must be >= 0");
}

}  // namespace platoon
