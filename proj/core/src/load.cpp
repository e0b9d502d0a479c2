#include "platoon/load.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace platoon {

LoadMoments LoadMoments::from_raw(double mean, double variance, double third) {
  LoadMoments m{mean, variance, third, 0.0};
  if (variance > 0.0)
    m.skewness = (third - 3.0 * mean * variance - mean * mean * mean) / std::pow(variance, 1.5);
  return m;
}

namespace {

double cell_pdf(int shape, double t, double lambda_r) {
  return shape == 2 ? pdf_typical_cell(t, lambda_r) : pdf_tagged_cell(t, lambda_r);
}

// Integral of f(t) against the cell-length law, split at the kink t = 2a.
double integrate_cell(int shape, const NetworkParams& p, const std::function<double(double)>& f,
                      QuadratureSpec spec = {1e-13, 1e-11, 2000, 1.0}) {
  auto g = [&](double t) { return f(t) * cell_pdf(shape, t, p.lambda_r); };
  const double kink = 2.0 * p.a;
  spec.semi_infinite_scale = 1.0 / p.lambda_r;
  return integrate(g, 0.0, kink, spec) + integrate(g, kink, INFINITY, spec);
}

using CondMasses = std::function<void(double, std::span<double>)>;

// Mixes conditional PMFs on 0..K over the cell-length law, truncated at its
// 1 - 1e-8 quantile.
std::vector<double> mix_over_cell(int K, int shape, const NetworkParams& p,
                                  const QuadratureSpec& spec, const CondMasses& cond) {
  const auto dim = static_cast<std::size_t>(K) + 1;
  const double t_max = cell_length_quantile(shape, p.lambda_r, 1e-8);
  auto f = [&](double t, std::span<double> out) {
    cond(t, out);
    const double w = cell_pdf(shape, t, p.lambda_r);
    for (auto& v : out) v *= w;
  };
  std::vector<double> total(dim, 0.0);
  const double kink = std::min(2.0 * p.a, t_max);
  for (const auto& [lo, hi] : {std::pair{0.0, kink}, std::pair{kink, t_max}}) {
    if (hi <= lo) continue;
    const auto r = integrate_adaptive_vec(f, dim, lo, hi, spec);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "load mixture quadrature did not converge (error " << r.abs_error << ")";
      throw NumericalError(msg.str());
    }
    for (std::size_t k = 0; k < dim; ++k) total[k] += r.value[k];
  }
  return total;
}

// Negative-binomial type mass C(k+r-1, k) q^k (1-q)^r in log space.
double negbin_mass(int k, int r, double q) {
  if (q == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(std::lgamma(k + r) - std::lgamma(k + 1.0) - std::lgamma(r) +
                  k * std::log(q) + r * std::log1p(-q));
}

// h(w) = integral of y e^{w y} over [0, 1].
double h_series(double w) {
  if (std::abs(w) < 0.05) {
    double sum = 0.0;
    double pw = 1.0;
    double fact = 2.0;  // (j + 2)!
    for (int j = 0; j <= 10; ++j) {
      sum += pw * (j + 1) / fact;
      pw *= w;
      fact *= j + 3;
    }
    return sum;
  }
  return (std::exp(w) * (w - 1.0) + 1.0) / (w * w);
}

struct VmShape {
  double Z;   // min(t, 2a) for the chosen branch
  double w1;  // weight of full overlap
  double c;   // lambda_d * Z
};

VmShape vm_shape(double t, const NetworkParams& p, bool short_cell) {
  if (!(t > 0.0)) throw std::domain_error("V_m: cell length t must be > 0");
  const double Z = short_cell ? t : 2.0 * p.a;
  return {Z, Z * std::abs(0.5 * t - p.a) / (p.a * t), p.lambda_d() * Z};
}

VmShape vm_shape(double t, const NetworkParams& p) { return vm_shape(t, p, t <= 2.0 * p.a); }

std::vector<double> nu_table(int K, double t, const NetworkParams& p) {
  std::vector<double> nu(static_cast<std::size_t>(K) + 1, 0.0);
  const auto sh = vm_shape(t, p);
  if (p.m == 0.0) {
    nu[0] = 1.0;
    return nu;
  }
  const double ld = p.lambda_d();
  const auto upper = poisson_tail_table(sh.c, K + 2);
  const double scale = 1.0 / (p.a * t * ld * ld);
  for (int n = 0; n <= K; ++n) {
    const auto un = static_cast<std::size_t>(n);
    nu[un] = sh.w1 * poisson_pmf(n, sh.c) + (n + 1) * upper[un + 2] * scale;
  }
  return nu;
}

}  // namespace

// ---------------------------------------------------------------------------
// Typical RSU
// ---------------------------------------------------------------------------

DiscretePMF pmf_typical_pts(const NetworkParams& p, const PmfOptions& opts) {
  p.validate();
  if (p.m == 0.0) return DiscretePMF::point_mass(0);
  const auto mom = moments_typical_pts(p);
  auto build = [&](int K) {
    return mix_over_cell(K, 2, p, opts.quad, [&](double t, std::span<double> out) {
      const auto masses = exp_series(g_coefficients(K, 0.5 * t, p), K);
      std::copy(masses.begin(), masses.end(), out.begin());
    });
  };
  return certified_pmf(opts.K, opts.tail_bound, mom.mean, mom.variance, build, "pmf_typical_pts");
}

double pgf_typical_pts(double s, const NetworkParams& p) {
  return integrate_cell(2, p, [&](double t) { return pgf_S(s, 0.5 * t, p); });
}

LoadMoments moments_typical_pts(const NetworkParams& p) {
  p.validate();
  if (p.m == 0.0) return {};
  const double mu = p.m * p.lambda_p / p.lambda_r;
  const double var = mu - mu * mu + I_moment(2, 1, p) + I_moment(1, 2, p);
  const double third = I_moment(3, 1, p) + I_moment(1, 3, p) +
                       3.0 * I_moment(1, 1, p) * I_tilde_moment(1, 2, p) +
                       3.0 * I_moment(2, 1, p) + 3.0 * I_moment(1, 2, p) + mu;
  return LoadMoments::from_raw(mu, var, third);
}

DiscretePMF pmf_typical_npts(const NetworkParams& p, const PmfOptions& opts) {
  p.validate();
  const double q = p.lambda / (p.lambda + 2.0 * p.lambda_r);
  const auto mom = moments_typical_npts(p);
  auto build = [&](int K) {
    std::vector<double> v(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) v[static_cast<std::size_t>(k)] = negbin_mass(k, 2, q);
    return v;
  };
  return certified_pmf(opts.K, opts.tail_bound, mom.mean, mom.variance, build, "pmf_typical_npts");
}

double pgf_typical_npts(double s, const NetworkParams& p) {
  return mgf_L(p.lambda * (s - 1.0), p.lambda_r);
}

LoadMoments moments_typical_npts(const NetworkParams& p) {
  const double g = p.lambda / p.lambda_r;
  return LoadMoments::from_raw(g, 0.5 * g * g + g, 3.0 * g * g * g + 4.5 * g * g + g);
}

// ---------------------------------------------------------------------------
// V_m
// ---------------------------------------------------------------------------

double pgf_vm_branch(double s, double t, const NetworkParams& p, bool short_cell) {
  const auto sh = vm_shape(t, p, short_cell);
  const double w = sh.c * (s - 1.0);
  return sh.w1 * std::exp(w) + sh.Z * sh.Z / (p.a * t) * h_series(w);
}

double pgf_vm(double s, double t, const NetworkParams& p) {
  return pgf_vm_branch(s, t, p, t <= 2.0 * p.a);
}

double nu_n(int n, double t, const NetworkParams& p) {
  if (n < 0) return 0.0;
  return nu_table(n, t, p).back();
}

DiscretePMF pmf_vm(int K, double t, const NetworkParams& p) {
  if (K < 0) throw std::domain_error("pmf_vm: K must be >= 0");
  auto pmf = DiscretePMF::from_masses(nu_table(K, t, p));
  pmf.sanitize();
  return pmf;
}

double vm_factorial_moment(int j, double t, const NetworkParams& p) {
  if (j < 0) throw std::domain_error("vm_factorial_moment: j must be >= 0");
  const auto sh = vm_shape(t, p);
  return std::pow(sh.c, j) * (sh.w1 + sh.Z * sh.Z / ((j + 2.0) * p.a * t));
}

ConditionalMoments moments_vm_conditional_branch(double t, const NetworkParams& p,
                                                 bool short_cell) {
  const auto sh = vm_shape(t, p, short_cell);
  const double zz = sh.Z * sh.Z / (p.a * t);
  const double f1 = sh.c * (sh.w1 + zz / 3.0);
  const double f2 = sh.c * sh.c * (sh.w1 + zz / 4.0);
  return {f1, f2 + f1 - f1 * f1};
}

ConditionalMoments moments_vm_conditional(double t, const NetworkParams& p) {
  return moments_vm_conditional_branch(t, p, t <= 2.0 * p.a);
}

namespace {

// Pieces of E[V_m] and E[V_m (V_m - 1)] against the tagged-cell law:
// on t < 2a the conditional moments are polynomials in t, beyond it they are
// m (1 - 2a / 3t) and m^2 (1 - a / t).
double vm_mean_closed(const NetworkParams& p) {
  const double mu = 2.0 * p.lambda_r;
  const double ld = p.lambda_d();
  const double c = 4.0 * std::pow(p.lambda_r, 3);
  return c * (ld * func_F(mu, 3, p.a) - ld * func_F(mu, 4, p.a) / (6.0 * p.a) +
              p.m * func_G(mu, 2, p.a) - 2.0 * p.m * p.a / 3.0 * func_G(mu, 1, p.a));
}

double vm_fact2_closed(const NetworkParams& p) {
  const double mu = 2.0 * p.lambda_r;
  const double ld = p.lambda_d();
  const double c = 4.0 * std::pow(p.lambda_r, 3);
  return c * (ld * ld * func_F(mu, 4, p.a) - ld * ld * func_F(mu, 5, p.a) / (4.0 * p.a) +
              p.m * p.m * func_G(mu, 2, p.a) - p.m * p.m * p.a * func_G(mu, 1, p.a));
}

// E[kappa(t/2, 1) E[V_m | t]] against the tagged-cell law.
double cross_sv_closed(const NetworkParams& p) {
  const double mu = 2.0 * p.lambda_r;
  const double ld = p.lambda_d();
  const double c = 4.0 * std::pow(p.lambda_r, 3);
  return p.m * p.lambda_p * c *
         (ld * func_F(mu, 4, p.a) - ld * func_F(mu, 5, p.a) / (6.0 * p.a) +
          p.m * func_G(mu, 3, p.a) - 2.0 * p.m * p.a / 3.0 * func_G(mu, 2, p.a));
}

}  // namespace

ConditionalMoments moments_vm(const NetworkParams& p) {
  p.validate();
  if (p.m == 0.0) return {};
  const double mean = vm_mean_closed(p);
  return {mean, vm_fact2_closed(p) + mean - mean * mean};
}

double vm_second_factorial_moment(const NetworkParams& p) {
  p.validate();
  return p.m == 0.0 ? 0.0 : vm_fact2_closed(p);
}

// ---------------------------------------------------------------------------
// Tagged RSU
// ---------------------------------------------------------------------------

DiscretePMF pmf_tagged_pts(const NetworkParams& p, const PmfOptions& opts) {
  p.validate();
  if (p.m == 0.0) return DiscretePMF::point_mass(0);
  const double mean = I_tilde_moment(1, 1, p) + vm_mean_closed(p);
  const double var = variance_tagged_pts_closed_form(p);
  auto build = [&](int K) {
    return mix_over_cell(K, 3, p, opts.quad, [&](double t, std::span<double> out) {
      const auto s = exp_series(g_coefficients(K, 0.5 * t, p), K);
      const auto nu = nu_table(K, t, p);
      for (int k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (int n = 0; n <= k; ++n)
          acc += s[static_cast<std::size_t>(k - n)] * nu[static_cast<std::size_t>(n)];
        out[static_cast<std::size_t>(k)] = acc;
      }
    });
  };
  return certified_pmf(opts.K, opts.tail_bound, mean, var, build, "pmf_tagged_pts");
}

double pgf_tagged_pts(double s, const NetworkParams& p) {
  return integrate_cell(3, p, [&](double t) { return pgf_S(s, 0.5 * t, p) * pgf_vm(s, t, p); });
}

double variance_tagged_pts_closed_form(const NetworkParams& p) {
  p.validate();
  if (p.m == 0.0) return 0.0;
  const double ev = vm_mean_closed(p);
  const double mean = I_tilde_moment(1, 1, p) + ev;
  const double second = I_tilde_moment(2, 1, p) + I_tilde_moment(1, 2, p) + I_tilde_moment(1, 1, p) +
                        2.0 * cross_sv_closed(p) + vm_fact2_closed(p) + ev;
  return second - mean * mean;
}

LoadMoments moments_tagged_pts(const NetworkParams& p) {
  p.validate();
  if (p.m == 0.0) return {};
  const double mean = I_tilde_moment(1, 1, p) + vm_mean_closed(p);
  const double var = variance_tagged_pts_closed_form(p);
  // Conditional raw third moment of S(t/2) + V_m(t/2), from the factorial
  // cumulants of S and the factorial moments of V_m.
  auto third_given_t = [&](double t) {
    const double r = 0.5 * t;
    const double k1 = kappa(r, 1, p);
    const double k2 = kappa(r, 2, p);
    const double k3 = kappa(r, 3, p);
    const double s1 = k1;
    const double s2 = k2 + k1 * k1 + k1;
    const double s3 = k3 + 3.0 * k1 * k2 + k1 * k1 * k1 + 3.0 * (k2 + k1 * k1) + k1;
    const double f1 = vm_factorial_moment(1, t, p);
    const double f2 = vm_factorial_moment(2, t, p);
    const double f3 = vm_factorial_moment(3, t, p);
    const double v1 = f1;
    const double v2 = f2 + f1;
    const double v3 = f3 + 3.0 * f2 + f1;
    return s3 + 3.0 * s2 * v1 + 3.0 * s1 * v2 + v3;
  };
  return LoadMoments::from_raw(mean, var, integrate_cell(3, p, third_given_t));
}

DiscretePMF pmf_tagged_npts(const NetworkParams& p, const PmfOptions& opts) {
  p.validate();
  const double half = 0.5 * p.lambda / p.lambda_r;
  const double q = half / (1.0 + half);
  const auto mom = moments_tagged_npts(p);
  auto build = [&](int K) {
    std::vector<double> v(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) v[static_cast<std::size_t>(k)] = negbin_mass(k, 3, q);
    return v;
  };
  return certified_pmf(opts.K, opts.tail_bound, mom.mean, mom.variance, build, "pmf_tagged_npts");
}

double pgf_tagged_npts(double s, const NetworkParams& p) {
  return mgf_L0(p.lambda * (s - 1.0), p.lambda_r);
}

LoadMoments moments_tagged_npts(const NetworkParams& p) {
  const double g = p.lambda / p.lambda_r;
  return LoadMoments::from_raw(1.5 * g, 0.75 * g * g + 1.5 * g,
                               7.5 * g * g * g + 9.0 * g * g + 1.5 * g);
}

// ---------------------------------------------------------------------------
// Dispatch and metrics
// ---------------------------------------------------------------------------

std::string to_string(LoadKind k) { return k == LoadKind::Typical ? "typical" : "tagged"; }

LoadKind load_kind_from_string(const std::string& name) {
  if (name == "typical") return LoadKind::Typical;
  if (name == "tagged") return LoadKind::Tagged;
  throw std::invalid_argument("unknown load kind '" + name + "' (expected typical or tagged)");
}

DiscretePMF load_pmf(LoadKind kind, Traffic traffic, const NetworkParams& params,
                     const PmfOptions& opts) {
  if (kind == LoadKind::Typical)
    return traffic == Traffic::PTS ? pmf_typical_pts(params, opts) : pmf_typical_npts(params, opts);
  return traffic == Traffic::PTS ? pmf_tagged_pts(params, opts) : pmf_tagged_npts(params, opts);
}

LoadMoments load_moments(LoadKind kind, Traffic traffic, const NetworkParams& params) {
  if (kind == LoadKind::Typical)
    return traffic == Traffic::PTS ? moments_typical_pts(params) : moments_typical_npts(params);
  return traffic == Traffic::PTS ? moments_tagged_pts(params) : moments_tagged_npts(params);
}

OperationalMetrics operational_metrics(const DiscretePMF& pmf, LoadKind kind) {
  OperationalMetrics out;
  out.kind = kind;
  if (!pmf.certified())
    out.warnings.push_back("pmf tail mass " + std::to_string(pmf.tail_mass) + " exceeds 1e-6");
  const double mean = pmf.mean();
  auto sum_range = [&](int hi) {
    double s = 0.0;
    for (int k = 1; k <= hi; ++k) s += pmf[k];
    return s;
  };
  if (kind == LoadKind::Typical) {
    out.p_off = pmf[0];
    out.s_avg = out.p_off < 1.0 ? mean / (1.0 - out.p_off) : 0.0;
    out.k_avg = static_cast<int>(std::floor(out.s_avg));
    if (out.k_avg == 0) out.warnings.push_back("k_avg is 0; p_b set to 0");
    out.p_b = sum_range(out.k_avg);
  } else {
    out.P1_alone = pmf[0];
    out.P1_one_other = pmf[1];
    out.m_avg = static_cast<int>(std::floor(mean));
    if (out.m_avg == 0) out.warnings.push_back("m_avg is 0; P_b set to 0");
    out.P_b = sum_range(out.m_avg);
  }
  return out;
}

}  // namespace platoon
