#include "platoon/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace platoon {

void V2VParams::validate() const {
  if (!(R_b > 0.0) || !std::isfinite(R_b)) throw std::invalid_argument("V2VParams: R_b must be > 0");
  net.validate();
}

double pgf_degree_npts(double s, const V2VParams& v2v) {
  v2v.validate();
  return std::exp(v2v.net.lambda * v2v.R_b * (s - 1.0));
}

DiscretePMF pmf_degree_npts(const V2VParams& v2v, const PmfOptions& opts) {
  v2v.validate();
  const double mu = v2v.net.lambda * v2v.R_b;
  auto build = [&](int K) {
    std::vector<double> v(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) v[static_cast<std::size_t>(k)] = poisson_pmf(k, mu);
    return v;
  };
  return certified_pmf(opts.K, opts.tail_bound, mu, mu, build, "pmf_degree_npts");
}

// The platoon centre sits at |x| ~ U[0, a] from the typical VU; the number of
// its members in range is Poisson(lambda_d * A(rho, a, x)).
double pgf_own_cluster(double s, const V2VParams& v2v) {
  v2v.validate();
  const auto& p = v2v.net;
  const double rho = v2v.radius();
  auto f = [&](double x) { return std::exp(p.lambda_d() * intersection_length(rho, p.a, x) * (s - 1.0)); };
  const double brk = std::min(std::abs(rho - p.a), p.a);
  const QuadratureSpec spec{1e-14, 1e-12, 2000, 1.0};
  return (integrate(f, 0.0, brk, spec) + integrate(f, brk, p.a, spec)) / p.a;
}

std::vector<double> own_cluster_masses(int K, const V2VParams& v2v) {
  v2v.validate();
  const auto& p = v2v.net;
  std::vector<double> out(static_cast<std::size_t>(K) + 1, 0.0);
  if (p.m == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double rho = v2v.radius();
  const double z_hi = p.m * std::min(rho, p.a) / p.a;
  const double z_lo = p.m * rho / (2.0 * p.a);
  const double full = std::min(std::abs(rho - p.a), p.a) / p.a;
  const bool partial = rho <= 2.0 * p.a;
  const auto hi = poisson_tail_table(z_hi, K + 1);
  const auto lo = poisson_tail_table(z_lo, K + 1);
  for (int n = 0; n <= K; ++n) {
    const auto un = static_cast<std::size_t>(n);
    double v = full * poisson_pmf(n, z_hi);
    if (partial) v += (2.0 / p.m) * (hi[un + 1] - lo[un + 1]);
    out[un] = v;
  }
  return out;
}

double pgf_degree_pts(double s, const V2VParams& v2v) {
  return pgf_S(s, v2v.radius(), v2v.net) * pgf_own_cluster(s, v2v);
}

DiscretePMF pmf_degree_pts(const V2VParams& v2v, const PmfOptions& opts) {
  v2v.validate();
  const auto& p = v2v.net;
  const double rho = v2v.radius();
  // Mean and variance of the own-cluster count from its Poisson mixture.
  const double ld = p.lambda_d();
  const double brk = std::min(std::abs(rho - p.a), p.a);
  const QuadratureSpec spec{1e-14, 1e-12, 2000, 1.0};
  auto area = [&](int pw) {
    auto f = [&](double x) { return std::pow(ld * intersection_length(rho, p.a, x), pw); };
    return (integrate(f, 0.0, brk, spec) + integrate(f, brk, p.a, spec)) / p.a;
  };
  const double c1 = area(1);
  const double c2 = area(2);
  const double mean = kappa(rho, 1, p) + c1;
  const double var = kappa(rho, 2, p) + kappa(rho, 1, p) + c2 + c1 - c1 * c1;
  auto build = [&](int K) {
    const auto s = exp_series(g_coefficients(K, rho, p), K);
    const auto c = own_cluster_masses(K, v2v);
    std::vector<double> out(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 0; k <= K; ++k)
      for (int n = 0; n <= k; ++n)
        out[static_cast<std::size_t>(k)] += s[static_cast<std::size_t>(k - n)] * c[static_cast<std::size_t>(n)];
    return out;
  };
  return certified_pmf(opts.K, opts.tail_bound, mean, var, build, "pmf_degree_pts");
}

DiscretePMF pmf_degree(Traffic traffic, const V2VParams& v2v, const PmfOptions& opts) {
  return traffic == Traffic::PTS ? pmf_degree_pts(v2v, opts) : pmf_degree_npts(v2v, opts);
}

double prob_degree_exceeds(int k, const DiscretePMF& pmf) { return pmf.exceedance(k); }

}  // namespace platoon
