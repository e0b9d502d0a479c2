#include "platoon/coverage.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace platoon {

namespace {

constexpr ComplexValue kI{0.0, 1.0};

// expm1 for complex arguments without cancellation at small |z|.
ComplexValue cexpm1(ComplexValue z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

double hyp_factor(double w, double alpha) {
  const double b = 1.0 - 1.0 / alpha;
  return w * hyp2f1_real(1.0, b, b + 1.0, -w) / (alpha * b);
}

void check_activity(double p_active, double lambda_r) {
  if (!(p_active >= 0.0 && p_active <= 1.0))
    throw std::invalid_argument("active probability must lie in [0, 1]");
  if (!(lambda_r > 0.0)) throw std::invalid_argument("lambda_r must be > 0");
}

}  // namespace

void RadioParams::validate() const {
  if (!(P_t > 0.0)) throw std::invalid_argument("RadioParams: P_t must be > 0");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("RadioParams: sigma2 must be >= 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("RadioParams: alpha must be > 1");
  if (!(B > 0.0)) throw std::invalid_argument("RadioParams: B must be > 0");
  if (!(pathloss_ref_m > 0.0)) throw std::invalid_argument("RadioParams: pathloss_ref_m must be > 0");
}

double active_prob(Traffic traffic, const NetworkParams& p) {
  p.validate();
  if (traffic == Traffic::PTS) return p.m == 0.0 ? 0.0 : 1.0 - pgf_typical_pts(0.0, p);
  const double q = 2.0 * p.lambda_r / (p.lambda + 2.0 * p.lambda_r);
  return 1.0 - q * q;
}

double laplace_interference(double s, double r, double p_active, double lambda_r,
                            const RadioParams& radio) {
  radio.validate();
  check_activity(p_active, lambda_r);
  if (s < 0.0) throw std::domain_error("laplace_interference: s must be >= 0");
  if (s == 0.0 || r == 0.0) return 1.0;
  const double w = s * radio.P_t * radio.pathloss(r);
  return std::exp(-2.0 * p_active * lambda_r * r * hyp_factor(w, radio.alpha));
}

double laplace_interference_quadrature(double s, double r, double p_active, double lambda_r,
                                       const RadioParams& radio) {
  radio.validate();
  check_activity(p_active, lambda_r);
  if (s == 0.0 || r == 0.0) return 1.0;
  auto f = [&](double z) {
    const double v = s * radio.P_t * radio.pathloss(z);
    return v / (1.0 + v);
  };
  QuadratureSpec spec{1e-300, 1e-13, 4000, r};
  return std::exp(-2.0 * p_active * lambda_r * integrate(f, r, INFINITY, spec));
}

double coverage_prob_with_activity(double tau, double p_active, double lambda_r,
                                   const RadioParams& radio, const CoverageOptions& opts) {
  radio.validate();
  check_activity(p_active, lambda_r);
  if (!(tau > 0.0)) throw std::domain_error("coverage_prob: tau must be > 0");
  // Given r the interference factor is exp(-2 p lambda_r r H(tau)), so the
  // integrand decays at rate 2 lambda_r (1 + p H) and, with noise, within
  // r_noise of the origin. The shorter of the two sets the quadrature scale.
  const double decay = 2.0 * lambda_r * (1.0 + p_active * hyp_factor(tau, radio.alpha));
  const double noise = tau * radio.sigma2 / radio.P_t;
  auto f = [&](double r) {
    return 2.0 * lambda_r * std::exp(-decay * r - noise / radio.pathloss(r));
  };
  QuadratureSpec spec = opts.quad;
  if (noise == 0.0) return 2.0 * lambda_r / decay;
  const double r_noise = radio.pathloss_ref_m * std::pow(noise, -1.0 / radio.alpha);
  spec.semi_infinite_scale = std::min(1.0 / decay, r_noise);
  return integrate(f, 0.0, INFINITY, spec);
}

double coverage_prob(double tau, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const CoverageOptions& opts) {
  return coverage_prob_with_activity(tau, active_prob(traffic, params), params.lambda_r, radio,
                                     opts);
}

// ---------------------------------------------------------------------------
// Moments of the conditional success probability
// ---------------------------------------------------------------------------

ComplexValue interference_moment_integral_direct(ComplexValue q, double tau, double alpha) {
  // y = w^k with k = alpha / (alpha - 1) removes the y^-eta endpoint singularity.
  const double k = alpha / (alpha - 1.0);
  auto f = [&](double w) -> ComplexValue {
    if (w == 0.0) return k * tau * q;
    const double wk = std::pow(w, k);
    return -cexpm1(-q * std::log1p(tau * wk)) * (k / wk);
  };
  return integrate_complex(f, 0.0, 1.0, {1e-13, 1e-11, 4000, 1.0});
}

// The factor (1 + tau y)^{-it} decays for Im y < 0, so [0, 1] is replaced by
// the path 0 -> -i inf (A) followed by 1 - i inf -> 1 (B). Each leg is cut
// where t * arg reaches 40 and the remainder is integrated analytically.
ComplexValue interference_moment_integral_contour(double t, double tau, double alpha) {
  constexpr double cut = 40.0;
  if (!(t > 2.0 * cut / std::numbers::pi))
    throw std::domain_error("contour evaluation needs t > 80 / pi");
  const double eta = 1.0 + 1.0 / alpha;
  const double k = alpha / (alpha - 1.0);
  const double tn = std::tan(cut / t);
  const QuadratureSpec spec{1e-13, 1e-11, 4000, 1.0};

  // Leg A: y = -i u, with u = w^k.
  const double u0 = tn / tau;
  auto fa = [&](double w) -> ComplexValue {
    if (w == 0.0) return k * t * tau;
    const double u = std::pow(w, k);
    const ComplexValue z{t * std::atan(tau * u), 0.5 * t * std::log1p(tau * tau * u * u)};
    return -cexpm1(-z) * (k / u);
  };
  const ComplexValue leg_a_body = integrate_complex(fa, 0.0, std::pow(u0, 1.0 / k), spec);
  const ComplexValue leg_a =
      -kI * std::polar(1.0, eta * std::numbers::pi / 2.0) * (leg_a_body + alpha * std::pow(u0, -1.0 / alpha));

  // Leg B: y = 1 - i u.
  const double u1 = (1.0 + tau) * tn / tau;
  auto fb = [&](double u) -> ComplexValue {
    const ComplexValue z{t * std::atan(tau * u / (1.0 + tau)),
                         0.5 * t * std::log((1.0 + tau) * (1.0 + tau) + tau * tau * u * u)};
    return std::pow(ComplexValue{1.0, -u}, -eta) * (-cexpm1(-z));
  };
  const ComplexValue leg_b_body = integrate_complex(fb, 0.0, u1, spec);
  const ComplexValue leg_b_tail = std::pow(ComplexValue{1.0, -u1}, 1.0 - eta) / (kI * (1.0 - eta));
  const ComplexValue leg_b = kI * (leg_b_body + leg_b_tail);
  return leg_a + leg_b;
}

ComplexValue interference_moment_integral(ComplexValue q, double tau, double alpha) {
  if (!(tau > 0.0)) throw std::domain_error("interference_moment_integral: tau must be > 0");
  if (!(alpha > 1.0)) throw std::domain_error("interference_moment_integral: alpha must be > 1");
  if (q == 0.0) return 0.0;
  const double t = q.imag();
  if (q.real() == 0.0 && std::abs(t) >= 30.0 && std::abs(t) * std::log1p(tau) > 20.0) {
    const ComplexValue j = interference_moment_integral_contour(std::abs(t), tau, alpha);
    return t > 0.0 ? j : std::conj(j);
  }
  return interference_moment_integral_direct(q, tau, alpha);
}

ComplexValue moment_Mq_with_activity(ComplexValue q, double tau, double p_active,
                                     double lambda_r, const RadioParams& radio,
                                     const CoverageOptions& opts) {
  radio.validate();
  check_activity(p_active, lambda_r);
  if (!(tau > 0.0)) throw std::domain_error("moment_Mq: tau must be > 0");
  if (q == 0.0) return 1.0;
  const double c = 2.0 * p_active * lambda_r / radio.alpha;
  const ComplexValue rate = 2.0 * lambda_r + c * interference_moment_integral(q, tau, radio.alpha);
  if (radio.sigma2 == 0.0) return 2.0 * lambda_r / rate;
  const double noise = tau * radio.sigma2 / radio.P_t;
  // Rotating r to rho e^{i phi} with phi = -arg(q) / alpha turns the noise
  // factor into exp(-|q| noise (rho / d0)^alpha); the arc at infinity vanishes
  // because that term dominates throughout the sector.
  const ComplexValue turn = std::polar(1.0, -std::arg(q) / radio.alpha);
  const ComplexValue rate_turned = rate * turn;
  const double qn = std::abs(q) * noise;
  auto f = [&](double rho) -> ComplexValue {
    const double rr = std::pow(rho / radio.pathloss_ref_m, radio.alpha);
    return std::exp(-rate_turned * rho - qn * rr);
  };
  const double r_noise = radio.pathloss_ref_m * std::pow(qn, -1.0 / radio.alpha);
  QuadratureSpec spec = opts.quad;
  spec.semi_infinite_scale = std::min(1.0 / std::abs(rate), r_noise);
  const ComplexValue body = integrate_complex(f, 0.0, r_noise, spec) +
                            integrate_complex(f, r_noise, INFINITY, spec);
  return 2.0 * lambda_r * turn * body;
}

ComplexValue moment_Mq(ComplexValue q, double tau, Traffic traffic, const NetworkParams& params,
                       const RadioParams& radio, const CoverageOptions& opts) {
  return moment_Mq_with_activity(q, tau, active_prob(traffic, params), params.lambda_r, radio,
                                 opts);
}

double md_coverage_with_activity(double tau, double x, double p_active, double lambda_r,
                                 const RadioParams& radio, const CoverageOptions& opts) {
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("md_coverage: x must lie in (0, 1)");
  auto moment = [&](double t) {
    return moment_Mq_with_activity({0.0, t}, tau, p_active, lambda_r, radio, opts);
  };
  // E[-ln P_s] in closed form: the noise term averaged over the serving
  // distance plus p H(tau) from the interference.
  const double noise = tau * radio.sigma2 / radio.P_t;
  const double mean_log = noise * std::tgamma(radio.alpha + 1.0) /
                              std::pow(2.0 * lambda_r * radio.pathloss_ref_m, radio.alpha) +
                          p_active * hyp_factor(tau, radio.alpha);
  GilPelaezOptions gp = opts.gil_pelaez;
  gp.log_moment_bound = std::max(gp.log_moment_bound, mean_log - std::log(x));
  return gil_pelaez_invert(moment, x, opts.md_quad, gp);
}

double md_coverage(double tau, double x, Traffic traffic, const NetworkParams& params,
                   const RadioParams& radio, const CoverageOptions& opts) {
  return md_coverage_with_activity(tau, x, active_prob(traffic, params), params.lambda_r, radio,
                                   opts);
}

// ---------------------------------------------------------------------------
// Rate coverage
// ---------------------------------------------------------------------------

double rate_threshold_to_sinr(double tau_rate, int others, double B) {
  if (others < 0) throw std::domain_error("rate_threshold_to_sinr: others must be >= 0");
  return std::exp2(tau_rate * (others + 1.0) / B) - 1.0;
}

namespace {

constexpr double kNegligibleTerm = 1e-9;

}  // namespace

SeriesResult rate_coverage_with_load(double tau_rate, const DiscretePMF& load, double p_active,
                                     double lambda_r, const RadioParams& radio,
                                     const CoverageOptions& opts) {
  if (!(tau_rate > 0.0)) throw std::domain_error("rate_coverage: tau must be > 0");
  SeriesResult out;
  double remaining = 1.0;
  for (int k = 0; k <= load.max_index(); ++k) {
    const double pk = load[k];
    remaining -= pk;
    const double theta = rate_threshold_to_sinr(tau_rate, k, radio.B);
    const double cp = std::isfinite(theta)
                          ? coverage_prob_with_activity(theta, p_active, lambda_r, radio, opts)
                          : 0.0;
    // CP falls with k, so this term and the rest are below cp * (pk + remaining).
    const double rest = cp * (pk + std::max(remaining, 0.0));
    if (rest < kNegligibleTerm) {
      out.residual_bound = rest + load.tail_mass;
      return out;
    }
    out.value += pk * cp;
    ++out.terms;
  }
  out.residual_bound = load.tail_mass;
  return out;
}

SeriesResult rate_coverage(double tau_rate, Traffic traffic, const NetworkParams& params,
                           const RadioParams& radio, const CoverageOptions& opts) {
  const auto load = traffic == Traffic::PTS ? pmf_tagged_pts(params) : pmf_tagged_npts(params);
  return rate_coverage_with_load(tau_rate, load, active_prob(traffic, params), params.lambda_r,
                                 radio, opts);
}

SeriesResult md_rate_with_load(double tau_rate, double x, const DiscretePMF& load,
                               double p_active, double lambda_r, const RadioParams& radio,
                               const CoverageOptions& opts) {
  if (!(tau_rate > 0.0)) throw std::domain_error("md_rate: tau must be > 0");
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("md_rate: x must lie in (0, 1)");
  SeriesResult out;
  double remaining = 1.0;
  for (int k = 0; k <= load.max_index(); ++k) {
    const double pk = load[k];
    remaining -= pk;
    const double theta = rate_threshold_to_sinr(tau_rate, k, radio.B);
    const double cp = std::isfinite(theta)
                          ? coverage_prob_with_activity(theta, p_active, lambda_r, radio, opts)
                          : 0.0;
    // Markov: P[P_c > x] <= E[P_c] / x.
    const double bound = std::min(cp / x, 1.0);
    const double rest = bound * (pk + std::max(remaining, 0.0));
    if (rest < kNegligibleTerm) {
      out.residual_bound += rest + load.tail_mass;
      return out;
    }
    if (pk * bound < kNegligibleTerm) {
      out.residual_bound += pk * bound;
      continue;
    }
    out.value += pk * md_coverage_with_activity(theta, x, p_active, lambda_r, radio, opts);
    ++out.terms;
  }
  out.residual_bound += load.tail_mass;
  return out;
}

SeriesResult md_rate(double tau_rate, double x, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const CoverageOptions& opts) {
  const auto load = traffic == Traffic::PTS ? pmf_tagged_pts(params) : pmf_tagged_npts(params);
  return md_rate_with_load(tau_rate, x, load, active_prob(traffic, params), params.lambda_r, radio,
                           opts);
}

}  // namespace platoon
