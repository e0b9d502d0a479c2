#pragma once

#include "platoon/load.hpp"
#include "platoon/numerics.hpp"

namespace platoon {

/// Downlink radio settings. Path loss is (r / pathloss_ref_m)^-alpha, so with
/// the default 1 km reference distances enter the power law in kilometres.
struct RadioParams {
  double P_t = 1.0;       // W
  double sigma2 = 5e-5;   // W
  double alpha = 3.5;
  double B = 10e6;        // Hz
  double pathloss_ref_m = 1000.0;

  double pathloss(double r) const { return std::pow(r / pathloss_ref_m, -alpha); }
  void validate() const;
};

struct CoverageOptions {
  /// Tolerances for the real-valued r integrals.
  QuadratureSpec quad{1e-12, 1e-10, 2000, 1.0};
  /// Tolerances for the Gil-Pelaez inversion (the oscillatory t integral).
  QuadratureSpec md_quad{1e-4, 1e-6, 4000, 1.0};
  GilPelaezOptions gil_pelaez{};
};

/// Probability that an RSU has at least one VU in its cell.
double active_prob(Traffic traffic, const NetworkParams& params);

/// Laplace transform of the interference at the typical VU served from
/// distance r, with active RSUs thinned to density p_active * lambda_r.
double laplace_interference(double s, double r, double p_active, double lambda_r,
                            const RadioParams& radio);
/// Same quantity by direct quadrature of the interference integral.
double laplace_interference_quadrature(double s, double r, double p_active, double lambda_r,
                                       const RadioParams& radio);

double coverage_prob(double tau, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const CoverageOptions& opts = {});
/// Coverage with an explicit active probability (the traffic model only
/// enters through it).
double coverage_prob_with_activity(double tau, double p_active, double lambda_r,
                                   const RadioParams& radio, const CoverageOptions& opts = {});

/// Integral of (1 - (1 + tau y)^-q) y^-(1 + 1/alpha) over [0, 1].
/// For q = i t with large t the integral is taken along a contour in the
/// lower half plane where the oscillating factor decays.
ComplexValue interference_moment_integral(ComplexValue q, double tau, double alpha);
/// Direct evaluation on [0, 1] (reference path).
ComplexValue interference_moment_integral_direct(ComplexValue q, double tau, double alpha);
/// Contour evaluation; requires q = i t with t > 26.
ComplexValue interference_moment_integral_contour(double t, double tau, double alpha);

/// q-th moment of the conditional success probability.
ComplexValue moment_Mq(ComplexValue q, double tau, Traffic traffic, const NetworkParams& params,
                       const RadioParams& radio, const CoverageOptions& opts = {});
ComplexValue moment_Mq_with_activity(ComplexValue q, double tau, double p_active,
                                     double lambda_r, const RadioParams& radio,
                                     const CoverageOptions& opts = {});

/// P[P_c(tau) > x] over network realizations.
double md_coverage(double tau, double x, Traffic traffic, const NetworkParams& params,
                   const RadioParams& radio, const CoverageOptions& opts = {});
double md_coverage_with_activity(double tau, double x, double p_active, double lambda_r,
                                 const RadioParams& radio, const CoverageOptions& opts = {});

/// SINR threshold that a rate threshold maps to when the cell is shared by
/// `others + 1` users: 2^{tau_rate (others + 1) / B} - 1.
double rate_threshold_to_sinr(double tau_rate, int others, double B);

struct SeriesResult {
  double value = 0.0;
  /// Upper bound on the omitted part of the sum.
  double residual_bound = 0.0;
  int terms = 0;
};

SeriesResult rate_coverage(double tau_rate, Traffic traffic, const NetworkParams& params,
                           const RadioParams& radio, const CoverageOptions& opts = {});
/// Rate coverage for a given tagged-load PMF and activity.
SeriesResult rate_coverage_with_load(double tau_rate, const DiscretePMF& tagged_load,
                                     double p_active, double lambda_r, const RadioParams& radio,
                                     const CoverageOptions& opts = {});

SeriesResult md_rate(double tau_rate, double x, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const CoverageOptions& opts = {});
SeriesResult md_rate_with_load(double tau_rate, double x, const DiscretePMF& tagged_load,
                               double p_active, double lambda_r, const RadioParams& radio,
                               const CoverageOptions& opts = {});

}  // namespace platoon
