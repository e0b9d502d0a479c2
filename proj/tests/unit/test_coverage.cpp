#include <gtest/gtest.h>

#include <cmath>

#include "platoon/coverage.hpp"
#include "platoon/load.hpp"

using namespace platoon;

namespace {

// Fig. 8: a = 150 m, P_t = 1 W, sigma^2 = 5e-5 W, alpha = 3.5, tau = 0.9.
NetworkParams fig8(double u) { return NetworkParams::from_per_km(2.0, 1.0, u, 150.0); }
const RadioParams kFig8Radio{};

RadioParams fig9_radio() {
  RadioParams r;
  r.alpha = 4.0;
  return r;
}

// E[P_s^b] straight from the model: serving distance law, noise factor and
// the interference product over a thinned PPP beyond r.
double moment_oracle(double b, double tau, double p, double lr, const RadioParams& radio) {
  const QuadratureSpec inner{1e-300, 1e-12, 4000, 1.0};
  auto f = [&](double r) {
    if (r == 0.0) return 2.0 * lr;
    auto g = [&](double y) { return -std::expm1(-b * std::log1p(tau * std::pow(r / y, radio.alpha))); };
    const double interference = integrate(g, r, INFINITY, {1e-300, 1e-12, 4000, r});
    const double noise = tau * radio.sigma2 / (radio.P_t * radio.pathloss(r));
    return 2.0 * lr * std::exp(-2.0 * lr * r - b * noise - 2.0 * p * lr * interference);
  };
  return integrate(f, 0.0, INFINITY, {1e-300, 1e-10, 4000, 1.0 / (2.0 * lr)});
}

}  // namespace

TEST(ActiveProb, ClosedFormsAndLimits) {
  for (double u : {2.0, 5.0, 20.0}) {
    const auto p = fig8(u);
    EXPECT_NEAR(active_prob(Traffic::NPTS, p), 1.0 - pmf_typical_npts(p)[0], 1e-12);
    EXPECT_NEAR(active_prob(Traffic::PTS, p), 1.0 - pmf_typical_pts(p)[0], 1e-9);
    EXPECT_GT(active_prob(Traffic::NPTS, p), active_prob(Traffic::PTS, p));
  }
  NetworkParams dense = fig8(5.0);
  dense.lambda = 1.0;
  dense.lambda_p = 1.0;
  EXPECT_NEAR(active_prob(Traffic::NPTS, dense), 1.0, 1e-4);
  EXPECT_NEAR(active_prob(Traffic::PTS, dense), 1.0, 1e-4);
}

TEST(LaplaceInterference, ClosedFormMatchesQuadrature) {
  EXPECT_EQ(laplace_interference(0.0, 300.0, 0.5, 2e-3, kFig8Radio), 1.0);
  for (double alpha : {2.5, 3.5, 4.0}) {
    RadioParams radio;
    radio.alpha = alpha;
    for (double r : {20.0, 250.0, 1500.0})
      for (double s : {1e-3, 1.0, 1e3}) {
        const double closed = laplace_interference(s, r, 0.6, 2e-3, radio);
        const double quad = laplace_interference_quadrature(s, r, 0.6, 2e-3, radio);
        EXPECT_NEAR(closed, quad, 1e-8 * quad) << alpha << " " << r << " " << s;
      }
  }
}

TEST(LaplaceInterference, NonincreasingInS) {
  double prev = 1.0;
  for (double s = 0.01; s < 1e4; s *= 1.7) {
    const double v = laplace_interference(s, 300.0, 0.5, 2e-3, kFig8Radio);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(CoverageProb, LimitsAndMonotonicity) {
  const auto p = fig8(5.0);
  EXPECT_NEAR(coverage_prob(1e-9, Traffic::PTS, p, kFig8Radio), 1.0, 1e-6);
  double prev = 1.0;
  for (double tau = 0.01; tau < 1e6; tau *= 2.0) {
    const double v = coverage_prob(tau, Traffic::PTS, p, kFig8Radio);
    EXPECT_LE(v, prev + 1e-12);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
  // Noise-limited: only RSUs within r_noise << 1 / lambda_r can serve.
  RadioParams loud = kFig8Radio;
  loud.sigma2 = 1e12;
  const double r_noise = loud.pathloss_ref_m * std::pow(0.9 * loud.sigma2 / loud.P_t, -1.0 / loud.alpha);
  const double asymptote = 2.0 * p.lambda_r * r_noise * std::tgamma(1.0 + 1.0 / loud.alpha);
  EXPECT_NEAR(coverage_prob(0.9, Traffic::PTS, p, loud), asymptote, 0.01 * asymptote);
}

TEST(CoverageProb, NoiselessClosedForm) {
  RadioParams radio = kFig8Radio;
  radio.sigma2 = 0.0;
  const auto p = fig8(5.0);
  const double pa = active_prob(Traffic::PTS, p);
  // With r integrated out: 1 / (1 + p_a * tau^{1/alpha} * int_{tau^{-1/alpha}}^inf dv / (1 + v^alpha)).
  const double tau = 0.9, a = radio.alpha;
  const double tail = integrate([&](double v) { return 1.0 / (1.0 + std::pow(v, a)); },
                                std::pow(tau, -1.0 / a), INFINITY, {1e-300, 1e-13, 2000, 1.0});
  const double expected = 1.0 / (1.0 + pa * std::pow(tau, 1.0 / a) * tail);
  EXPECT_NEAR(coverage_prob(tau, Traffic::PTS, p, radio), expected, 1e-10);
}

TEST(CoverageProb, Fig8Ordering) {
  for (double u = 5.0; u <= 35.0; u += 5.0)
    EXPECT_GT(coverage_prob(0.9, Traffic::PTS, fig8(u), kFig8Radio),
              coverage_prob(0.9, Traffic::NPTS, fig8(u), kFig8Radio));
}

TEST(MomentMq, TrivialOrdersAndOrdering) {
  const auto p = fig8(5.0);
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
    EXPECT_EQ(moment_Mq(0.0, 0.9, tr, p, kFig8Radio), ComplexValue(1.0, 0.0));
    const double m1 = moment_Mq(1.0, 0.9, tr, p, kFig8Radio).real();
    const double cp = coverage_prob(0.9, tr, p, kFig8Radio);
    EXPECT_NEAR(m1, cp, 1e-6 * cp);
    EXPECT_LE(moment_Mq(2.0, 0.9, tr, p, kFig8Radio).real(), m1);
    EXPECT_LE(std::abs(moment_Mq({0.0, 3.0}, 0.9, tr, p, kFig8Radio)), 1.0 + 1e-12);
  }
}

TEST(MomentMq, RealOrdersMatchModelQuadrature) {
  const auto p = fig8(5.0);
  const double pa = active_prob(Traffic::PTS, p);
  for (double b : {0.5, 2.0, 3.0})
    for (double tau : {0.9, 10.0}) {
      const double oracle = moment_oracle(b, tau, pa, p.lambda_r, kFig8Radio);
      const double v = moment_Mq(b, tau, Traffic::PTS, p, kFig8Radio).real();
      EXPECT_NEAR(v, oracle, 1e-7 * oracle) << b << " " << tau;
    }
}

TEST(MomentMq, ContourMatchesDirectPath) {
  for (double alpha : {3.5, 4.0})
    for (double t : {40.0, 60.0, 90.0}) {
      const auto contour = interference_moment_integral_contour(t, 0.9, alpha);
      const auto direct = interference_moment_integral_direct({0.0, t}, 0.9, alpha);
      EXPECT_NEAR(std::abs(contour - direct), 0.0, 1e-8 * std::abs(direct)) << alpha << " " << t;
    }
}

TEST(MdCoverage, RangeMonotoneAndMeanIdentity) {
  const auto p = fig8(5.0);
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
    double prev = 1.0;
    for (double x = 0.02; x < 1.0; x += 0.04) {
      const double v = md_coverage(0.9, x, tr, p, kFig8Radio);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_LE(v, prev + 1e-3);
      prev = v;
    }
    EXPECT_GT(md_coverage(0.9, 1e-4, tr, p, kFig8Radio), 0.99);
    // Simpson in y with x = 1 - (1 - y)^2, which resolves the steep end at x = 1.
    const int n = 64;
    double mean = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = static_cast<double>(i) / n;
      const double x = 1.0 - (1.0 - y) * (1.0 - y);
      const double md = i == 0 ? 1.0 : i == n ? 0.0 : md_coverage(0.9, x, tr, p, kFig8Radio);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      mean += w * md * 2.0 * (1.0 - y) / (3.0 * n);
    }
    EXPECT_NEAR(mean, coverage_prob(0.9, tr, p, kFig8Radio), 1e-3);
  }
}

TEST(MdCoverage, Fig8Ordering) {
  for (double u = 5.0; u <= 35.0; u += 10.0)
    EXPECT_GT(md_coverage(0.9, 0.8, Traffic::PTS, fig8(u), kFig8Radio),
              md_coverage(0.9, 0.8, Traffic::NPTS, fig8(u), kFig8Radio));
}

TEST(MdCoverage, MarkovBoundAtExtremeThresholds) {
  // Thresholds this large appear in the rate series for heavily loaded cells.
  const auto p = fig8(30.0);
  const RadioParams radio = fig9_radio();
  for (double theta : {1e6, 1e10, 1e14, 1e18, 1e22}) {
    const double cp = coverage_prob(theta, Traffic::PTS, p, radio);
    const double md = md_coverage(theta, 0.9, Traffic::PTS, p, radio);
    EXPECT_GT(cp, 0.0);
    EXPECT_LE(md, cp / 0.9 + 1e-4) << theta;
  }
}

TEST(RateCoverage, ThresholdMapping) {
  EXPECT_NEAR(rate_threshold_to_sinr(9e6, 0, 10e6), std::exp2(0.9) - 1.0, 1e-15);
  EXPECT_NEAR(rate_threshold_to_sinr(9e6, 2, 10e6), std::exp2(2.7) - 1.0, 1e-14);
}

TEST(RateCoverage, Limits) {
  const auto p = fig8(5.0);
  RadioParams wide = fig9_radio();
  wide.B = 1e15;
  EXPECT_NEAR(rate_coverage(9e6, Traffic::PTS, p, wide).value, 1.0, 1e-5);

  const RadioParams radio = fig9_radio();
  const auto alone = DiscretePMF::point_mass(0);
  const double pa = active_prob(Traffic::NPTS, p);
  const double theta = rate_threshold_to_sinr(9e6, 0, radio.B);
  EXPECT_NEAR(rate_coverage_with_load(9e6, alone, pa, p.lambda_r, radio).value,
              coverage_prob_with_activity(theta, pa, p.lambda_r, radio), 1e-12);
  EXPECT_NEAR(md_rate_with_load(9e6, 0.9, alone, pa, p.lambda_r, radio).value,
              md_coverage_with_activity(theta, 0.9, pa, p.lambda_r, radio), 1e-12);
}

TEST(RateCoverage, Fig9OrderingAndResidual) {
  const RadioParams radio = fig9_radio();
  for (double u : {5.0, 20.0, 35.0}) {
    const auto pts = rate_coverage(9e6, Traffic::PTS, fig8(u), radio);
    const auto npts = rate_coverage(9e6, Traffic::NPTS, fig8(u), radio);
    EXPECT_LT(pts.value, npts.value);
    EXPECT_LT(pts.residual_bound, 2e-6);
    EXPECT_LT(npts.residual_bound, 2e-6);
  }
}

TEST(MdRate, BoundedByRateCoverage) {
  const RadioParams radio = fig9_radio();
  for (double u : {5.0, 30.0})
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      const auto rc = rate_coverage(9e6, tr, fig8(u), radio);
      const auto md = md_rate(9e6, 0.9, tr, fig8(u), radio);
      EXPECT_GE(md.value, 0.0);
      EXPECT_LE(md.value, rc.value / 0.9 + md.residual_bound);
    }
}

TEST(MdRate, ModelsCloseAtSmallU) {
  const RadioParams radio = fig9_radio();
  const double pts = md_rate(9e6, 0.9, Traffic::PTS, fig8(5.0), radio).value;
  const double npts = md_rate(9e6, 0.9, Traffic::NPTS, fig8(5.0), radio).value;
  EXPECT_LT(std::abs(pts - npts), 0.03);
}

TEST(Coverage, RejectsBadArguments) {
  const auto p = fig8(5.0);
  EXPECT_THROW(coverage_prob(0.0, Traffic::PTS, p, kFig8Radio), std::domain_error);
  EXPECT_THROW(md_coverage(0.9, 1.0, Traffic::PTS, p, kFig8Radio), std::domain_error);
  RadioParams bad = kFig8Radio;
  bad.alpha = 1.0;
  EXPECT_THROW(coverage_prob(0.9, Traffic::PTS, p, bad), std::invalid_argument);
}
