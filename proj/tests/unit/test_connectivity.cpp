#include <gtest/gtest.h>

#include <cmath>

#include "platoon/connectivity.hpp"
#include "platoon/montecarlo.hpp"
#include "platoon/numerics.hpp"

using namespace platoon;

namespace {

// Fig. 7 setting: a = 150 m, lambda_P = 1/km, u = 2.
V2VParams fig7(double R_b) { return {R_b, NetworkParams::from_per_km(2.0, 1.0, 2.0, 150.0)}; }

const V2VParams kFig2Range{200.0, NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0)};

SimConfig sim_reps(int reps, std::uint64_t seed) { return SimConfig{reps, seed, 0.0, 500}; }

}  // namespace

TEST(DegreeNpts, PoissonLaw) {
  const auto v = fig7(200.0);
  const double mu = v.net.lambda * v.R_b;
  const auto pmf = pmf_degree_npts(v, {0, 1e-14});
  EXPECT_NEAR(pmf.mean(), mu, 1e-12);
  EXPECT_NEAR(pmf.variance(), mu, 1e-12);
  for (int k = 0; k <= 5; ++k) EXPECT_NEAR(pmf[k], poisson_pmf(k, mu), 1e-15);
  EXPECT_NEAR(pgf_degree_npts(0.3, v), std::exp(mu * (0.3 - 1.0)), 1e-15);
}

TEST(DegreeNpts, EmptyRoadGivesPointMass) {
  auto v = fig7(200.0);
  v.net.lambda = 0.0;
  EXPECT_DOUBLE_EQ(pmf_degree_npts(v)[0], 1.0);
}

TEST(DegreePts, NoVusGivesPointMass) {
  auto v = fig7(200.0);
  v.net.m = 0.0;
  EXPECT_NEAR(pmf_degree_pts(v)[0], 1.0, 1e-12);
}

TEST(DegreePts, PgfNormalisedAndConsistent) {
  for (double rb : {100.0, 200.0, 400.0}) {
    const auto v = fig7(rb);
    EXPECT_NEAR(pgf_degree_pts(1.0, v), 1.0, 1e-9);
    const auto pmf = pmf_degree_pts(v);
    EXPECT_LT(pmf.tail_mass, 1e-6);
    EXPECT_NEAR(pmf.total() + pmf.tail_mass, 1.0, 1e-9);
    for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) EXPECT_NEAR(pmf.pgf(s), pgf_degree_pts(s, v), 1e-6);
  }
}

TEST(DegreePts, OwnClusterFactorMatchesQuadrature) {
  const auto v = fig7(200.0);
  const double a = v.net.a, m = v.net.m, r = v.R_b / 2.0;
  for (double s : {0.0, 0.4, 0.8}) {
    const double kink = std::abs(r - a);
    auto f = [&](double x) { return std::exp(m * intersection_length(r, a, x) / (2 * a) * (s - 1.0)); };
    const double oracle = (integrate(f, 0.0, kink) + integrate(f, kink, a)) / a;
    EXPECT_NEAR(pgf_own_cluster(s, v), oracle, 1e-12);
  }
  double total = 0.0;
  for (double p : own_cluster_masses(40, v)) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(DegreePts, MoreDispersedThanPoisson) {
  // Seen from a VU, the degree also counts the VU's own platoon, so only the
  // dispersion is comparable across the two models.
  const auto v = fig7(200.0);
  const auto pts = pmf_degree_pts(v);
  const auto npts = pmf_degree_npts(v);
  EXPECT_GT(pts.variance() / pts.mean(), 1.1);
  EXPECT_NEAR(npts.variance() / npts.mean(), 1.0, 1e-4);
  EXPECT_GT(pts.variance(), npts.variance());
}

TEST(DegreePts, ExceedanceDominatesAtSmallK) {
  for (double rb : {100.0, 200.0, 400.0}) {
    const auto v = fig7(rb);
    const auto pts = pmf_degree_pts(v);
    const auto npts = pmf_degree_npts(v);
    for (int k = 0; k <= 1; ++k) EXPECT_GT(prob_degree_exceeds(k, pts), prob_degree_exceeds(k, npts)) << rb;
  }
}

TEST(ProbDegreeExceeds, Conventions) {
  const auto pmf = pmf_degree_pts(fig7(200.0));
  EXPECT_DOUBLE_EQ(prob_degree_exceeds(-1, pmf), 1.0);
  EXPECT_LT(prob_degree_exceeds(pmf.max_index(), pmf), 1e-6);
  double prev = 1.0;
  for (int k = 0; k < 30; ++k) {
    const double v = prob_degree_exceeds(k, pmf);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Degree, MatchesPalmSimulation) {
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
    for (const V2VParams& v : {kFig2Range, fig7(400.0)}) {
      const auto analytic = pmf_degree(tr, v);
      const auto sim = sim_connectivity(tr, v, sim_reps(100000, 9)).pmf;
      EXPECT_LT(tv_distance(analytic, sim), 0.01);
      for (int k = 0; k <= 10; ++k)
        EXPECT_LT(std::abs(prob_degree_exceeds(k, analytic) - prob_degree_exceeds(k, sim)), 0.01);
    }
  }
}

TEST(Degree, NoVusSimulatesToZero) {
  auto v = fig7(200.0);
  v.net.m = 0.0;
  v.net.lambda = 0.0;
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS})
    EXPECT_DOUBLE_EQ(sim_connectivity(tr, v, sim_reps(1000, 1)).pmf[0], 1.0);
}
