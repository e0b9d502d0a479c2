#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "platoon/montecarlo.hpp"

using namespace platoon;

namespace {

NetworkParams fig8(double u) { return NetworkParams::from_per_km(2.0, 1.0, u, 150.0); }

SimConfig sim(int reps, std::uint64_t seed, int draws = 200) { return {reps, seed, 0.0, draws}; }

double total_mass(const DiscretePMF& pmf) {
  double s = pmf.tail_mass;
  for (double m : pmf.masses) s += m;
  return s;
}

}  // namespace

TEST(SimLoad, SameSeedIsBitIdentical) {
  const auto p = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
  for (LoadKind kind : {LoadKind::Typical, LoadKind::Tagged})
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      const auto a = sim_load(kind, tr, p, sim(2000, 7));
      const auto b = sim_load(kind, tr, p, sim(2000, 7));
      EXPECT_EQ(a.pmf.masses, b.pmf.masses);
      EXPECT_EQ(a.mean.value, b.mean.value);
      EXPECT_EQ(a.mean.std_error, b.mean.std_error);
      EXPECT_NE(sim_load(kind, tr, p, sim(2000, 8)).pmf.masses, a.pmf.masses);
    }
}

TEST(SimLoad, RecordsMatchHistogram) {
  const auto p = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
  std::ostringstream rec;
  const auto r = sim_load(LoadKind::Tagged, Traffic::PTS, p, sim(500, 3), &rec);
  std::istringstream in(rec.str());
  std::vector<int> counts(r.pmf.masses.size(), 0);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    ASSERT_NE(comma, std::string::npos);
    EXPECT_EQ(std::stoi(line.substr(0, comma)), rows);
    ++counts.at(static_cast<std::size_t>(std::stoi(line.substr(comma + 1))));
    ++rows;
  }
  EXPECT_EQ(rows, 500);
  for (std::size_t k = 0; k < counts.size(); ++k) EXPECT_DOUBLE_EQ(counts[k] / 500.0, r.pmf.masses[k]);
}

TEST(SimLoad, EmpiricalPmfsNormalise) {
  const auto p = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
  for (LoadKind kind : {LoadKind::Typical, LoadKind::Tagged})
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      const auto r = sim_load(kind, tr, p, sim(1000, 1));
      EXPECT_NEAR(total_mass(r.pmf), 1.0, 1e-12);
      EXPECT_EQ(r.pmf.tail_mass, 0.0);
      EXPECT_EQ(r.mean.n, 1000);
    }
}

TEST(SimLoad, WindowDoublingDoesNotMoveEstimates) {
  const auto p = NetworkParams::from_per_km(2.0, 1.0, 5.0, 100.0);
  for (LoadKind kind : {LoadKind::Typical, LoadKind::Tagged}) {
    SimConfig base = sim(20000, 11);
    SimConfig wide = sim(20000, 12);
    wide.window_km = 2.0 * 40.0 / (p.lambda_r * 1000.0);
    const auto a = sim_load(kind, Traffic::PTS, p, base);
    const auto b = sim_load(kind, Traffic::PTS, p, wide);
    const double se = std::hypot(a.mean.std_error, b.mean.std_error);
    EXPECT_LT(std::abs(a.mean.value - b.mean.value), 3.0 * se);
  }
}

TEST(SimLoad, EmptyTrafficGivesZeroLoad) {
  auto p = NetworkParams::from_per_km(2.0, 1.0, 0.0, 100.0);
  p.lambda = 0.0;
  for (LoadKind kind : {LoadKind::Typical, LoadKind::Tagged})
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      const auto r = sim_load(kind, tr, p, sim(300, 2));
      ASSERT_EQ(r.pmf.masses.size(), 1u);
      EXPECT_EQ(r.mean.value, 0.0);
    }
}

TEST(SimConfig, RejectsBadSettings) {
  const auto p = fig8(5.0);
  EXPECT_THROW(sim_load(LoadKind::Typical, Traffic::PTS, p, sim(0, 1)), std::invalid_argument);
  SimConfig narrow = sim(10, 1);
  narrow.window_km = 1.0;
  EXPECT_THROW(sim_load(LoadKind::Typical, Traffic::PTS, p, narrow), std::invalid_argument);
  EXPECT_THROW(sim_md_coverage(0.9, 1.0, Traffic::PTS, p, RadioParams{}, sim(10, 1)), std::domain_error);
}

TEST(DownlinkGeometry, StructuralInvariants) {
  const auto p = fig8(5.0);
  const RadioParams radio;
  const double D = interference_truncation_m(p.lambda_r, radio);
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS})
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      Rng rng = make_rng(5, rep);
      const auto g = sample_downlink_geometry(tr, p, radio, 20.0 / p.lambda_r, rng);
      EXPECT_GE(g.tagged_load, 0);
      EXPECT_GE(g.active_rsus, 1);  // the server always carries the typical VU
      EXPECT_LE(g.active_rsus, g.total_rsus);
      EXPECT_LT(static_cast<int>(g.interferer_distances.size()), g.active_rsus);
      for (double x : g.interferer_distances) {
        EXPECT_GE(x, g.serving_distance);
        EXPECT_LE(x, D);
      }
    }
}

TEST(DownlinkGeometry, TruncationBudget) {
  const RadioParams radio;
  const double lr = 2e-3;
  const double D = interference_truncation_m(lr, radio);
  const double tail = 2.0 * lr * radio.P_t * std::pow(radio.pathloss_ref_m, radio.alpha) *
                      std::pow(D, 1.0 - radio.alpha) / (radio.alpha - 1.0);
  EXPECT_NEAR(tail, 1e-4 * (radio.sigma2 + radio.P_t * radio.pathloss(1.0 / lr)), 1e-12 * tail);
}

TEST(ConditionalSuccess, MatchesFadingAverage) {
  RadioParams radio;
  DownlinkGeometry g;
  g.serving_distance = 300.0;
  g.interferer_distances = {450.0, 700.0, 1200.0, 5000.0};
  const double theta = 0.9;
  std::mt19937_64 rng(99);
  std::exponential_distribution<double> fade(1.0);
  const double noise = radio.sigma2 / (radio.P_t * radio.pathloss(g.serving_distance));
  const int n = 400000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    double interference = noise;
    for (double x : g.interferer_distances) interference += fade(rng) * std::pow(300.0 / x, radio.alpha);
    if (fade(rng) > theta * interference) ++hits;
  }
  const double p = conditional_success(g, theta, radio);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));

  radio.sigma2 = 0.0;
  g.interferer_distances.clear();
  EXPECT_EQ(conditional_success(g, theta, radio), 1.0);
}

TEST(SimCoverage, FullyLoadedNetworkMatchesAnalysis) {
  // With dense N-PTS traffic every RSU is active, so the interferers are the
  // RSU PPP itself and the analysis is exact up to the few empty cells.
  auto p = fig8(5.0);
  p.lambda = 0.2;
  const RadioParams radio;
  ASSERT_GT(active_prob(Traffic::NPTS, p), 0.999);
  const auto s = sim_coverage(0.9, Traffic::NPTS, p, radio, sim(10000, 21, 100));
  EXPECT_NEAR(s.value, coverage_prob(0.9, Traffic::NPTS, p, radio), 3.0 * s.std_error + 1e-3);
}

TEST(SimCoverage, ActiveFractionMatchesNptsActivity) {
  const auto p = fig8(5.0);
  const auto r = sim_coverage_study(0.9, 0.8, Traffic::NPTS, p, RadioParams{}, sim(3000, 4, 20));
  EXPECT_NEAR(r.active_fraction.value, active_prob(Traffic::NPTS, p), 0.005);
}

TEST(SimCoverage, NoiseLimitedCoverageIsSmall) {
  RadioParams radio;
  radio.sigma2 = 1e12;
  EXPECT_LT(sim_coverage(0.9, Traffic::PTS, fig8(5.0), radio, sim(2000, 3, 50)).value, 0.01);
}

TEST(SimCoverage, MetaDistributionAgreesForNpts) {
  const auto p = fig8(5.0);
  const RadioParams radio;
  const auto md = sim_md_coverage(0.9, 0.8, Traffic::NPTS, p, radio, sim(4000, 8, 500));
  EXPECT_NEAR(md.value, md_coverage(0.9, 0.8, Traffic::NPTS, p, radio), 0.02);
}

TEST(SimRate, SingleUserMapsToSinrThreshold) {
  // Almost no traffic: the tagged load is 0 and the rate threshold becomes
  // the SINR threshold 2^{tau / B} - 1 on the same random stream.
  auto p = fig8(5.0);
  p.lambda = 1e-9;
  const RadioParams radio;
  const auto rate = sim_rate(9e6, Traffic::NPTS, p, radio, sim(500, 6, 100));
  const auto sinr = sim_coverage(std::exp2(9e6 / radio.B) - 1.0, Traffic::NPTS, p, radio, sim(500, 6, 100));
  EXPECT_EQ(rate.value, sinr.value);
}

TEST(SimRate, WideBandwidthCoversEveryone) {
  RadioParams radio;
  radio.B = 1e15;
  EXPECT_GT(sim_rate(9e6, Traffic::PTS, fig8(5.0), radio, sim(500, 2, 100)).value, 0.99);
}
