#include "platoon/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace platoon {

double SimConfig::half_width_m(double lambda_r) const {
  return window_km > 0.0 ? 500.0 * window_km : 20.0 / lambda_r;
}

void SimConfig::validate(double lambda_r) const {
  if (replications < 1) throw std::invalid_argument("SimConfig: replications must be >= 1");
  if (fading_draws_per_geometry < 1)
    throw std::invalid_argument("SimConfig: fading_draws_per_geometry must be >= 1");
  if (2.0 * half_width_m(lambda_r) < 20.0 / lambda_r)
    throw std::invalid_argument("SimConfig: window must be at least 20 / lambda_r long");
}

namespace {

// Order-independent accumulator of count moments.
struct CountStats {
  std::vector<long long> histogram;
  long long n = 0;

  void add(std::size_t count) {
    if (count >= histogram.size()) histogram.resize(count + 1, 0);
    ++histogram[count];
    ++n;
  }

  LoadSimResult finish(std::uint64_t seed) const {
    LoadSimResult out;
    std::vector<double> masses(histogram.size());
    for (std::size_t k = 0; k < histogram.size(); ++k)
      masses[k] = static_cast<double>(histogram[k]) / static_cast<double>(n);
    out.pmf.masses = std::move(masses);
    out.pmf.tail_mass = 0.0;
    const double mean = out.pmf.mean();
    const double var_pop = out.pmf.variance();
    const double nn = static_cast<double>(n);
    out.mean = {mean, n > 1 ? std::sqrt(var_pop * nn / (nn - 1.0) / nn) : 0.0, static_cast<int>(n), seed};
    out.variance = n > 1 ? var_pop * nn / (nn - 1.0) : 0.0;
    out.third_moment = out.pmf.raw_moment(3);
    if (var_pop > 0.0) {
      double m3 = 0.0;
      for (std::size_t k = 0; k < out.pmf.masses.size(); ++k)
        m3 += std::pow(static_cast<double>(k) - mean, 3) * out.pmf.masses[k];
      out.skewness = m3 / std::pow(var_pop, 1.5);
    }
    return out;
  }
};

// VUs of the chosen traffic model restricted to `window` (unconditioned).
std::size_t count_vus(Traffic traffic, const NetworkParams& p, Interval window, Rng& rng) {
  if (traffic == Traffic::PTS) return sample_mcp(p, window, rng).positions.size();
  return sample_ppp(p.lambda, window, rng).positions.size();
}

// Other VUs in `window` seen from a VU at the origin.
std::size_t count_vus_palm(Traffic traffic, const NetworkParams& p, Interval window, Rng& rng) {
  if (traffic == Traffic::PTS) return sample_mcp_palm(p, window, rng).pattern.positions.size() - 1;
  return sample_ppp(p.lambda, window, rng).positions.size();
}

Interval cell_around(const std::vector<double>& rsus, std::size_t i, Interval window) {
  const double lo = i == 0 ? window.lo : 0.5 * (rsus[i - 1] + rsus[i]);
  const double hi = i + 1 == rsus.size() ? window.hi : 0.5 * (rsus[i] + rsus[i + 1]);
  return {lo, hi};
}

SimEstimate mean_estimate(double sum, double sum_sq, int n, std::uint64_t seed) {
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n), n, seed};
}

}  // namespace

LoadSimResult sim_load(LoadKind kind, Traffic traffic, const NetworkParams& params,
                       const SimConfig& cfg, std::ostream* records) {
  params.validate();
  cfg.validate(params.lambda_r);
  const double W = cfg.half_width_m(params.lambda_r);
  const Interval window{-W, W};
  CountStats stats;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    Rng rng = make_rng(cfg.master_seed, static_cast<std::uint64_t>(rep));
    auto rsus = sample_ppp(params.lambda_r, window, rng).positions;
    std::size_t count = 0;
    if (kind == LoadKind::Typical) {
      // Slivnyak: the typical RSU sits at the origin on top of a PPP.
      const auto at = std::upper_bound(rsus.begin(), rsus.end(), 0.0);
      const auto i = static_cast<std::size_t>(at - rsus.begin());
      rsus.insert(at, 0.0);
      // The VU process is independent of the RSUs, so sampling it on the cell
      // alone gives the same count law as sampling the whole window.
      count = count_vus(traffic, params, cell_around(rsus, i, window), rng);
    } else {
      if (rsus.empty()) rsus.push_back(0.0);  // probability e^{-2 lambda_r W}
      const PointPattern rsu_pattern{rsus, window};
      const auto i = nearest_point(rsu_pattern, 0.0);
      count = count_vus_palm(traffic, params, cell_around(rsus, i, window), rng);
    }
    stats.add(count);
    if (records) *records << rep << ',' << count << '\n';
  }
  return stats.finish(cfg.master_seed);
}

LoadSimResult sim_connectivity(Traffic traffic, const V2VParams& v2v, const SimConfig& cfg) {
  v2v.validate();
  if (cfg.replications < 1) throw std::invalid_argument("SimConfig: replications must be >= 1");
  const Interval range{-v2v.radius(), v2v.radius()};
  CountStats stats;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    Rng rng = make_rng(cfg.master_seed, static_cast<std::uint64_t>(rep));
    stats.add(count_vus_palm(traffic, v2v.net, range, rng));
  }
  return stats.finish(cfg.master_seed);
}

// ---------------------------------------------------------------------------
// Downlink
// ---------------------------------------------------------------------------

double interference_truncation_m(double lambda_r, const RadioParams& radio) {
  radio.validate();
  // Mean interference beyond D from density lambda_r on both sides:
  // 2 lambda_r P_t d0^alpha D^{1-alpha} / (alpha - 1).
  const double reference = radio.sigma2 + radio.P_t * radio.pathloss(1.0 / lambda_r);
  const double budget = 1e-4 * reference;
  const double coeff = 2.0 * lambda_r * radio.P_t * std::pow(radio.pathloss_ref_m, radio.alpha) /
                       (radio.alpha - 1.0);
  return std::pow(coeff / budget, 1.0 / (radio.alpha - 1.0));
}

DownlinkGeometry sample_downlink_geometry(Traffic traffic, const NetworkParams& params,
                                          const RadioParams& radio, double half_width_m,
                                          Rng& rng) {
  const double D = interference_truncation_m(params.lambda_r, radio);
  const double W = std::max(half_width_m, D + 5.0 / params.lambda_r);
  const Interval window{-W, W};
  const auto rsus = sample_ppp(params.lambda_r, window, rng).positions;
  std::vector<double> vus;
  if (traffic == Traffic::PTS) {
    vus = sample_mcp_palm(params, window, rng).pattern.positions;
  } else {
    vus = sample_ppp(params.lambda, window, rng).positions;
    vus.insert(std::upper_bound(vus.begin(), vus.end(), 0.0), 0.0);
  }
  DownlinkGeometry g;
  g.total_rsus = static_cast<int>(rsus.size());
  if (rsus.empty()) {
    g.serving_distance = W;
    return g;
  }

  // Sweep VUs and RSUs together: each VU activates its nearest RSU.
  std::vector<int> load(rsus.size(), 0);
  std::size_t j = 0;
  for (double v : vus) {
    while (j + 1 < rsus.size() && 0.5 * (rsus[j] + rsus[j + 1]) <= v) ++j;
    ++load[j];
  }
  const PointPattern rsu_pattern{rsus, window};
  const std::size_t server = nearest_point(rsu_pattern, 0.0);
  g.serving_distance = std::abs(rsus[server]);
  g.tagged_load = load[server] - 1;
  for (std::size_t i = 0; i < rsus.size(); ++i) {
    if (load[i] == 0) continue;
    ++g.active_rsus;
    if (i != server && std::abs(rsus[i]) <= D) g.interferer_distances.push_back(std::abs(rsus[i]));
  }
  return g;
}

double conditional_success(const DownlinkGeometry& g, double theta, const RadioParams& radio) {
  const double r = g.serving_distance;
  double p = std::exp(-theta * radio.sigma2 / (radio.P_t * radio.pathloss(r)));
  for (double x : g.interferer_distances) p /= 1.0 + theta * std::pow(r / x, radio.alpha);
  return p;
}

namespace {

// Fading-averaged success with Rayleigh gains: success iff
// h0 > theta (sum_i h_i (r / x_i)^alpha + noise / received power).
double sampled_success(const DownlinkGeometry& g, double theta, const RadioParams& radio,
                       int draws, Rng& rng) {
  const double r = g.serving_distance;
  const double noise = radio.sigma2 / (radio.P_t * radio.pathloss(r));
  std::vector<double> gains(g.interferer_distances.size());
  for (std::size_t i = 0; i < gains.size(); ++i)
    gains[i] = std::pow(r / g.interferer_distances[i], radio.alpha);
  std::exponential_distribution<double> fade(1.0);
  int hits = 0;
  for (int d = 0; d < draws; ++d) {
    double interference = noise;
    for (double gi : gains) interference += fade(rng) * gi;
    if (fade(rng) > theta * interference) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

template <typename Threshold>
CoverageSimResult coverage_study(double x, Traffic traffic, const NetworkParams& params,
                                 const RadioParams& radio, const SimConfig& cfg,
                                 Threshold threshold) {
  params.validate();
  radio.validate();
  cfg.validate(params.lambda_r);
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("meta distribution level x must lie in (0, 1)");
  const double W = cfg.half_width_m(params.lambda_r);
  double s = 0.0, ss = 0.0, m = 0.0, a = 0.0, aa = 0.0;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    Rng rng = make_rng(cfg.master_seed, static_cast<std::uint64_t>(rep));
    const auto g = sample_downlink_geometry(traffic, params, radio, W, rng);
    const double theta = threshold(g);
    const double pc = std::isfinite(theta)
                          ? sampled_success(g, theta, radio, cfg.fading_draws_per_geometry, rng)
                          : 0.0;
    s += pc;
    ss += pc * pc;
    if (pc > x) m += 1.0;
    const double frac = g.total_rsus ? static_cast<double>(g.active_rsus) / g.total_rsus : 0.0;
    a += frac;
    aa += frac * frac;
  }
  const int n = cfg.replications;
  CoverageSimResult out;
  out.coverage = mean_estimate(s, ss, n, cfg.master_seed);
  out.meta = mean_estimate(m, m, n, cfg.master_seed);
  out.active_fraction = mean_estimate(a, aa, n, cfg.master_seed);
  return out;
}

}  // namespace

CoverageSimResult sim_coverage_study(double tau, double x, Traffic traffic,
                                     const NetworkParams& params, const RadioParams& radio,
                                     const SimConfig& cfg) {
  if (!(tau > 0.0)) throw std::domain_error("sim_coverage: tau must be > 0");
  return coverage_study(x, traffic, params, radio, cfg, [&](const DownlinkGeometry&) { return tau; });
}

SimEstimate sim_coverage(double tau, Traffic traffic, const NetworkParams& params,
                         const RadioParams& radio, const SimConfig& cfg) {
  return sim_coverage_study(tau, 0.5, traffic, params, radio, cfg).coverage;
}

SimEstimate sim_md_coverage(double tau, double x, Traffic traffic, const NetworkParams& params,
                            const RadioParams& radio, const SimConfig& cfg) {
  return sim_coverage_study(tau, x, traffic, params, radio, cfg).meta;
}

CoverageSimResult sim_rate_study(double tau_rate, double x, Traffic traffic,
                                 const NetworkParams& params, const RadioParams& radio,
                                 const SimConfig& cfg) {
  if (!(tau_rate > 0.0)) throw std::domain_error("sim_rate: tau must be > 0");
  return coverage_study(x, traffic, params, radio, cfg, [&](const DownlinkGeometry& g) {
    return rate_threshold_to_sinr(tau_rate, g.tagged_load, radio.B);
  });
}

SimEstimate sim_rate(double tau_rate, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const SimConfig& cfg) {
  return sim_rate_study(tau_rate, 0.5, traffic, params, radio, cfg).coverage;
}

SimEstimate sim_md_rate(double tau_rate, double x, Traffic traffic, const NetworkParams& params,
                        const RadioParams& radio, const SimConfig& cfg) {
  return sim_rate_study(tau_rate, x, traffic, params, radio, cfg).meta;
}

}  // namespace platoon
