#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "platoon/connectivity.hpp"
#include "platoon/coverage.hpp"
#include "platoon/load.hpp"

namespace platoon {

struct SimConfig {
  int replications = 100000;
  std::uint64_t master_seed = 1;
  /// Full simulation window length in km, centred on the origin. 0 selects
  /// 40 / lambda_r (a half-width of 20 mean RSU spacings).
  double window_km = 0.0;
  int fading_draws_per_geometry = 500;

  /// Window half-width in metres for the given RSU density.
  double half_width_m(double lambda_r) const;
  void validate(double lambda_r) const;
};

struct SimEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
};

struct LoadSimResult {
  DiscretePMF pmf;  // empirical, tail_mass = 0
  SimEstimate mean;
  double variance = 0.0;
  double third_moment = 0.0;
  double skewness = 0.0;
};

/// Typical cells use an RSU placed at the origin; tagged cells use a VU at
/// the origin served by its nearest RSU. Counts exclude the typical VU.
/// When `records` is given, one "replication,count" line per replication is
/// written to it.
LoadSimResult sim_load(LoadKind kind, Traffic traffic, const NetworkParams& params,
                       const SimConfig& cfg, std::ostream* records = nullptr);

/// Number of other VUs within R_b / 2 of a VU at the origin.
LoadSimResult sim_connectivity(Traffic traffic, const V2VParams& v2v, const SimConfig& cfg);

/// One downlink snapshot seen from the typical VU at the origin.
struct DownlinkGeometry {
  double serving_distance = 0.0;
  std::vector<double> interferer_distances;  // active RSUs other than the server
  int tagged_load = 0;                       // other VUs in the serving cell
  int active_rsus = 0;
  int total_rsus = 0;
};

/// Distance beyond which the mean interference from a density lambda_r of
/// transmitters is below 1e-4 of (sigma^2 + received power at 1 / lambda_r).
double interference_truncation_m(double lambda_r, const RadioParams& radio);

DownlinkGeometry sample_downlink_geometry(Traffic traffic, const NetworkParams& params,
                                          const RadioParams& radio, double half_width_m,
                                          Rng& rng);

/// Exact fading average of 1{SINR > theta} for a geometry (Rayleigh fading).
double conditional_success(const DownlinkGeometry& g, double theta, const RadioParams& radio);

struct CoverageSimResult {
  SimEstimate coverage;        // mean conditional success
  SimEstimate meta;            // fraction of geometries with success above x
  SimEstimate active_fraction; // fraction of active RSUs in the window
};

/// SINR coverage and its meta distribution at level x. Conditional success
/// per geometry is the average over fading_draws_per_geometry draws.
CoverageSimResult sim_coverage_study(double tau, double x, Traffic traffic,
                                     const NetworkParams& params, const RadioParams& radio,
                                     const SimConfig& cfg);
SimEstimate sim_coverage(double tau, Traffic traffic, const NetworkParams& params,
                         const RadioParams& radio, const SimConfig& cfg);
SimEstimate sim_md_coverage(double tau, double x, Traffic traffic, const NetworkParams& params,
                            const RadioParams& radio, const SimConfig& cfg);

/// Rate coverage with the counted tagged-cell load deciding the per-user share.
CoverageSimResult sim_rate_study(double tau_rate, double x, Traffic traffic,
                                 const NetworkParams& params, const RadioParams& radio,
                                 const SimConfig& cfg);
SimEstimate sim_rate(double tau_rate, Traffic traffic, const NetworkParams& params,
                     const RadioParams& radio, const SimConfig& cfg);
SimEstimate sim_md_rate(double tau_rate, double x, Traffic traffic, const NetworkParams& params,
                        const RadioParams& radio, const SimConfig& cfg);

}  // namespace platoon
