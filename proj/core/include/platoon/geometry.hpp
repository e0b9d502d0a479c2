#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "platoon/random.hpp"

namespace platoon {

enum class Traffic { PTS, NPTS };

std::string to_string(Traffic t);
Traffic traffic_from_string(const std::string& name);

/// Network densities in SI units (per metre, metres).
struct NetworkParams {
  double lambda_r = 2e-3;  // RSU density
  double lambda_p = 1e-3;  // platoon (parent) density
  double m = 5.0;          // mean VUs per platoon
  double a = 100.0;        // platoon half-width
  double lambda = 5e-3;    // N-PTS VU density

  /// Platooned setting with the matching N-PTS density lambda = m * lambda_p.
  static NetworkParams platooned(double lambda_r, double lambda_p, double m, double a);
  /// Same, from per-km densities.
  static NetworkParams from_per_km(double lambda_r_km, double lambda_p_km, double m, double a);

  /// Daughter density inside a cluster, m / (2a).
  double lambda_d() const { return m / (2.0 * a); }

  /// Throws std::invalid_argument. m = 0 and lambda = 0 are accepted as the
  /// empty-traffic limits.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct PointPattern {
  std::vector<double> positions;  // sorted ascending
  Interval window;
};

/// Palm version of the cluster process seen from a VU at the origin.
struct PalmPattern {
  PointPattern pattern;           // includes the typical point
  std::size_t typical_index = 0;  // index of the origin point in pattern.positions
  double cluster_center = 0.0;    // x0 of the typical VU's own platoon
  std::size_t cluster_size = 0;   // daughters of that platoon besides the typical VU
};

struct VoronoiCell1D {
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
};

PointPattern sample_ppp(double rate, Interval window, Rng& rng);
PointPattern sample_ppp(double rate, Interval window, std::uint64_t seed);

/// Matern cluster process. Parents are drawn on the window dilated by a so
/// that clusters straddling the boundary are represented.
PointPattern sample_mcp(const NetworkParams& params, Interval window, Rng& rng);
PointPattern sample_mcp(const NetworkParams& params, Interval window, std::uint64_t seed);

/// Cluster process conditioned on a VU at the origin: a fresh process plus
/// the typical VU's own cluster centred at x0 ~ U[-a, a].
PalmPattern sample_mcp_palm(const NetworkParams& params, Interval window, Rng& rng);
PalmPattern sample_mcp_palm(const NetworkParams& params, Interval window, std::uint64_t seed);

/// Cells bounded by midpoints between neighbours; the window closes the ends.
std::vector<VoronoiCell1D> voronoi_1d(const PointPattern& pattern);

/// Index of the point nearest to x (ties resolved to the lower index).
std::size_t nearest_point(const PointPattern& pattern, double x);

double pdf_typical_cell(double ell, double lambda_r);
double pdf_tagged_cell(double ell, double lambda_r);
double mgf_L(double t, double lambda_r);
double mgf_L0(double t, double lambda_r);
double pdf_serving_distance(double r, double lambda_r);

/// Upper quantile of the cell-length law: P[L > ell] = q. `shape` is 2 for the
/// typical cell and 3 for the tagged cell.
double cell_length_quantile(int shape, double lambda_r, double q);

void write_pattern_csv(std::ostream& os, const PointPattern& pattern);
PointPattern read_pattern_csv(std::istream& is);

}  // namespace platoon
