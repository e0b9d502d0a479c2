#pragma once

#include <string>
#include <vector>

#include "platoon/mcp_counts.hpp"
#include "platoon/numerics.hpp"

namespace platoon {

struct LoadMoments {
  double mean = 0.0;
  double variance = 0.0;
  double third_moment = 0.0;  // raw E[X^3]
  double skewness = 0.0;

  /// Fills skewness from the first three moments (0 when variance is 0).
  static LoadMoments from_raw(double mean, double variance, double third_moment);
};

/// Controls for PMF construction. K = 0 selects the support automatically so
/// that the tail is below tail_bound.
struct PmfOptions {
  int K = 0;
  double tail_bound = kDefaultTailBound;
  QuadratureSpec quad{1e-12, 1e-10, 2000, 1.0};
};

// Typical RSU -----------------------------------------------------------------

DiscretePMF pmf_typical_pts(const NetworkParams& params, const PmfOptions& opts = {});
double pgf_typical_pts(double s, const NetworkParams& params);
LoadMoments moments_typical_pts(const NetworkParams& params);

DiscretePMF pmf_typical_npts(const NetworkParams& params, const PmfOptions& opts = {});
double pgf_typical_npts(double s, const NetworkParams& params);
LoadMoments moments_typical_npts(const NetworkParams& params);

// Tagged platoon contribution V_m ----------------------------------------------
//
// Given a tagged cell of length t that contains the typical VU at a uniform
// position, V_m counts the other members of the typical VU's own platoon that
// fall in the cell. With Z = min(t, 2a) the overlap of the platoon span with
// the cell equals Z with weight w1 = Z |t/2 - a| / (a t), and is otherwise Z Y
// with Y of density 2y on [0, 1].

double pgf_vm(double s, double t, const NetworkParams& params);
/// Evaluates the short-cell (t <= 2a) or long-cell (t >= 2a) expression
/// regardless of t; both agree at t = 2a.
double pgf_vm_branch(double s, double t, const NetworkParams& params, bool short_cell);
/// P[V_m = n | t].
double nu_n(int n, double t, const NetworkParams& params);
DiscretePMF pmf_vm(int K, double t, const NetworkParams& params);
/// E[V (V-1) ... (V-j+1) | t].
double vm_factorial_moment(int j, double t, const NetworkParams& params);

struct ConditionalMoments {
  double mean = 0.0;
  double variance = 0.0;
};
ConditionalMoments moments_vm_conditional(double t, const NetworkParams& params);
ConditionalMoments moments_vm_conditional_branch(double t, const NetworkParams& params,
                                                 bool short_cell);
/// Mean and variance of V_m after averaging over the tagged-cell length.
ConditionalMoments moments_vm(const NetworkParams& params);
/// E[V_m (V_m - 1)] after averaging over the tagged-cell length.
double vm_second_factorial_moment(const NetworkParams& params);

// Tagged RSU -------------------------------------------------------------------

DiscretePMF pmf_tagged_pts(const NetworkParams& params, const PmfOptions& opts = {});
double pgf_tagged_pts(double s, const NetworkParams& params);
LoadMoments moments_tagged_pts(const NetworkParams& params);
/// Variance assembled from the tagged I-moments and the closed-form V_m terms;
/// an independent path to the quadrature-based variance in moments_tagged_pts.
double variance_tagged_pts_closed_form(const NetworkParams& params);

DiscretePMF pmf_tagged_npts(const NetworkParams& params, const PmfOptions& opts = {});
double pgf_tagged_npts(double s, const NetworkParams& params);
LoadMoments moments_tagged_npts(const NetworkParams& params);

// Convenience dispatch -----------------------------------------------------------

enum class LoadKind { Typical, Tagged };

std::string to_string(LoadKind k);
LoadKind load_kind_from_string(const std::string& name);

DiscretePMF load_pmf(LoadKind kind, Traffic traffic, const NetworkParams& params,
                     const PmfOptions& opts = {});
LoadMoments load_moments(LoadKind kind, Traffic traffic, const NetworkParams& params);

// Operational metrics ------------------------------------------------------------

struct OperationalMetrics {
  LoadKind kind = LoadKind::Typical;
  // Typical cell.
  double p_off = 0.0;  // p(0)
  double s_avg = 0.0;  // mean / (1 - p_off)
  int k_avg = 0;       // floor(s_avg)
  double p_b = 0.0;    // sum_{k=1}^{k_avg} p(k)
  // Tagged cell. The single-user probability is reported at both indices:
  // p(0) means the typical VU is alone in its cell (total load 1), p(1) means
  // exactly one other VU shares it.
  double P1_alone = 0.0;
  double P1_one_other = 0.0;
  int m_avg = 0;     // floor(mean)
  double P_b = 0.0;  // sum_{k=1}^{m_avg} p(k)
  std::vector<std::string> warnings;
};

OperationalMetrics operational_metrics(const DiscretePMF& pmf, LoadKind kind);

}  // namespace platoon
