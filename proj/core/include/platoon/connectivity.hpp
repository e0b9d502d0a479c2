#pragma once

#include "platoon/load.hpp"
#include "platoon/mcp_counts.hpp"

namespace platoon {

/// V2V setting. The typical VU counts the other VUs within R_b / 2 on either
/// side, so the covered road length is R_b under both traffic models.
struct V2VParams {
  double R_b = 200.0;
  NetworkParams net;

  double radius() const { return 0.5 * R_b; }
  void validate() const;
};

double pgf_degree_npts(double s, const V2VParams& v2v);
DiscretePMF pmf_degree_npts(const V2VParams& v2v, const PmfOptions& opts = {});

/// PGF of the count of the typical VU's own platoon members within the range.
double pgf_own_cluster(double s, const V2VParams& v2v);
/// PMF of the same count on 0..K.
std::vector<double> own_cluster_masses(int K, const V2VParams& v2v);

double pgf_degree_pts(double s, const V2VParams& v2v);
DiscretePMF pmf_degree_pts(const V2VParams& v2v, const PmfOptions& opts = {});

DiscretePMF pmf_degree(Traffic traffic, const V2VParams& v2v, const PmfOptions& opts = {});

/// P[N > k]; k = -1 gives 1.
double prob_degree_exceeds(int k, const DiscretePMF& pmf);

}  // namespace platoon
