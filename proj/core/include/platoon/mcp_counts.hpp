#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "platoon/geometry.hpp"

namespace platoon {

inline constexpr double kDefaultTailBound = 1e-6;
inline constexpr int kMaxSupport = 512;

/// Probability masses on 0..K plus the mass left beyond K.
struct DiscretePMF {
  std::vector<double> masses;
  double tail_mass = 0.0;

  /// Builds from masses and sets tail_mass = 1 - sum (floored at 0).
  static DiscretePMF from_masses(std::vector<double> masses);
  static DiscretePMF point_mass(int k);

  std::size_t size() const { return masses.size(); }
  int max_index() const { return static_cast<int>(masses.size()) - 1; }
  double operator[](int k) const {
    return k >= 0 && k < static_cast<int>(masses.size()) ? masses[static_cast<std::size_t>(k)] : 0.0;
  }

  double total() const;
  double mean() const;
  double variance() const;
  /// E[X^order] over the retained support.
  double raw_moment(int order) const;
  double pgf(double s) const;
  /// P[X > k] computed as 1 - sum_{j<=k} p_j (k = -1 gives 1).
  double exceedance(int k) const;

  bool certified(double bound = kDefaultTailBound) const { return tail_mass < bound; }

  /// Drops the support beyond the first index where the cumulative mass reaches
  /// 1 - bound, moving the dropped mass into tail_mass.
  void trim(double bound = kDefaultTailBound);

  /// Throws NumericalError on a mass below -1e-12; clamps tiny negatives to 0.
  void sanitize();
};

/// Builds a PMF from `build(K)`, which returns masses on 0..K. With
/// fixed_K > 0 it is called once. Otherwise K starts at mean + 12 sd and
/// doubles until the tail is below tail_bound; reaching kMaxSupport first
/// raises NumericalError. The certified result is trimmed.
DiscretePMF certified_pmf(int fixed_K, double tail_bound, double mean, double variance,
                          const std::function<std::vector<double>(int)>& build,
                          const char* what);

/// Total variation distance, including the tails as an extra atom.
double tv_distance(const DiscretePMF& p, const DiscretePMF& q);

// ---------------------------------------------------------------------------
// Counts of the cluster process in a ball of radius r
// ---------------------------------------------------------------------------

/// log PGF g(s, r) of the count in b(o, r); selects the Taylor branch when
/// |s - 1| < 1e-6.
double g_of(double s, double r, const NetworkParams& params);
double g_closed_form(double s, double r, const NetworkParams& params);
double g_taylor(double s, double r, const NetworkParams& params);

/// i-th derivative of g(., r) at s = 0.
double g_deriv_at_zero(int i, double r, const NetworkParams& params);

/// Taylor coefficients of g(., r) at 0: c[0] = g(0, r), c[j] = g^(j)(0, r) / j!.
std::vector<double> g_coefficients(int K, double r, const NetworkParams& params);

/// Factorial cumulant: limit of the k-th derivative of g at s = 1.
double kappa(double r, int k, const NetworkParams& params);

double pgf_S(double s, double r, const NetworkParams& params);

/// Masses of exp(sum_j c_j s^j) on 0..K via p_k = (1/k) sum_j j c_j p_{k-j}.
std::vector<double> exp_series(const std::vector<double>& coeffs, int K);

/// PMF of the count on 0..K (tail_mass = 1 - sum).
DiscretePMF pmf_S(int K, double r, const NetworkParams& params);
/// PMF with K grown until the tail is below `tail_bound`; NumericalError if
/// kMaxSupport is reached first.
DiscretePMF pmf_S_auto(double r, const NetworkParams& params,
                       double tail_bound = kDefaultTailBound);

/// Integral of kappa(r/2, k)^n against the typical-cell length law.
double I_moment(int n, int k, const NetworkParams& params);
/// Same against the tagged-cell length law.
double I_tilde_moment(int n, int k, const NetworkParams& params);

/// Bundles the parameters and the radius of one counting window.
class PgfEvaluator {
 public:
  PgfEvaluator(const NetworkParams& params, double r);

  double g(double s) const { return g_of(s, r_, params_); }
  double pgf(double s) const { return pgf_S(s, r_, params_); }
  double kappa(int k) const { return platoon::kappa(r_, k, params_); }
  DiscretePMF pmf(int K) const { return pmf_S(K, r_, params_); }
  DiscretePMF pmf() const { return pmf_S_auto(r_, params_); }

  double radius() const { return r_; }
  const NetworkParams& params() const { return params_; }

 private:
  NetworkParams params_;
  double r_;
};

}  // namespace platoon
