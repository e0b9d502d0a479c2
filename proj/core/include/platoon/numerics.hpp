#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoon {

using ComplexValue = std::complex<double>;

/// Tolerances for the adaptive Gauss-Kronrod integrator.
struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  /// Length scale of the map x = lo + scale * u / (1 - u) used on [lo, +inf).
  double semi_infinite_scale = 1.0;

  void validate() const;
};

/// Raised when an iterative or adaptive routine cannot reach its tolerance.
/// Carries the best estimate obtained so far.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          double best_estimate = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct VectorQuadratureResult {
  std::vector<double> value;
  double abs_error = 0.0;  // max-norm over components
  int evaluations = 0;
  bool converged = false;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Upper incomplete gamma, unregularized: integral of t^(a-1) e^-t over [x, inf).
double gamma_upper(double a, double x);
/// Lower incomplete gamma, unregularized.
double gamma_lower(double a, double x);

/// Gauss hypergeometric 2F1(a, b; c; z) for real parameters and z <= 0.
/// Direct series for |z| <= 1/2, Pfaff transform on [-2, -1/2), and the 1/z
/// connection formula below -2 (Pfaff again when a - b is an integer).
double hyp2f1_real(double a, double b, double c, double z);

/// Length of the intersection of two 1D balls with radii r and a whose
/// centres are |x| apart.
double intersection_length(double r, double a, double x);

/// Integral of x^k e^{-m x} over [0, 2a].
double func_F(double m, int k, double a);
/// Integral of x^k e^{-m x} over [2a, inf).
double func_G(double m, int k, double a);

/// (x - a) for x > a, else 0.
double ramp(double x, double a);
/// 1 for x >= 0, else 0.
double unit_step(double x);

/// Poisson mass e^{-mu} mu^k / k!, evaluated in log space.
double poisson_pmf(int k, double mu);

/// Table of Poisson(mu) upper tails P[N >= j] for j = 0..n_max, accumulated
/// from the far tail so that small values keep full relative precision.
/// Equals the regularized lower incomplete gamma P(j, mu) for j >= 1.
std::vector<double> poisson_tail_table(double mu, int n_max);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Globally adaptive 21-point Gauss-Kronrod quadrature. `hi` may be +inf.
/// Never throws on tolerance failure; inspect `converged`.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo,
                                    double hi, const QuadratureSpec& spec = {});

/// Same as integrate_adaptive but throws NumericalError (with the best
/// estimate attached) when the tolerance is not met.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

/// Vector-valued integrand: f(x, out) fills `out` (size dim). Error control
/// uses the max-norm across components.
using VectorIntegrand = std::function<void(double, std::span<double>)>;
VectorQuadratureResult integrate_adaptive_vec(const VectorIntegrand& f, std::size_t dim,
                                              double lo, double hi,
                                              const QuadratureSpec& spec = {});

/// Complex integrand over a finite or semi-infinite range.
ComplexValue integrate_complex(const std::function<ComplexValue(double)>& f, double lo,
                               double hi, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Gil-Pelaez inversion
// ---------------------------------------------------------------------------

struct GilPelaezOptions {
  /// Width of the first panel [0, first_panel]; later panels double.
  double first_panel = 1.0;
  /// Hard cap on the truncation point.
  double max_truncation = 1e9;
  /// Upper bound on E|ln X - ln x|. The integrand is bounded by it, so it
  /// fixes how close to t = 0 the first panel has to reach.
  double log_moment_bound = 1.0;
};

/// P(X > x) for a (0,1]-valued X given t -> E[X^{it}].
///
/// Integrates Im(e^{-it ln x} M(t)) / t on dyadically growing panels, with
/// the first panel taken in ln t so that mass far below x is resolved. The
/// last panel [T, 2T] is weighted by a smooth taper, and doubling stops once
/// two consecutive doublings change the estimate by less than abs_tol / 10.
/// The result is clamped to [0, 1].
double gil_pelaez_invert(const std::function<ComplexValue(double)>& moment_fn, double x,
                         const QuadratureSpec& spec = {}, const GilPelaezOptions& opts = {});

}  // namespace platoon
