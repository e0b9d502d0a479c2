#include "platoon/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

namespace platoon {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// QUADPACK qk21 abscissae and weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525551103, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

// Maps the integration variable onto the user's range. For a semi-infinite
// range the integrand is evaluated at lo + s u / (1 - u) with jacobian
// s / (1 - u)^2, u in [0, 1).
struct RangeMap {
  double lo;
  double hi;
  double scale;
  bool semi_infinite;

  RangeMap(double lo_, double hi_, double scale_)
      : lo(lo_), hi(hi_), scale(scale_), semi_infinite(std::isinf(hi_)) {}

  double u_lo() const { return semi_infinite ? 0.0 : lo; }
  double u_hi() const { return semi_infinite ? 1.0 : hi; }

  // Returns (x, jacobian).
  std::pair<double, double> operator()(double u) const {
    if (!semi_infinite) return {u, 1.0};
    const double w = 1.0 - u;
    return {lo + scale * u / w, scale / (w * w)};
  }
};

template <typename T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <typename T>
struct Segment {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One 21-point Kronrod panel on [a, b] for scalar or complex integrands.
template <typename T, typename F>
Segment<T> gk21(const F& f, const RangeMap& map, double a, double b, int& evals) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto eval = [&](double u) -> T {
    const auto [x, jac] = map(u);
    ++evals;
    return f(x) * jac;
  };
  const T fc = eval(centre);
  T resk = fc * kWgk[10];
  T resg = T{};
  double resabs = magnitude(resk);
  std::array<T, 10> f1{};
  std::array<T, 10> f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = eval(centre - dx);
    f2[j] = eval(centre + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (magnitude(f1[j]) + magnitude(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const T mean = resk * 0.5;
  double resasc = kWgk[10] * magnitude(fc - mean);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (magnitude(f1[j] - mean) + magnitude(f2[j] - mean));
  resk *= half;
  resg *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = magnitude(resk - resg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
    err = std::max(50.0 * kEps * resabs, err);
  return {a, b, resk, err};
}

template <typename T, typename F>
std::pair<T, QuadratureResult> adaptive(const F& f, double lo, double hi,
                                        const QuadratureSpec& spec) {
  spec.validate();
  QuadratureResult out;
  if (lo == hi) {
    out.converged = true;
    return {T{}, out};
  }
  const RangeMap map(lo, hi, spec.semi_infinite_scale);
  int evals = 0;
  std::priority_queue<Segment<T>> heap;
  T frozen{};
  double frozen_err = 0.0;

  // Semi-infinite ranges start from a few panels so that the bulk near the
  // scale length is resolved before the tail.
  std::vector<double> cuts = {map.u_lo(), map.u_hi()};
  if (map.semi_infinite) cuts = {0.0, 0.5, 0.8, 0.95, 1.0};
  T total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto seg = gk21<T>(f, map, cuts[i], cuts[i + 1], evals);
    total += seg.value;
    total_err += seg.error;
    heap.push(seg);
  }
  int subdivisions = static_cast<int>(heap.size());
  auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * magnitude(total)); };

  while (total_err > tolerance() && !heap.empty() && subdivisions < spec.max_subdivisions) {
    Segment<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double width = worst.b - worst.a;
    if (width <= 100.0 * kEps * std::max({std::abs(worst.a), std::abs(worst.b), 1e-300})) {
      frozen += worst.value;
      frozen_err += worst.error;
      continue;
    }
    auto left = gk21<T>(f, map, worst.a, mid, evals);
    auto right = gk21<T>(f, map, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum to remove drift from the incremental updates.
  T sum = frozen;
  double err = frozen_err;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.abs_error = err;
  out.evaluations = evals;
  out.converged = err <= std::max(spec.abs_tol, spec.rel_tol * magnitude(sum)) ||
                  err <= 50.0 * kEps * magnitude(sum);
  return {sum, out};
}

// Reciprocal gamma, zero at the poles.
double rgamma(double x) {
  if (x <= 0.0 && std::floor(x) == x) return 0.0;
  return 1.0 / std::tgamma(x);
}

double hyp2f1_series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 200000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
    if (term == 0.0) return sum;
  }
  throw NumericalError("hyp2f1_real: series did not converge", sum);
}

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

// Lentz continued fraction for Q(a, x) * Gamma(a) * e^x x^-a, valid for x > a + 1.
double gamma_q_cf_scaled(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw NumericalError("incomplete gamma: continued fraction did not converge");
}

// Series for P(a, x) * Gamma(a) * e^x x^-a, valid for x < a + 1.
double gamma_p_series_scaled(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) return sum;
  }
  throw NumericalError("incomplete gamma: series did not converge");
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma: a must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be >= 0");
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("QuadratureSpec: tolerances must be > 0");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
  if (!(semi_infinite_scale > 0.0))
    throw std::invalid_argument("QuadratureSpec: semi_infinite_scale must be > 0");
}

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  const double log_pref = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) return std::min(1.0, gamma_p_series_scaled(a, x) * std::exp(log_pref));
  return std::max(0.0, 1.0 - gamma_q_cf_scaled(a, x) * std::exp(log_pref));
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  const double log_pref = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) return std::max(0.0, 1.0 - gamma_p_series_scaled(a, x) * std::exp(log_pref));
  return std::min(1.0, gamma_q_cf_scaled(a, x) * std::exp(log_pref));
}

double gamma_upper(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return std::tgamma(a);
  if (x < a + 1.0) return std::tgamma(a) * gamma_q(a, x);
  return gamma_q_cf_scaled(a, x) * std::exp(-x + a * std::log(x));
}

double gamma_lower(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series_scaled(a, x) * std::exp(-x + a * std::log(x));
  return std::tgamma(a) * gamma_p(a, x);
}

double hyp2f1_real(double a, double b, double c, double z) {
  if (c <= 0.0 && near_integer(c))
    throw std::domain_error("hyp2f1_real: c must not be a non-positive integer");
  if (z > 0.0) throw std::domain_error("hyp2f1_real: only z <= 0 is supported");
  if (z == 0.0) return 1.0;
  if (z >= -0.5) return hyp2f1_series(a, b, c, z);
  if (z >= -2.0 || near_integer(a - b)) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^-a 2F1(a, c-b; c; z/(z-1)).
    const double w = z / (z - 1.0);
    return std::pow(1.0 - z, -a) * hyp2f1_series(a, c - b, c, w);
  }
  // Connection formula around z = infinity; |1/z| < 1/2 here.
  const double mz = -z;
  const double iz = 1.0 / z;
  const double t1 = std::tgamma(c) * std::tgamma(b - a) * rgamma(b) * rgamma(c - a) *
                    std::pow(mz, -a) * hyp2f1_series(a, a - c + 1.0, a - b + 1.0, iz);
  const double t2 = std::tgamma(c) * std::tgamma(a - b) * rgamma(a) * rgamma(c - b) *
                    std::pow(mz, -b) * hyp2f1_series(b, b - c + 1.0, b - a + 1.0, iz);
  return t1 + t2;
}

double intersection_length(double r, double a, double x) {
  const double d = std::abs(x);
  if (d < std::abs(r - a)) return 2.0 * std::min(r, a);
  if (d <= r + a) return r + a - d;
  return 0.0;
}

double func_F(double m, int k, double a) {
  if (!(m > 0.0)) throw std::domain_error("func_F: m must be > 0");
  if (k < 0) throw std::domain_error("func_F: k must be >= 0");
  return std::exp(std::lgamma(k + 1.0) - (k + 1.0) * std::log(m)) * gamma_p(k + 1.0, 2.0 * m * a);
}

double func_G(double m, int k, double a) {
  if (!(m > 0.0)) throw std::domain_error("func_G: m must be > 0");
  if (k < 0) throw std::domain_error("func_G: k must be >= 0");
  return gamma_upper(k + 1.0, 2.0 * m * a) / std::pow(m, k + 1.0);
}

double ramp(double x, double a) { return x > a ? x - a : 0.0; }

double unit_step(double x) { return x >= 0.0 ? 1.0 : 0.0; }

double poisson_pmf(int k, double mu) {
  if (k < 0) return 0.0;
  if (mu <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
}

std::vector<double> poisson_tail_table(double mu, int n_max) {
  if (n_max < 0) throw std::domain_error("poisson_tail_table: n_max must be >= 0");
  std::vector<double> upper(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (mu <= 0.0) {
    upper[0] = 1.0;
    return upper;
  }
  const int far = std::max(n_max, static_cast<int>(mu + 40.0 * std::sqrt(mu) + 60.0));
  double suffix = 0.0;
  for (int k = far; k >= 0; --k) {
    suffix += poisson_pmf(k, mu);
    if (k <= n_max) upper[static_cast<std::size_t>(k)] = suffix;
  }
  return upper;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo,
                                    double hi, const QuadratureSpec& spec) {
  auto [value, result] = adaptive<double>(f, lo, hi, spec);
  result.value = value;
  return result;
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec) {
  const auto r = integrate_adaptive(f, lo, hi, spec);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "integrate: tolerance not met on [" << lo << ", " << hi
        << "], estimated error " << r.abs_error;
    throw NumericalError(msg.str(), r.value);
  }
  return r.value;
}

ComplexValue integrate_complex(const std::function<ComplexValue(double)>& f, double lo,
                               double hi, const QuadratureSpec& spec) {
  auto [value, result] = adaptive<ComplexValue>(f, lo, hi, spec);
  if (!result.converged) {
    std::ostringstream msg;
    msg << "integrate_complex: tolerance not met on [" << lo << ", " << hi
        << "], estimated error " << result.abs_error;
    throw NumericalError(msg.str(), std::abs(value));
  }
  return value;
}

namespace {

struct VecSegment {
  double a;
  double b;
  std::vector<double> value;
  double error;
};

struct VecSegmentLess {
  bool operator()(const VecSegment& l, const VecSegment& r) const { return l.error < r.error; }
};

VecSegment gk21_vec(const VectorIntegrand& f, std::size_t dim, const RangeMap& map, double a,
                    double b, int& evals, std::vector<std::vector<double>>& scratch) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  scratch.resize(21);
  for (auto& s : scratch) s.assign(dim, 0.0);
  auto eval = [&](double u, std::vector<double>& out) {
    const auto [x, jac] = map(u);
    ++evals;
    f(x, std::span<double>(out));
    for (auto& v : out) v *= jac;
  };
  eval(centre, scratch[20]);
  for (int j = 0; j < 10; ++j) {
    eval(centre - half * kXgk[j], scratch[2 * j]);
    eval(centre + half * kXgk[j], scratch[2 * j + 1]);
  }
  VecSegment seg{a, b, std::vector<double>(dim, 0.0), 0.0};
  for (std::size_t d = 0; d < dim; ++d) {
    double resk = kWgk[10] * scratch[20][d];
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (int j = 0; j < 10; ++j) {
      const double s = scratch[2 * j][d] + scratch[2 * j + 1][d];
      resk += kWgk[j] * s;
      resabs += kWgk[j] * (std::abs(scratch[2 * j][d]) + std::abs(scratch[2 * j + 1][d]));
      if (j % 2 == 1) resg += kWg[j / 2] * s;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(scratch[20][d] - mean);
    for (int j = 0; j < 10; ++j)
      resasc += kWgk[j] * (std::abs(scratch[2 * j][d] - mean) +
                           std::abs(scratch[2 * j + 1][d] - mean));
    resk *= half;
    resg *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0)
      err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
      err = std::max(50.0 * kEps * resabs, err);
    seg.value[d] = resk;
    seg.error = std::max(seg.error, err);
  }
  return seg;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

VectorQuadratureResult integrate_adaptive_vec(const VectorIntegrand& f, std::size_t dim,
                                              double lo, double hi,
                                              const QuadratureSpec& spec) {
  spec.validate();
  VectorQuadratureResult out;
  out.value.assign(dim, 0.0);
  if (lo == hi || dim == 0) {
    out.converged = true;
    return out;
  }
  const RangeMap map(lo, hi, spec.semi_infinite_scale);
  int evals = 0;
  std::vector<std::vector<double>> scratch;
  std::priority_queue<VecSegment, std::vector<VecSegment>, VecSegmentLess> heap;
  std::vector<double> frozen(dim, 0.0);
  double frozen_err = 0.0;

  std::vector<double> cuts = {map.u_lo(), map.u_hi()};
  if (map.semi_infinite) cuts = {0.0, 0.5, 0.8, 0.95, 1.0};
  std::vector<double> total(dim, 0.0);
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto seg = gk21_vec(f, dim, map, cuts[i], cuts[i + 1], evals, scratch);
    for (std::size_t d = 0; d < dim; ++d) total[d] += seg.value[d];
    total_err += seg.error;
    heap.push(std::move(seg));
  }
  int subdivisions = static_cast<int>(heap.size());
  auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * max_abs(total)); };
  while (total_err > tolerance() && !heap.empty() && subdivisions < spec.max_subdivisions) {
    VecSegment worst = heap.top();
    heap.pop();
    const double width = worst.b - worst.a;
    if (width <= 100.0 * kEps * std::max({std::abs(worst.a), std::abs(worst.b), 1e-300})) {
      for (std::size_t d = 0; d < dim; ++d) frozen[d] += worst.value[d];
      frozen_err += worst.error;
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = gk21_vec(f, dim, map, worst.a, mid, evals, scratch);
    auto right = gk21_vec(f, dim, map, mid, worst.b, evals, scratch);
    for (std::size_t d = 0; d < dim; ++d)
      total[d] += left.value[d] + right.value[d] - worst.value[d];
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++subdivisions;
  }
  out.value = frozen;
  double err = frozen_err;
  while (!heap.empty()) {
    const auto& top = heap.top();
    for (std::size_t d = 0; d < dim; ++d) out.value[d] += top.value[d];
    err += top.error;
    heap.pop();
  }
  out.abs_error = err;
  out.evaluations = evals;
  out.converged = err <= std::max(spec.abs_tol, spec.rel_tol * max_abs(out.value)) ||
                  err <= 50.0 * kEps * max_abs(out.value);
  return out;
}

namespace {

// C-infinity step from 1 at u <= 0 to 0 at u >= 1.
double smooth_taper(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return b / (a + b);
}

}  // namespace

double gil_pelaez_invert(const std::function<ComplexValue(double)>& moment_fn, double x,
                         const QuadratureSpec& spec, const GilPelaezOptions& opts) {
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("gil_pelaez_invert: x must lie in (0, 1)");
  spec.validate();
  const double log_x = std::log(x);
  auto integrand = [&](double t) {
    const ComplexValue rotated = std::polar(1.0, -t * log_x) * moment_fn(t);
    return rotated.imag() / t;
  };
  auto to_prob = [](double integral) {
    return std::clamp(0.5 + integral / std::numbers::pi, 0.0, 1.0);
  };

  QuadratureSpec panel_spec = spec;
  panel_spec.abs_tol = spec.abs_tol / 4.0;
  auto fail = [&](const std::string& why, double estimate) {
    throw NumericalError("gil_pelaez_invert: " + why, to_prob(estimate));
  };

  // The running estimate integrates [0, T] exactly and the panel [T, 2T]
  // against a smooth taper. The taper acts as a smoothing kernel with
  // vanishing moments, so the estimate converges much faster in T than the
  // hard-truncated integral whose envelope decays only algebraically.
  // |integrand| <= E|ln X - ln x|, so [0, t_min] contributes at most
  // t_min * bound; it is approximated by t_min * integrand(t_min).
  const double bound = std::max(opts.log_moment_bound, 1.0);
  const double t_min = std::min(1e-8 * opts.first_panel, 0.01 * spec.abs_tol / bound);
  auto head_fn = [&](double u) {
    const double t = std::exp(u);
    return integrand(t) * t;
  };
  const auto head = integrate_adaptive(head_fn, std::log(t_min), std::log(opts.first_panel), panel_spec);
  if (!head.converged && head.abs_error > spec.abs_tol) fail("first panel did not converge", head.value);
  double exact = head.value + t_min * integrand(t_min);
  double previous = std::numeric_limits<double>::quiet_NaN();
  int quiet_panels = 0;
  for (double lo = opts.first_panel;; lo *= 2.0) {
    const double hi = 2.0 * lo;
    auto f = [&](double t, std::span<double> out) {
      const double v = integrand(t);
      out[0] = v;
      out[1] = v * smooth_taper((t - lo) / (hi - lo));
    };
    const auto r = integrate_adaptive_vec(f, 2, lo, hi, panel_spec);
    if (!r.converged && r.abs_error > spec.abs_tol) {
      std::ostringstream msg;
      msg << "panel [" << lo << ", " << hi << "] did not converge (error " << r.abs_error << ")";
      fail(msg.str(), exact + r.value[1]);
    }
    const double estimate = exact + r.value[1];
    quiet_panels = std::abs(estimate - previous) < spec.abs_tol / 10.0 ? quiet_panels + 1 : 0;
    if (quiet_panels >= 2) return to_prob(estimate);
    if (hi >= opts.max_truncation) fail("envelope did not decay before max truncation", estimate);
    previous = estimate;
    exact += r.value[0];
  }
}

}  // namespace platoon
