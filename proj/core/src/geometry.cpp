#include "platoon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "platoon/csv.hpp"
#include "platoon/numerics.hpp"

namespace platoon {

std::string to_string(Traffic t) { return t == Traffic::PTS ? "PTS" : "NPTS"; }

Traffic traffic_from_string(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "pts") return Traffic::PTS;
  if (lower == "npts" || lower == "n-pts") return Traffic::NPTS;
  throw std::invalid_argument("unknown traffic model '" + name + "' (expected PTS or NPTS)");
}

NetworkParams NetworkParams::platooned(double lambda_r, double lambda_p, double m, double a) {
  NetworkParams p{lambda_r, lambda_p, m, a, m * lambda_p};
  p.validate();
  return p;
}

NetworkParams NetworkParams::from_per_km(double lambda_r_km, double lambda_p_km, double m,
                                         double a) {
  return platooned(lambda_r_km * 1e-3, lambda_p_km * 1e-3, m, a);
}

void NetworkParams::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(std::isfinite(lambda_r) && lambda_r > 0.0, "NetworkParams: lambda_r must be > 0");
  require(std::isfinite(lambda_p) && lambda_p > 0.0, "NetworkParams: lambda_p must be > 0");
  require(std::isfinite(a) && a > 0.0, "NetworkParams: a must be > 0");
  require(std::isfinite(m) && m >= 0.0, "NetworkParams: m must be >= 0");
  require(std::isfinite(lambda) && lambda >= 0.0, "NetworkParams: lambda must be >= 0");
}

namespace {

void check_window(Interval w) {
  if (!(w.hi > w.lo)) throw std::invalid_argument("window must have hi > lo");
}

void append_uniform(std::vector<double>& out, std::size_t n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (std::size_t i = 0; i < n; ++i) out.push_back(u(rng));
}

std::size_t poisson_draw(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> d(mean);
  return static_cast<std::size_t>(d(rng));
}

// Adds the daughters of a cluster centred at c that fall inside the window.
std::size_t append_cluster(std::vector<double>& out, double c, const NetworkParams& p,
                           Interval window, Rng& rng) {
  const std::size_t n = poisson_draw(p.m, rng);
  std::uniform_real_distribution<double> u(c - p.a, c + p.a);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    if (window.contains(x)) out.push_back(x);
  }
  return n;
}

}  // namespace

PointPattern sample_ppp(double rate, Interval window, Rng& rng) {
  check_window(window);
  if (rate < 0.0) throw std::invalid_argument("sample_ppp: rate must be >= 0");
  PointPattern out{{}, window};
  const std::size_t n = poisson_draw(rate * window.length(), rng);
  out.positions.reserve(n);
  append_uniform(out.positions, n, window.lo, window.hi, rng);
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

PointPattern sample_ppp(double rate, Interval window, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ppp(rate, window, rng);
}

PointPattern sample_mcp(const NetworkParams& params, Interval window, Rng& rng) {
  check_window(window);
  params.validate();
  PointPattern out{{}, window};
  const Interval parents{window.lo - params.a, window.hi + params.a};
  const auto centres = sample_ppp(params.lambda_p, parents, rng);
  for (double c : centres.positions) append_cluster(out.positions, c, params, window, rng);
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

PointPattern sample_mcp(const NetworkParams& params, Interval window, std::uint64_t seed) {
  Rng rng(seed);
  return sample_mcp(params, window, rng);
}

PalmPattern sample_mcp_palm(const NetworkParams& params, Interval window, Rng& rng) {
  if (!window.contains(0.0)) throw std::invalid_argument("sample_mcp_palm: window must contain 0");
  PalmPattern out;
  out.pattern = sample_mcp(params, window, rng);
  std::uniform_real_distribution<double> centre(-params.a, params.a);
  out.cluster_center = centre(rng);
  auto& pos = out.pattern.positions;
  const std::size_t before = pos.size();
  out.cluster_size = append_cluster(pos, out.cluster_center, params, window, rng);
  // Keep the typical point distinguishable from a daughter that lands at 0.
  std::sort(pos.begin() + static_cast<std::ptrdiff_t>(before), pos.end());
  std::inplace_merge(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(before), pos.end());
  const auto at = std::upper_bound(pos.begin(), pos.end(), 0.0);
  out.typical_index = static_cast<std::size_t>(at - pos.begin());
  pos.insert(at, 0.0);
  return out;
}

PalmPattern sample_mcp_palm(const NetworkParams& params, Interval window, std::uint64_t seed) {
  Rng rng(seed);
  return sample_mcp_palm(params, window, rng);
}

std::vector<VoronoiCell1D> voronoi_1d(const PointPattern& pattern) {
  const auto& x = pattern.positions;
  if (x.empty()) throw std::invalid_argument("voronoi_1d: pattern is empty");
  std::vector<VoronoiCell1D> cells(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cells[i].center = x[i];
    cells[i].lo = i == 0 ? pattern.window.lo : 0.5 * (x[i - 1] + x[i]);
    cells[i].hi = i + 1 == x.size() ? pattern.window.hi : 0.5 * (x[i] + x[i + 1]);
  }
  return cells;
}

std::size_t nearest_point(const PointPattern& pattern, double x) {
  const auto& pos = pattern.positions;
  if (pos.empty()) throw std::invalid_argument("nearest_point: pattern is empty");
  const auto it = std::lower_bound(pos.begin(), pos.end(), x);
  if (it == pos.begin()) return 0;
  if (it == pos.end()) return pos.size() - 1;
  const auto hi = static_cast<std::size_t>(it - pos.begin());
  return (x - pos[hi - 1] <= pos[hi] - x) ? hi - 1 : hi;
}

double pdf_typical_cell(double ell, double lambda_r) {
  if (ell < 0.0) return 0.0;
  return 4.0 * lambda_r * lambda_r * ell * std::exp(-2.0 * lambda_r * ell);
}

double pdf_tagged_cell(double ell, double lambda_r) {
  if (ell < 0.0) return 0.0;
  return 4.0 * lambda_r * lambda_r * lambda_r * ell * ell * std::exp(-2.0 * lambda_r * ell);
}

double mgf_L(double t, double lambda_r) {
  if (t >= 2.0 * lambda_r) throw std::domain_error("mgf_L: t must be < 2 lambda_r");
  const double d = t - 2.0 * lambda_r;
  return 4.0 * lambda_r * lambda_r / (d * d);
}

double mgf_L0(double t, double lambda_r) {
  if (t >= 2.0 * lambda_r) throw std::domain_error("mgf_L0: t must be < 2 lambda_r");
  return 8.0 * std::pow(lambda_r, 3) / std::pow(2.0 * lambda_r - t, 3);
}

double pdf_serving_distance(double r, double lambda_r) {
  if (r < 0.0) return 0.0;
  return 2.0 * lambda_r * std::exp(-2.0 * lambda_r * r);
}

double cell_length_quantile(int shape, double lambda_r, double q) {
  if (shape < 1) throw std::invalid_argument("cell_length_quantile: shape must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("cell_length_quantile: q in (0,1)");
  double lo = 0.0;
  double hi = static_cast<double>(shape);
  while (gamma_q(shape, hi) > q) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gamma_q(shape, mid) > q ? lo : hi) = mid;
  }
  return hi / (2.0 * lambda_r);
}

void write_pattern_csv(std::ostream& os, const PointPattern& pattern) {
  CsvWriter w(os);
  w.meta("window_lo", format_exact(pattern.window.lo));
  w.meta("window_hi", format_exact(pattern.window.hi));
  w.header({"position"});
  for (double x : pattern.positions) w.row_text({format_exact(x)});
}

PointPattern read_pattern_csv(std::istream& is) {
  PointPattern out;
  bool have_lo = false;
  bool have_hi = false;
  bool seen_header = false;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const double v = std::stod(line.substr(eq + 1));
      if (key == "window_lo") out.window.lo = v, have_lo = true;
      if (key == "window_hi") out.window.hi = v, have_hi = true;
      continue;
    }
    if (!seen_header) {
      seen_header = true;
      if (line == "position") continue;
    }
    out.positions.push_back(std::stod(line));
  }
  if (!have_lo || !have_hi) throw std::runtime_error("pattern CSV: missing window bounds");
  if (!std::is_sorted(out.positions.begin(), out.positions.end()))
    throw std::runtime_error("pattern CSV: positions are not sorted");
  for (double x : out.positions)
    if (!out.window.contains(x)) throw std::runtime_error("pattern CSV: position outside window");
  return out;
}

}  // namespace platoon
