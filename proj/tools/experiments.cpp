#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "platoon/csv.hpp"

namespace platoon::tools {

using nlohmann::json;

namespace {

constexpr double kPerKm = 1e-3;

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) {
      std::string list;
      for (const char* k : keys) list += std::string(list.empty() ? "" : ", ") + k;
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where +
                                  " (expected one of: " + list + ")");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void read_per_km(const json& obj, const char* key, double& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<double>() * kPerKm;
}

void read_quad(const json& obj, const char* prefix, QuadratureSpec& q) {
  const std::string p(prefix);
  read(obj, (p + "abs_tol").c_str(), q.abs_tol);
  read(obj, (p + "rel_tol").c_str(), q.rel_tol);
  read(obj, (p + "max_subdivisions").c_str(), q.max_subdivisions);
}

std::string dump(const json& j) { return j.dump(); }

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

CsvWriter open_csv(std::ostream& out, const std::string& what, const ExperimentConfig& cfg) {
  CsvWriter csv(out);
  csv.meta("output", what);
  csv.meta("config", dump(to_json(cfg)));
  return csv;
}

void write_pmf(CsvWriter& csv, const DiscretePMF& pmf) {
  csv.meta("tail_mass", format_number(pmf.tail_mass));
  csv.header({"k", "mass"});
  for (int k = 0; k <= pmf.max_index(); ++k) csv.row({static_cast<double>(k), pmf[k]});
}

void write_moments(CsvWriter& csv, const LoadMoments& m) {
  csv.header({"mean", "variance", "third_moment", "skewness"});
  csv.row({m.mean, m.variance, m.third_moment, m.skewness});
}

void write_scalar(CsvWriter& csv, double v) {
  csv.header({"value"});
  csv.row({v});
}

const char* tname(Traffic t) { return t == Traffic::PTS ? "PTS" : "NPTS"; }

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

void figure2(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 2: load PMFs on the typical and tagged RSU", cfg);
  const std::vector<std::pair<LoadKind, Traffic>> series{{LoadKind::Typical, Traffic::PTS},
                                                         {LoadKind::Typical, Traffic::NPTS},
                                                         {LoadKind::Tagged, Traffic::PTS},
                                                         {LoadKind::Tagged, Traffic::NPTS}};
  std::vector<DiscretePMF> pmfs, sims;
  std::vector<std::string> cols{"k"};
  for (auto [kind, tr] : series) {
    pmfs.push_back(load_pmf(kind, tr, cfg.net, cfg.pmf));
    cols.push_back("pmf_" + std::string(kind == LoadKind::Typical ? "typ_" : "tag_") + tname(tr));
  }
  if (cfg.sim.replications > 0) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      sims.push_back(sim_load(series[i].first, series[i].second, cfg.net, cfg.sim).pmf);
      csv.meta("tv_" + cols[i + 1].substr(4), format_number(tv_distance(pmfs[i], sims[i])));
      cols.push_back("mc_" + cols[i + 1]);
    }
  }
  csv.header(cols);
  for (int k = 0; k <= cfg.k_max; ++k) {
    std::vector<double> row{static_cast<double>(k)};
    for (const auto& p : pmfs) row.push_back(p[k]);
    for (const auto& p : sims) row.push_back(p[k]);
    csv.row(row);
  }
}

void figure_moments(LoadKind kind, const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out,
                      kind == LoadKind::Typical ? "figure 3: typical-cell load moments"
                                                : "figure 4: tagged-cell load moments",
                      cfg);
  std::vector<std::string> cols{"a", "u"};
  const bool mc = cfg.sim.replications > 0;
  for (const char* src : {"", "mc_"})
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS})
      for (const char* q : {"mean_", "var_", "skew_"}) {
        if (*src && !mc) continue;
        cols.push_back(std::string(src) + q + tname(tr));
      }
  csv.header(cols);
  for (double a : cfg.a_grid) {
    NetworkParams base = cfg.net;
    base.a = a;
    for (double u : cfg.u_grid) {
      const NetworkParams p = at_u(base, u);
      std::vector<double> row{a, u};
      for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
        const auto m = load_moments(kind, tr, p);
        row.insert(row.end(), {m.mean, m.variance, m.skewness});
      }
      if (mc) {
        for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
          const auto s = sim_load(kind, tr, p, cfg.sim);
          row.insert(row.end(), {s.mean.value, s.variance, s.skewness});
        }
      }
      csv.row(row);
    }
  }
}

void figure5(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 5: off probability of the typical RSU", cfg);
  csv.header({"u", "p_off_PTS", "p_off_NPTS"});
  for (double u : cfg.u_grid) {
    const NetworkParams p = at_u(cfg.net, u);
    csv.row({u, 1.0 - active_prob(Traffic::PTS, p), 1.0 - active_prob(Traffic::NPTS, p)});
  }
}

void figure6(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 6: below-average and single-user probabilities", cfg);
  csv.comment("P1_alone = p(0) of the tagged load (typical VU alone); P1_one_other = p(1)");
  csv.header({"u", "p_b_PTS", "p_b_NPTS", "P1_alone_PTS", "P1_alone_NPTS", "P1_one_other_PTS",
              "P1_one_other_NPTS", "P_b_tagged_PTS", "P_b_tagged_NPTS"});
  for (double u : cfg.u_grid) {
    const NetworkParams p = at_u(cfg.net, u);
    OperationalMetrics typ[2], tag[2];
    for (int i = 0; i < 2; ++i) {
      const Traffic tr = i == 0 ? Traffic::PTS : Traffic::NPTS;
      typ[i] = operational_metrics(load_pmf(LoadKind::Typical, tr, p, cfg.pmf), LoadKind::Typical);
      tag[i] = operational_metrics(load_pmf(LoadKind::Tagged, tr, p, cfg.pmf), LoadKind::Tagged);
    }
    csv.row({u, typ[0].p_b, typ[1].p_b, tag[0].P1_alone, tag[1].P1_alone, tag[0].P1_one_other,
             tag[1].P1_one_other, tag[0].P_b, tag[1].P_b});
  }
}

void figure7(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 7: connectivity degree exceedance P[N > k]", cfg);
  const bool mc = cfg.sim.replications > 0;
  std::vector<std::string> cols{"k"};
  std::vector<DiscretePMF> pmfs;
  for (double rb : cfg.Rb_grid) {
    V2VParams v2v{rb, cfg.net};
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      pmfs.push_back(pmf_degree(tr, v2v, cfg.pmf));
      std::ostringstream name;
      name << "ps_" << tname(tr) << "_Rb" << format_number(rb);
      cols.push_back(name.str());
    }
  }
  if (mc) {
    const std::size_t n = cols.size();
    for (std::size_t i = 1; i < n; ++i) cols.push_back("mc_" + cols[i]);
    for (double rb : cfg.Rb_grid) {
      V2VParams v2v{rb, cfg.net};
      for (Traffic tr : {Traffic::PTS, Traffic::NPTS})
        pmfs.push_back(sim_connectivity(tr, v2v, cfg.sim).pmf);
    }
  }
  csv.header(cols);
  for (int k = 0; k <= cfg.k_max; ++k) {
    std::vector<double> row{static_cast<double>(k)};
    for (const auto& p : pmfs) row.push_back(prob_degree_exceeds(k, p));
    csv.row(row);
  }
}

void figure8(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 8: coverage, active probability and meta distribution", cfg);
  const bool mc = cfg.sim.replications > 0;
  std::vector<std::string> cols{"u",          "CP_PTS", "CP_NPTS", "active_PTS",
                                "active_NPTS", "MD_PTS", "MD_NPTS"};
  if (mc) {
    for (const char* q : {"CP", "MD", "active"})
      for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
        cols.push_back(std::string("mc_") + q + "_" + tname(tr));
        cols.push_back(std::string("mc_") + q + "_" + tname(tr) + "_se");
      }
  }
  csv.header(cols);
  for (double u : cfg.u_grid) {
    const NetworkParams p = at_u(cfg.net, u);
    std::vector<double> row{u};
    double act[2];
    for (int i = 0; i < 2; ++i) act[i] = active_prob(i == 0 ? Traffic::PTS : Traffic::NPTS, p);
    for (int i = 0; i < 2; ++i)
      row.push_back(coverage_prob_with_activity(cfg.tau, act[i], p.lambda_r, cfg.radio, cfg.cov));
    row.insert(row.end(), {act[0], act[1]});
    for (int i = 0; i < 2; ++i)
      row.push_back(md_coverage_with_activity(cfg.tau, cfg.x, act[i], p.lambda_r, cfg.radio, cfg.cov));
    if (mc) {
      CoverageSimResult r[2];
      for (int i = 0; i < 2; ++i)
        r[i] = sim_coverage_study(cfg.tau, cfg.x, i == 0 ? Traffic::PTS : Traffic::NPTS, p,
                                  cfg.radio, cfg.sim);
      for (int i = 0; i < 2; ++i) row.insert(row.end(), {r[i].coverage.value, r[i].coverage.std_error});
      for (int i = 0; i < 2; ++i) row.insert(row.end(), {r[i].meta.value, r[i].meta.std_error});
      for (int i = 0; i < 2; ++i)
        row.insert(row.end(), {r[i].active_fraction.value, r[i].active_fraction.std_error});
    }
    csv.row(row);
  }
}

void figure9(const ExperimentConfig& cfg, std::ostream& out) {
  auto csv = open_csv(out, "figure 9: rate coverage and its meta distribution", cfg);
  csv.comment("tau_rate is in bit/s; residual columns bound the truncated part of each series");
  const bool mc = cfg.sim.replications > 0;
  std::vector<std::string> cols{"u",          "RC_PTS",          "RC_NPTS",
                                "MDR_PTS",    "MDR_NPTS",        "RC_residual_PTS",
                                "RC_residual_NPTS", "MDR_residual_PTS", "MDR_residual_NPTS"};
  if (mc)
    for (const char* q : {"RC", "MDR"})
      for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
        cols.push_back(std::string("mc_") + q + "_" + tname(tr));
        cols.push_back(std::string("mc_") + q + "_" + tname(tr) + "_se");
      }
  csv.header(cols);
  for (double u : cfg.u_grid) {
    const NetworkParams p = at_u(cfg.net, u);
    SeriesResult rc[2], md[2];
    for (int i = 0; i < 2; ++i) {
      const Traffic tr = i == 0 ? Traffic::PTS : Traffic::NPTS;
      const auto load = load_pmf(LoadKind::Tagged, tr, p, cfg.pmf);
      const double act = active_prob(tr, p);
      rc[i] = rate_coverage_with_load(cfg.tau_rate, load, act, p.lambda_r, cfg.radio, cfg.cov);
      md[i] = md_rate_with_load(cfg.tau_rate, cfg.x, load, act, p.lambda_r, cfg.radio, cfg.cov);
    }
    std::vector<double> row{u,
                            rc[0].value,
                            rc[1].value,
                            md[0].value,
                            md[1].value,
                            rc[0].residual_bound,
                            rc[1].residual_bound,
                            md[0].residual_bound,
                            md[1].residual_bound};
    if (mc) {
      CoverageSimResult r[2];
      for (int i = 0; i < 2; ++i)
        r[i] = sim_rate_study(cfg.tau_rate, cfg.x, i == 0 ? Traffic::PTS : Traffic::NPTS, p,
                              cfg.radio, cfg.sim);
      for (int i = 0; i < 2; ++i) row.insert(row.end(), {r[i].coverage.value, r[i].coverage.std_error});
      for (int i = 0; i < 2; ++i) row.insert(row.end(), {r[i].meta.value, r[i].meta.std_error});
    }
    csv.row(row);
  }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

class Args {
 public:
  Args(const std::string& op, const std::map<std::string, std::string>& raw) : op_(op), raw_(raw) {}

  const std::string& text(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end())
      throw std::invalid_argument("op " + op_ + ": missing argument '" + key + "' (pass --arg " +
                                  key + "=VALUE)");
    return it->second;
  }
  double num(const std::string& key) const {
    const std::string& s = text(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size())
      throw std::invalid_argument("op " + op_ + ": argument '" + key + "' must be a number, got '" +
                                  s + "'");
    return v;
  }
  int integer(const std::string& key) const {
    const double v = num(key);
    if (v != std::floor(v))
      throw std::invalid_argument("op " + op_ + ": argument '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  Traffic traffic() const { return traffic_from_string(text("traffic")); }
  LoadKind kind() const { return load_kind_from_string(text("kind")); }

 private:
  std::string op_;
  const std::map<std::string, std::string>& raw_;
};

struct Op {
  std::string usage;
  std::function<void(const ExperimentConfig&, const Args&, CsvWriter&)> run;
};

const std::map<std::string, Op>& operations() {
  static const std::map<std::string, Op> table = [] {
    std::map<std::string, Op> t;
    auto scalar = [&t](const std::string& name, const std::string& usage,
                       std::function<double(const ExperimentConfig&, const Args&)> f) {
      t[name] = {usage, [f](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
                   write_scalar(csv, f(c, a));
                 }};
    };
    auto pmf_op = [&t](const std::string& name, const std::string& usage,
                       std::function<DiscretePMF(const ExperimentConfig&, const Args&)> f) {
      t[name] = {usage, [f](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
                   write_pmf(csv, f(c, a));
                 }};
    };
    auto moments_op = [&t](const std::string& name, const std::string& usage,
                           std::function<LoadMoments(const NetworkParams&)> f) {
      t[name] = {usage, [f](const ExperimentConfig& c, const Args&, CsvWriter& csv) {
                   write_moments(csv, f(c.net));
                 }};
    };

    // Special functions.
    scalar("gamma_upper", "upper incomplete gamma (args: a, x)",
           [](const ExperimentConfig&, const Args& a) { return gamma_upper(a.num("a"), a.num("x")); });
    scalar("hyp2f1", "Gauss hypergeometric 2F1 for z <= 0 (args: a, b, c, z)",
           [](const ExperimentConfig&, const Args& a) {
             return hyp2f1_real(a.num("a"), a.num("b"), a.num("c"), a.num("z"));
           });
    scalar("intersection_length", "overlap of b(0, r) and b(x, a) (args: r, a, x)",
           [](const ExperimentConfig&, const Args& a) {
             return intersection_length(a.num("r"), a.num("a"), a.num("x"));
           });
    scalar("func_F", "integral of x^k e^{-mx} on [0, 2a] (args: m, k, a)",
           [](const ExperimentConfig&, const Args& a) {
             return func_F(a.num("m"), a.integer("k"), a.num("a"));
           });
    scalar("func_G", "integral of x^k e^{-mx} on [2a, inf) (args: m, k, a)",
           [](const ExperimentConfig&, const Args& a) {
             return func_G(a.num("m"), a.integer("k"), a.num("a"));
           });

    // Cell laws.
    scalar("pdf_typical_cell", "typical cell length density (args: l)",
           [](const ExperimentConfig& c, const Args& a) { return pdf_typical_cell(a.num("l"), c.net.lambda_r); });
    scalar("pdf_tagged_cell", "tagged cell length density (args: l)",
           [](const ExperimentConfig& c, const Args& a) { return pdf_tagged_cell(a.num("l"), c.net.lambda_r); });
    scalar("mgf_L", "MGF of the typical cell length (args: t, per metre)",
           [](const ExperimentConfig& c, const Args& a) { return mgf_L(a.num("t"), c.net.lambda_r); });
    scalar("mgf_L0", "MGF of the tagged cell length (args: t, per metre)",
           [](const ExperimentConfig& c, const Args& a) { return mgf_L0(a.num("t"), c.net.lambda_r); });
    scalar("pdf_serving_distance", "serving RSU distance density (args: r)",
           [](const ExperimentConfig& c, const Args& a) {
             return pdf_serving_distance(a.num("r"), c.net.lambda_r);
           });

    // Cluster counts.
    scalar("g_of", "log PGF of the cluster count in b(o, r) (args: s, r)",
           [](const ExperimentConfig& c, const Args& a) { return g_of(a.num("s"), a.num("r"), c.net); });
    scalar("g_deriv_at_zero", "i-th derivative of g at s = 0 (args: i, r)",
           [](const ExperimentConfig& c, const Args& a) {
             return g_deriv_at_zero(a.integer("i"), a.num("r"), c.net);
           });
    scalar("kappa", "k-th factorial cumulant of the cluster count (args: r, k)",
           [](const ExperimentConfig& c, const Args& a) { return kappa(a.num("r"), a.integer("k"), c.net); });
    scalar("pgf_S", "PGF of the cluster count in b(o, r) (args: s, r)",
           [](const ExperimentConfig& c, const Args& a) { return pgf_S(a.num("s"), a.num("r"), c.net); });
    pmf_op("pmf_S", "PMF of the cluster count in b(o, r) (args: r)",
           [](const ExperimentConfig& c, const Args& a) {
             return pmf_S_auto(a.num("r"), c.net, c.pmf.tail_bound);
           });
    scalar("I_moment", "typical-cell kappa moment I(n, k) (args: n, k)",
           [](const ExperimentConfig& c, const Args& a) {
             return I_moment(a.integer("n"), a.integer("k"), c.net);
           });
    scalar("I_tilde_moment", "tagged-cell kappa moment (args: n, k)",
           [](const ExperimentConfig& c, const Args& a) {
             return I_tilde_moment(a.integer("n"), a.integer("k"), c.net);
           });

    // Loads.
    pmf_op("pmf_typical_pts", "typical RSU load PMF, platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_typical_pts(c.net, c.pmf); });
    pmf_op("pmf_typical_npts", "typical RSU load PMF, non-platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_typical_npts(c.net, c.pmf); });
    pmf_op("pmf_tagged_pts", "tagged RSU load PMF (other VUs), platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_tagged_pts(c.net, c.pmf); });
    pmf_op("pmf_tagged_npts", "tagged RSU load PMF (other VUs), non-platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_tagged_npts(c.net, c.pmf); });
    moments_op("moments_typical_pts", "typical load moments, platooned", moments_typical_pts);
    moments_op("moments_typical_npts", "typical load moments, non-platooned", moments_typical_npts);
    moments_op("moments_tagged_pts", "tagged load moments, platooned", moments_tagged_pts);
    moments_op("moments_tagged_npts", "tagged load moments, non-platooned", moments_tagged_npts);
    scalar("pgf_vm", "PGF of own-platoon members in a tagged cell of length t (args: s, t)",
           [](const ExperimentConfig& c, const Args& a) { return pgf_vm(a.num("s"), a.num("t"), c.net); });
    pmf_op("pmf_vm", "PMF of own-platoon members in a tagged cell of length t (args: t)",
           [](const ExperimentConfig& c, const Args& a) {
             const double t = a.num("t");
             const int K = static_cast<int>(std::ceil(c.net.m + 12.0 * std::sqrt(c.net.m + 1.0) + 10.0));
             return pmf_vm(K, t, c.net);
           });
    t["moments_vm_conditional"] = {
        "mean and variance of own-platoon members given cell length t (args: t)",
        [](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
          const auto m = moments_vm_conditional(a.num("t"), c.net);
          csv.header({"mean", "variance"});
          csv.row({m.mean, m.variance});
        }};
    t["moments_vm"] = {"mean and variance of own-platoon members in the tagged cell",
                       [](const ExperimentConfig& c, const Args&, CsvWriter& csv) {
                         const auto m = moments_vm(c.net);
                         csv.header({"mean", "variance"});
                         csv.row({m.mean, m.variance});
                       }};
    t["operational_metrics"] = {
        "off / below-average / single-user probabilities (args: kind, traffic)",
        [](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
          const LoadKind kind = a.kind();
          const auto m = operational_metrics(load_pmf(kind, a.traffic(), c.net, c.pmf), kind);
          for (const auto& w : m.warnings) csv.comment("warning: " + w);
          if (kind == LoadKind::Typical) {
            csv.header({"p_off", "s_avg", "k_avg", "p_b"});
            csv.row({m.p_off, m.s_avg, static_cast<double>(m.k_avg), m.p_b});
          } else {
            csv.header({"P1_alone", "P1_one_other", "m_avg", "P_b"});
            csv.row({m.P1_alone, m.P1_one_other, static_cast<double>(m.m_avg), m.P_b});
          }
        }};

    // Connectivity.
    pmf_op("pmf_degree_pts", "connectivity degree PMF within R_b, platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_degree_pts({c.R_b, c.net}, c.pmf); });
    pmf_op("pmf_degree_npts", "connectivity degree PMF within R_b, non-platooned",
           [](const ExperimentConfig& c, const Args&) { return pmf_degree_npts({c.R_b, c.net}, c.pmf); });
    scalar("prob_degree_exceeds", "P[N > k] for the connectivity degree (args: k, traffic)",
           [](const ExperimentConfig& c, const Args& a) {
             return prob_degree_exceeds(a.integer("k"), pmf_degree(a.traffic(), {c.R_b, c.net}, c.pmf));
           });

    // Downlink.
    scalar("active_prob", "probability that an RSU serves at least one VU (args: traffic)",
           [](const ExperimentConfig& c, const Args& a) { return active_prob(a.traffic(), c.net); });
    scalar("laplace_interference", "interference Laplace transform (args: s, r, traffic)",
           [](const ExperimentConfig& c, const Args& a) {
             return laplace_interference(a.num("s"), a.num("r"), active_prob(a.traffic(), c.net),
                                         c.net.lambda_r, c.radio);
           });
    scalar("coverage_prob", "SINR coverage at tau (args: traffic)",
           [](const ExperimentConfig& c, const Args& a) {
             return coverage_prob(c.tau, a.traffic(), c.net, c.radio, c.cov);
           });
    t["moment_Mq"] = {"q-th moment of the conditional success (args: q_re, q_im, traffic)",
                      [](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
                        const ComplexValue q{a.num("q_re"), a.num("q_im")};
                        const auto v = moment_Mq(q, c.tau, a.traffic(), c.net, c.radio, c.cov);
                        csv.header({"re", "im"});
                        csv.row({v.real(), v.imag()});
                      }};
    scalar("md_coverage", "meta distribution of coverage at (tau, x) (args: traffic)",
           [](const ExperimentConfig& c, const Args& a) {
             return md_coverage(c.tau, c.x, a.traffic(), c.net, c.radio, c.cov);
           });
    auto series = [](CsvWriter& csv, const SeriesResult& r) {
      csv.header({"value", "residual_bound", "terms"});
      csv.row({r.value, r.residual_bound, static_cast<double>(r.terms)});
    };
    t["rate_coverage"] = {"rate coverage at tau_rate (args: traffic)",
                          [series](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
                            series(csv, rate_coverage(c.tau_rate, a.traffic(), c.net, c.radio, c.cov));
                          }};
    t["md_rate"] = {"meta distribution of rate coverage at (tau_rate, x) (args: traffic)",
                    [series](const ExperimentConfig& c, const Args& a, CsvWriter& csv) {
                      series(csv, md_rate(c.tau_rate, c.x, a.traffic(), c.net, c.radio, c.cov));
                    }};
    return t;
  }();
  return table;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Check {
  std::ostream& out;
  bool all = true;

  void report(bool ok, const std::string& name, const std::string& detail) {
    all = all && ok;
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

NetworkParams at_u(const NetworkParams& base, double u) {
  NetworkParams p = base;
  p.m = u;
  p.lambda = u * base.lambda_p;
  return p;
}

ExperimentConfig figure_defaults(int n) {
  ExperimentConfig c;
  c.scenario = "figure " + std::to_string(n);
  switch (n) {
    case 2:
      c.sim.replications = 100000;
      c.k_max = 40;
      break;
    case 3:
    case 4:
      c.sim.replications = 20000;
      break;
    case 5:
    case 6:
      break;
    case 7:
      c.net = NetworkParams::from_per_km(2.0, 1.0, 2.0, 150.0);
      c.k_max = 15;
      break;
    case 8:
      c.net = NetworkParams::from_per_km(2.0, 1.0, 5.0, 150.0);
      c.sim.replications = 2000;
      break;
    case 9:
      c.net = NetworkParams::from_per_km(2.0, 1.0, 5.0, 150.0);
      c.radio.alpha = 4.0;
      c.x = 0.9;
      c.tau_rate = 9e6;
      break;
    default:
      throw std::invalid_argument("unknown figure " + std::to_string(n) + " (expected 2..9)");
  }
  return c;
}

void apply_json(ExperimentConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  reject_unknown(doc,
                 {"scenario", "network", "radio", "sweep", "R_b_m", "tau", "x", "tau_rate_bps",
                  "k_max", "simulation", "numerics"},
                 "top level");
  read(doc, "scenario", cfg.scenario);
  if (doc.contains("network")) {
    const json& n = doc.at("network");
    reject_unknown(n, {"lambda_r_per_km", "lambda_p_per_km", "m", "a_m", "lambda_per_km"}, "network");
    read_per_km(n, "lambda_r_per_km", cfg.net.lambda_r);
    read_per_km(n, "lambda_p_per_km", cfg.net.lambda_p);
    read(n, "m", cfg.net.m);
    read(n, "a_m", cfg.net.a);
    // Keep equal effective densities unless the N-PTS density is given.
    if (n.contains("lambda_per_km"))
      read_per_km(n, "lambda_per_km", cfg.net.lambda);
    else if (n.contains("m") || n.contains("lambda_p_per_km"))
      cfg.net.lambda = cfg.net.m * cfg.net.lambda_p;
  }
  if (doc.contains("radio")) {
    const json& r = doc.at("radio");
    reject_unknown(r, {"P_t_W", "sigma2_W", "alpha", "B_Hz", "pathloss_ref_m"}, "radio");
    read(r, "P_t_W", cfg.radio.P_t);
    read(r, "sigma2_W", cfg.radio.sigma2);
    read(r, "alpha", cfg.radio.alpha);
    read(r, "B_Hz", cfg.radio.B);
    read(r, "pathloss_ref_m", cfg.radio.pathloss_ref_m);
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, {"u", "a_m", "R_b_m"}, "sweep");
    read(s, "u", cfg.u_grid);
    read(s, "a_m", cfg.a_grid);
    read(s, "R_b_m", cfg.Rb_grid);
  }
  read(doc, "R_b_m", cfg.R_b);
  read(doc, "tau", cfg.tau);
  read(doc, "x", cfg.x);
  read(doc, "tau_rate_bps", cfg.tau_rate);
  read(doc, "k_max", cfg.k_max);
  if (doc.contains("simulation")) {
    const json& s = doc.at("simulation");
    reject_unknown(s, {"replications", "master_seed", "window_km", "fading_draws_per_geometry"},
                   "simulation");
    read(s, "replications", cfg.sim.replications);
    read(s, "master_seed", cfg.sim.master_seed);
    read(s, "window_km", cfg.sim.window_km);
    read(s, "fading_draws_per_geometry", cfg.sim.fading_draws_per_geometry);
  }
  if (doc.contains("numerics")) {
    const json& q = doc.at("numerics");
    reject_unknown(q,
                   {"K", "tail_bound", "quad_abs_tol", "quad_rel_tol", "quad_max_subdivisions",
                    "md_abs_tol", "md_rel_tol", "md_max_subdivisions", "gp_first_panel",
                    "gp_max_truncation"},
                   "numerics");
    read(q, "K", cfg.pmf.K);
    read(q, "tail_bound", cfg.pmf.tail_bound);
    read_quad(q, "quad_", cfg.pmf.quad);
    read_quad(q, "quad_", cfg.cov.quad);
    read_quad(q, "md_", cfg.cov.md_quad);
    read(q, "gp_first_panel", cfg.cov.gil_pelaez.first_panel);
    read(q, "gp_max_truncation", cfg.cov.gil_pelaez.max_truncation);
  }
  cfg.net.validate();
  cfg.radio.validate();
  if (cfg.u_grid.empty() || cfg.a_grid.empty() || cfg.Rb_grid.empty())
    throw std::invalid_argument("config: sweep grids must be nonempty");
  if (cfg.sim.replications < 0) throw std::invalid_argument("config: replications must be >= 0");
  if (cfg.k_max < 0) throw std::invalid_argument("config: k_max must be >= 0");
}

void apply_json_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  apply_json(cfg, doc);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("override '" + a + "' must look like path.to.key=value");
    json value;
    try {
      value = json::parse(a.substr(eq + 1));
    } catch (const json::parse_error&) {
      value = a.substr(eq + 1);
    }
    json doc = json::object();
    json* node = &doc;
    std::stringstream path(a.substr(0, eq));
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = value;
    apply_json(cfg, doc);
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["network"] = {{"lambda_r_per_km", c.net.lambda_r / kPerKm},
                  {"lambda_p_per_km", c.net.lambda_p / kPerKm},
                  {"m", c.net.m},
                  {"a_m", c.net.a},
                  {"lambda_per_km", c.net.lambda / kPerKm}};
  j["radio"] = {{"P_t_W", c.radio.P_t},
                {"sigma2_W", c.radio.sigma2},
                {"alpha", c.radio.alpha},
                {"B_Hz", c.radio.B},
                {"pathloss_ref_m", c.radio.pathloss_ref_m}};
  j["sweep"] = {{"u", c.u_grid}, {"a_m", c.a_grid}, {"R_b_m", c.Rb_grid}};
  j["R_b_m"] = c.R_b;
  j["tau"] = c.tau;
  j["x"] = c.x;
  j["tau_rate_bps"] = c.tau_rate;
  j["k_max"] = c.k_max;
  j["simulation"] = {{"replications", c.sim.replications},
                     {"master_seed", c.sim.master_seed},
                     {"window_km", c.sim.window_km},
                     {"fading_draws_per_geometry", c.sim.fading_draws_per_geometry}};
  j["numerics"] = {{"K", c.pmf.K},
                   {"tail_bound", c.pmf.tail_bound},
                   {"quad_abs_tol", c.pmf.quad.abs_tol},
                   {"quad_rel_tol", c.pmf.quad.rel_tol},
                   {"quad_max_subdivisions", c.pmf.quad.max_subdivisions},
                   {"md_abs_tol", c.cov.md_quad.abs_tol},
                   {"md_rel_tol", c.cov.md_quad.rel_tol},
                   {"md_max_subdivisions", c.cov.md_quad.max_subdivisions},
                   {"gp_first_panel", c.cov.gil_pelaez.first_panel},
                   {"gp_max_truncation", c.cov.gil_pelaez.max_truncation}};
  return j;
}

void run_figure(int n, const ExperimentConfig& cfg, std::ostream& out) {
  switch (n) {
    case 2: return figure2(cfg, out);
    case 3: return figure_moments(LoadKind::Typical, cfg, out);
    case 4: return figure_moments(LoadKind::Tagged, cfg, out);
    case 5: return figure5(cfg, out);
    case 6: return figure6(cfg, out);
    case 7: return figure7(cfg, out);
    case 8: return figure8(cfg, out);
    case 9: return figure9(cfg, out);
    default: throw std::invalid_argument("unknown figure " + std::to_string(n) + " (expected 2..9)");
  }
}

void run_op(const std::string& name, const ExperimentConfig& cfg,
            const std::map<std::string, std::string>& args, std::ostream& out) {
  const auto& table = operations();
  const auto it = table.find(name);
  if (it == table.end())
    throw std::invalid_argument("unknown op '" + name + "'; run 'platoonctl op list' for the catalogue");
  const Args a(name, args);
  CsvWriter csv(out);
  csv.meta("op", name);
  for (const auto& [k, v] : args) csv.meta("arg." + k, v);
  csv.meta("config", dump(to_json(cfg)));
  it->second.run(cfg, a, csv);
}

std::vector<std::string> op_catalogue() {
  std::vector<std::string> lines;
  for (const auto& [name, op] : operations()) lines.push_back(name + ": " + op.usage);
  return lines;
}

void run_simulate(const std::string& target, const ExperimentConfig& cfg,
                  const std::map<std::string, std::string>& args, std::ostream& out,
                  std::ostream* records) {
  const Args a("simulate " + target, args);
  if (cfg.sim.replications < 1)
    throw std::invalid_argument("simulate: replications must be >= 1 (use --reps)");
  CsvWriter csv(out);
  csv.meta("simulate", target);
  for (const auto& [k, v] : args) csv.meta("arg." + k, v);
  csv.meta("config", dump(to_json(cfg)));
  auto write_sim = [&](const LoadSimResult& r) {
    csv.meta("mean", format_number(r.mean.value));
    csv.meta("mean_std_error", format_number(r.mean.std_error));
    csv.meta("variance", format_number(r.variance));
    csv.meta("skewness", format_number(r.skewness));
    write_pmf(csv, r.pmf);
  };
  auto write_cov = [&](const CoverageSimResult& r) {
    csv.header({"estimate", "value", "std_error", "n"});
    auto line = [&](const char* what, const SimEstimate& e) {
      csv.row_text({what, format_number(e.value), format_number(e.std_error), std::to_string(e.n)});
    };
    line("coverage", r.coverage);
    line("meta", r.meta);
    line("active_fraction", r.active_fraction);
  };
  if (target == "load") {
    write_sim(sim_load(a.kind(), a.traffic(), cfg.net, cfg.sim, records));
  } else if (target == "connectivity") {
    write_sim(sim_connectivity(a.traffic(), {cfg.R_b, cfg.net}, cfg.sim));
  } else if (target == "coverage") {
    write_cov(sim_coverage_study(cfg.tau, cfg.x, a.traffic(), cfg.net, cfg.radio, cfg.sim));
  } else if (target == "rate") {
    write_cov(sim_rate_study(cfg.tau_rate, cfg.x, a.traffic(), cfg.net, cfg.radio, cfg.sim));
  } else {
    throw std::invalid_argument("unknown simulate target '" + target +
                                "' (expected load, connectivity, coverage or rate)");
  }
}

bool run_validate(const ExperimentConfig& cfg, double tv_tolerance, std::ostream& out) {
  if (cfg.sim.replications < 1)
    throw std::invalid_argument("validate: replications must be >= 1 (use --reps)");
  Check check{out};
  auto fmt = [](double v) { return format_number(v); };
  for (LoadKind kind : {LoadKind::Typical, LoadKind::Tagged}) {
    for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
      const auto pmf = load_pmf(kind, tr, cfg.net, cfg.pmf);
      const auto mom = load_moments(kind, tr, cfg.net);
      const auto sim = sim_load(kind, tr, cfg.net, cfg.sim);
      const std::string name = to_string(kind) + " " + tname(tr) + " load";
      const double tv = tv_distance(pmf, sim.pmf);
      check.report(tv < tv_tolerance, name + " TV", fmt(tv) + " < " + fmt(tv_tolerance));
      const double z = std::abs(sim.mean.value - mom.mean) / sim.mean.std_error;
      check.report(z < 3.0, name + " mean",
                   "analytical " + fmt(mom.mean) + ", simulated " + fmt(sim.mean.value) + " +- " +
                       fmt(sim.mean.std_error) + " (" + fmt(z) + " SE)");
    }
  }
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
    const V2VParams v2v{cfg.R_b, cfg.net};
    const double tv = tv_distance(pmf_degree(tr, v2v, cfg.pmf), sim_connectivity(tr, v2v, cfg.sim).pmf);
    check.report(tv < tv_tolerance, std::string(tname(tr)) + " connectivity degree TV",
                 fmt(tv) + " < " + fmt(tv_tolerance));
  }
  for (Traffic tr : {Traffic::PTS, Traffic::NPTS}) {
    const double cp = coverage_prob(cfg.tau, tr, cfg.net, cfg.radio, cfg.cov);
    const auto sim = sim_coverage(cfg.tau, tr, cfg.net, cfg.radio, cfg.sim);
    const double gap = sim.value - cp;
    check.report(std::abs(gap) < 0.02, std::string(tname(tr)) + " coverage gap",
                 "simulated " + fmt(sim.value) + " +- " + fmt(sim.std_error) + ", analytical " +
                     fmt(cp) + ", gap " + fmt(gap) + " (bound 0.02)");
  }
  return check.all;
}

}  // namespace platoon::tools
