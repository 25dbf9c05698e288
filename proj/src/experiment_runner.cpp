#include "lecho/experiment_runner.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace lecho {

namespace {

bool integer_strength(double K) { return std::abs(K - std::round(K)) < 1e-12; }

// K(E) for a map/perturbation pair: closed form where correlations vanish exactly.
double diffusion_estimate(const MapSpec& map, const PerturbationSpec& pert, int l_max,
                          std::uint64_t seed) {
  if (map.kind == MapKind::sawtooth && integer_strength(map.K) &&
      pert.family == PerturbationFamily::monomial)
    return 0.5 * c0_closed_form(pert.order, pert.coefficient);
  return diffusion_constant(map, pert, l_max, 200000, seed).value;
}

std::vector<double> dedup(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

void RunConfig::validate() const {
  map_kind_from_string(map);
  if (!(K > 0.0)) throw ConfigError("K must be > 0");
  if (N < 2 || N % 2) throw ConfigError("N must be even and >= 2");
  if (sigma.empty()) throw ConfigError("need at least one sigma");
  for (double s : sigma)
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("sigma must be finite and >= 0");
  if (family != "monomial" && family != "cosine") throw ConfigError("family must be monomial or cosine");
  if (family == "monomial" && (order < 1 || order > 5)) throw ConfigError("order must be in 1..5");
  if (state != "point" && state != "gaussian") throw ConfigError("state must be point or gaussian");
  if (centers != "full" && centers != "central") throw ConfigError("centers must be full or central");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  if (ensemble < 1) throw ConfigError("ensemble must be >= 1");
  if (T < 0) throw ConfigError("T must be >= 0");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  for (int n : Ns)
    if (n < 2 || n % 2) throw ConfigError("every N in Ns must be even and >= 2");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (l_max < 0) throw ConfigError("l_max must be >= 0");
  map_spec();
}

MapSpec RunConfig::map_spec() const {
  MapSpec m{map_kind_from_string(map), K};
  m.validate();
  return m;
}

PerturbationSpec RunConfig::pert_spec(double s, int n) const {
  double hbar = kTwoPi / n;
  if (family == "cosine") return PerturbationSpec::cosine(s * hbar, hbar);
  return PerturbationSpec::monomial(order, s * hbar, hbar);
}

nlohmann::json RunConfig::to_json() const {
  return {{"command", command}, {"map", map},         {"K", K},
          {"N", N},             {"sigma", sigma},     {"family", family},
          {"order", order},     {"state", state},     {"kappa", kappa},
          {"centers", centers}, {"r0", r0},           {"p0", p0},
          {"ensemble", ensemble}, {"T", T},           {"seed", seed},
          {"threads", threads}, {"format", format},   {"per_state", per_state},
          {"Ns", Ns},           {"times", times},     {"samples", samples},
          {"bins", bins},       {"l_max", l_max},     {"t_levy", t_levy},
          {"c0", c0},           {"a1", a1},           {"b_bar", b_bar},
          {"chord_tol", chord_tol}};
}

PhasePoint ensemble_center(const std::string& region, std::uint64_t seed, std::int64_t member) {
  MemberRng rng(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(member));
  double lo = 0.0, hi = kTwoPi;
  if (region == "central") {
    lo = kPi / 2.0;
    hi = 3.0 * kPi / 2.0;
  }
  double r = rng.uniform(lo, hi);
  double p = rng.uniform(lo, hi);
  return {r, p};
}

int ensemble_point_index(const std::string& region, int N, std::uint64_t seed,
                         std::int64_t member) {
  MemberRng rng(seed ^ 0x27d4eb2fULL, static_cast<std::uint64_t>(member));
  if (region == "central") {
    int lo = N / 4, span = N / 2;
    return lo + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(span));
  }
  return static_cast<int>(rng.bits() % static_cast<std::uint64_t>(N));
}

double mean_potential(const PerturbationSpec& pert) {
  if (pert.family == PerturbationFamily::cosine) return 0.0;
  if (pert.order % 2) return 0.0;
  return -pert.coefficient * std::pow(kPi, pert.order) / (pert.order + 1);
}

EnsembleCurve ensemble_fidelity(const QuantumDims& dims, const KickSpec& h0, const KickSpec& h1,
                                std::int64_t members, const StateFactory& make_state, int T,
                                bool keep_members) {
  if (members < 1) throw ConfigError("ensemble must be >= 1");
  FloquetOperator u0(dims, h0), u1(dims, h1);
  std::vector<FidelityCurve> curves(static_cast<size_t>(members));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < members; ++k) {
    WaveFunction psi = make_state(k);
    curves[static_cast<size_t>(k)] = fidelity_series(u0, u1, psi, T);
  }
  EnsembleCurve e;
  const double n = static_cast<double>(members);
  for (int t = 0; t <= T; ++t) {
    double s = 0.0, s2 = 0.0, sl = 0.0;
    cplx sm = 0.0;
    for (const FidelityCurve& c : curves) {
      const FidelityRecord& r = c.records[static_cast<size_t>(t)];
      s += r.M;
      s2 += r.M * r.M;
      sl += std::log(std::max(r.M, 1e-300));
      sm += r.m;
    }
    double mean = s / n;
    e.M_mean.push_back(mean);
    e.M_stderr.push_back(members > 1 ? std::sqrt(std::max(0.0, s2 / n - mean * mean) / (n - 1.0))
                                     : 0.0);
    e.M_geo.push_back(std::exp(sl / n));
    e.Ma.push_back(std::norm(sm / n));
  }
  if (keep_members) e.members = std::move(curves);
  return e;
}

OutputSink::OutputSink(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out) {
  started_ = iso_timestamp_utc();
  std::filesystem::create_directories(dir_);
}

void OutputSink::sidecar(const std::string& file, const std::string& kind,
                         const nlohmann::json& extra) {
  nlohmann::json meta = {{"file", file},
                         {"kind", kind},
                         {"config", cfg_.to_json()},
                         {"seed", cfg_.seed},
                         {"code_version", LECHO_VERSION},
                         {"threads", omp_get_max_threads()},
                         {"u1_convention", "V_total = V_map + eps * V_pert"}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  std::string name = file.substr(0, file.find_last_of('.')) + ".meta.json";
  write_text(dir_ / name, meta.dump(2) + "\n");
  files_.push_back(name);
}

void OutputSink::table(const std::string& stem, const Table& t, const std::string& kind,
                       const nlohmann::json& extra) {
  std::string file;
  if (cfg_.format == "json") {
    file = stem + ".json";
    write_text(dir_ / file, t.to_json().dump(1) + "\n");
  } else {
    file = stem + ".csv";
    write_text(dir_ / file, t.to_csv());
  }
  files_.push_back(file);
  sidecar(file, kind, extra);
}

void OutputSink::json(const std::string& stem, const nlohmann::json& body,
                      const std::string& kind) {
  std::string file = stem + ".json";
  write_text(dir_ / file, body.dump(2) + "\n");
  files_.push_back(file);
  sidecar(file, kind, nlohmann::json::object());
}

void OutputSink::finish() {
  nlohmann::json cfg = cfg_.to_json();
  std::vector<std::string> listed = files_;
  listed.push_back("manifest.json");
  nlohmann::json m = {{"command", cfg_.command},
                      {"config_hash", fnv1a_hex(cfg.dump())},
                      {"code_version", LECHO_VERSION},
                      {"started", started_},
                      {"finished", iso_timestamp_utc()},
                      {"files", listed}};
  write_text(dir_ / "manifest.json", m.dump(2) + "\n");
}

namespace {

StateFactory state_factory(const RunConfig& cfg, const QuantumDims& dims) {
  if (cfg.state == "point") {
    return [cfg, dims](std::int64_t k) {
      return prepare_point_source(dims, ensemble_point_index(cfg.centers, dims.N, cfg.seed, k));
    };
  }
  return [cfg, dims](std::int64_t k) {
    PhasePoint c = ensemble_center(cfg.centers, cfg.seed, k);
    return prepare_gaussian(dims, GaussianPacketSpec::with_kappa(dims, c.r, c.p, cfg.kappa));
  };
}

}  // namespace

void cmd_fidelity(const RunConfig& cfg) {
  OutputSink sink(cfg);
  QuantumDims dims(cfg.N);
  MapSpec map = cfg.map_spec();
  for (double s : dedup(cfg.sigma)) {
    PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
    EnsembleCurve e = ensemble_fidelity(dims, unperturbed(map), perturbed(map, pert), cfg.ensemble,
                                        state_factory(cfg, dims), cfg.T, cfg.per_state);
    std::string tag = "sigma_" + format_double(s);
    Table t;
    t.columns = {"t", "M_mean", "M_stderr", "M_geo", "Ma"};
    for (int k = 0; k <= cfg.T; ++k)
      t.add({double(k), e.M_mean[size_t(k)], e.M_stderr[size_t(k)], e.M_geo[size_t(k)],
             e.Ma[size_t(k)]});
    sink.table("fidelity_" + tag, t, "exact", {{"sigma", s}});

    double K_E = diffusion_estimate(map, pert, cfg.l_max, cfg.seed);
    std::vector<double> lam1, lam;
    int tl = std::min(cfg.T, 60);
    lam1 = lambda1_decay_curve(map, tl, 20000, cfg.seed);
    lam = lambda_decay_curve(map, tl, 20000, cfg.seed);
    Table p;
    p.columns = {"t", "fgr", "pt", "lambda", "lambda1"};
    for (int k = 0; k <= cfg.T; ++k) {
      double l = k <= tl ? lam[size_t(k)] : std::nan("");
      double l1 = k <= tl ? lam1[size_t(k)] : std::nan("");
      p.add({double(k), fgr_M(K_E, s, k), perturbative_M(K_E, s, k, cfg.N), l, l1});
    }
    sink.table("predictors_" + tag, p, "fgr,pt,lambda,lambda1", {{"sigma", s}, {"K_E", K_E}});

    if (cfg.per_state) {
      Table st;
      st.columns = {"state", "t", "m_re", "m_im", "M"};
      for (size_t m = 0; m < e.members.size(); ++m)
        for (const FidelityRecord& r : e.members[m].records)
          st.add({double(m), double(r.t), r.m.real(), r.m.imag(), r.M});
      sink.table("states_" + tag, st, "exact", {{"sigma", s}});
    }
  }
  sink.finish();
}

void cmd_compare_sc(const RunConfig& cfg) {
  OutputSink sink(cfg);
  QuantumDims dims(cfg.N);
  MapSpec map = cfg.map_spec();
  for (double s : dedup(cfg.sigma)) {
    PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
    std::string tag = "sigma_" + format_double(s);
    Table t;
    if (cfg.state == "point") {
      int j0 = static_cast<int>(std::lround(wrap_angle(cfg.r0) / kTwoPi * cfg.N)) % cfg.N;
      FidelityCurve ex = fidelity_series(dims, unperturbed(map), perturbed(map, pert),
                                         prepare_point_source(dims, j0), cfg.T);
      t.columns = {"t", "M_exact", "M_point", "rel_err_point"};
      for (int k = 0; k <= cfg.T; ++k) {
        double me = ex.records[size_t(k)].M;
        double mp = std::norm(m_point(dims, map, pert, dims.r(j0), k));
        t.add({double(k), me, mp, std::abs(mp - me) / me});
      }
      sink.table("compare_" + tag, t, "exact,point", {{"sigma", s}, {"j0", j0}});
    } else {
      GaussianPacketSpec pk = GaussianPacketSpec::with_kappa(dims, cfg.r0, cfg.p0, cfg.kappa);
      FidelityCurve ex = fidelity_series(dims, unperturbed(map), perturbed(map, pert),
                                         prepare_gaussian(dims, pk), cfg.T);
      t.columns = {"t", "M_exact", "M_sc1", "M_sc2", "rel_err_sc1", "rel_err_sc2", "D"};
      for (int k = 0; k <= cfg.T; ++k) {
        double me = ex.records[size_t(k)].M;
        double m1 = std::norm(m_sc1(dims, map, pert, pk, k));
        double m2 = std::norm(m_sc2(dims, map, pert, pk, k));
        double D = sc_window(map, dims.hbar(), pk, pk.p0, k).D;
        t.add({double(k), me, m1, m2, std::abs(m1 - me) / me, std::abs(m2 - me) / me, D});
      }
      sink.table("compare_" + tag, t, "exact,sc1,sc2", {{"sigma", s}, {"xi", pk.xi}});
    }
  }
  sink.finish();
}

void cmd_fgr_scan(const RunConfig& cfg) {
  OutputSink sink(cfg);
  QuantumDims dims(cfg.N);
  MapSpec map = cfg.map_spec();
  Table t;
  t.columns = {"sigma", "gamma", "t_lo", "t_hi", "residual", "gamma_fgr", "K_E"};
  for (double s : dedup(cfg.sigma)) {
    PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
    EnsembleCurve e = ensemble_fidelity(dims, unperturbed(map), perturbed(map, pert), cfg.ensemble,
                                        state_factory(cfg, dims), cfg.T);
    RateWindow w;
    w.N = cfg.N;
    RateFit f = decay_rate_fit(e.M_mean, w);
    double K_E = diffusion_estimate(map, pert, cfg.l_max, cfg.seed);
    t.add({s, f.gamma, double(f.t_lo), double(f.t_hi), f.residual, 2.0 * s * s * K_E, K_E});
  }
  sink.table("fgr_scan", t, "fgr", {{"rate_method", "ols_log"}, {"floor", "10/N"}});
  sink.finish();
}

void cmd_short_time(const RunConfig& cfg) {
  OutputSink sink(cfg);
  QuantumDims dims(cfg.N);
  MapSpec map = cfg.map_spec();
  std::vector<double> sigmas = dedup(cfg.sigma);
  if (cfg.state == "gaussian") {
    GaussianPacketSpec pk = GaussianPacketSpec::with_kappa(dims, cfg.r0, cfg.p0, cfg.kappa);
    WaveFunction psi = prepare_gaussian(dims, pk);
    ScWindow w = sc_window(map, dims.hbar(), pk, pk.p0, 1);
    Table t;
    t.columns = {"sigma", "M_exact", "M_pred", "k_p", "w_p"};
    for (double s : sigmas) {
      PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
      double kp = action_jet1(map, pert, pk.p0, pk.r0, 1).kp;
      double me = fidelity_series(dims, unperturbed(map), perturbed(map, pert), psi, 1).records[1].M;
      t.add({s, me, short_time_M(kp, w.w_p, s), kp, w.w_p});
    }
    sink.table("short_time", t, "exact,short_time", {{"D", w.D}});
  }
  // First-kick point-source scan. M(1) of a point source does not depend on its position.
  Table p;
  p.columns = {"sigma", "M_exact", "M_fgr", "M_appendix", "N_X"};
  std::vector<double> r0s;
  for (int k = 0; k < 8; ++k) r0s.push_back(kTwoPi * (k + 0.5) / 8.0);
  for (double s : sigmas) {
    PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
    double me = fidelity_series(dims, unperturbed(map), perturbed(map, pert),
                                prepare_point_source(dims, 0), 1).records[1].M;
    double K_E = diffusion_estimate(map, pert, cfg.l_max, cfg.seed);
    double ma = std::nan(""), nx = std::nan("");
    if (s >= 1.0) {
      AppendixEstimate a = appendix_sigma_scaling(map, pert, r0s, 1, cfg.chord_tol);
      ma = a.M_p;
      nx = a.N_X;
    }
    p.add({s, me, fgr_M(K_E, s, 1), ma, nx});
  }
  sink.table("first_kick", p, "exact,fgr,appendix", {{"chord_tol", cfg.chord_tol}});
  sink.finish();
}

void cmd_classical(const RunConfig& cfg) {
  OutputSink sink(cfg);
  MapSpec map = cfg.map_spec();
  int tmax = std::max(1, cfg.T);
  std::vector<StretchStats> st = stretch_curve(map, tmax, cfg.ensemble, cfg.seed);
  double lc = map.kind == MapKind::sawtooth ? lyapunov_closed_form(map.K) : std::nan("");
  Table t;
  t.columns = {"t", "Lambda", "Lambda1", "lambda_closed"};
  for (const StretchStats& s : st) t.add({double(s.t), s.lambda_t, s.lambda1_t, lc});
  sink.table("stretch", t, "lambda,lambda1", {{"ensemble", cfg.ensemble}});

  std::vector<PerturbationSpec> perts;
  if (map.kind == MapKind::sawtooth) {
    for (int i = 1; i <= 5; ++i) perts.push_back(PerturbationSpec::monomial(i, 1.0, 1.0));
  } else {
    perts.push_back(PerturbationSpec::cosine(1.0, 1.0));
  }
  Table k;
  k.columns = {"order", "C0_mc", "C0_stderr", "C0_closed", "K_E", "K_E_stderr"};
  Table c;
  c.columns = {"order", "l", "C", "stderr"};
  for (const PerturbationSpec& p : perts) {
    McEstimate kd = diffusion_constant(map, p, cfg.l_max, cfg.samples, cfg.seed);
    McEstimate c0 = autocorrelation(map, p, 0, cfg.samples, cfg.seed);
    double closed = p.family == PerturbationFamily::monomial ? c0_closed_form(p.order, p.coefficient)
                                                             : std::nan("");
    k.add({double(p.order), c0.value, c0.stderr_, closed, kd.value, kd.stderr_});
    for (int l = 0; l <= cfg.l_max; ++l) {
      McEstimate cl = autocorrelation(map, p, l, cfg.samples, cfg.seed);
      c.add({double(p.order), double(l), cl.value, cl.stderr_});
    }
  }
  sink.table("diffusion", k, "classical", {{"l_max", cfg.l_max}});
  sink.table("correlations", c, "classical");
  sink.finish();
}

void cmd_action_stats(const RunConfig& cfg) {
  OutputSink sink(cfg);
  MapSpec map = cfg.map_spec();
  PerturbationSpec pert = cfg.pert_spec(1.0, cfg.N).with_epsilon(1.0);
  for (int t : cfg.times) {
    ActionCurve c = action_curve(map, pert, cfg.r0, t, 4096);
    Table tb;
    tb.columns = {"p0", "dS_over_eps"};
    for (size_t i = 0; i < c.p0.size(); ++i) tb.add({c.p0[i], c.ds_over_eps[i]});
    sink.table("action_curve_t" + std::to_string(t), tb, "action_curve", {{"r0", cfg.r0}, {"t", t}});
  }
  double K_E = diffusion_estimate(map, pert, cfg.l_max, cfg.seed);
  Table v;
  v.columns = {"t", "mean_over_eps_t", "var_over_eps2", "two_K_E_t"};
  std::vector<double> ts, vs;
  int tmax = std::max(1, cfg.T);
  for (int t = 1; t <= tmax; ++t) {
    std::vector<double> s = action_samples(map, pert, t, cfg.samples, cfg.seed);
    double m = 0.0, m2 = 0.0;
    for (double x : s) m += x;
    m /= double(s.size());
    for (double x : s) m2 += (x - m) * (x - m);
    m2 /= double(s.size() - 1);
    v.add({double(t), m / t, m2, 2.0 * K_E * t});
    ts.push_back(t);
    vs.push_back(m2);
  }
  nlohmann::json extra = {{"K_E", K_E}};
  if (ts.size() >= 2) extra["variance_slope"] = linear_fit(ts, vs).slope;
  sink.table("action_variance", v, "action_stats", extra);
  sink.finish();
}

void cmd_levy(const RunConfig& cfg) {
  OutputSink sink(cfg);
  MapSpec map = cfg.map_spec();
  PerturbationSpec pert = cfg.pert_spec(1.0, cfg.N).with_epsilon(1.0);
  std::vector<double> x = action_samples(map, pert, cfg.t_levy, cfg.samples, cfg.seed);
  double shift = cfg.t_levy * mean_potential(pert);
  for (double& v : x) v -= shift;
  Histogram h = histogram(x, cfg.bins);
  LevyFitOptions o1;
  o1.fix_alpha = 1.0;
  LevyFit f1 = levy_fit(h, o1);
  LevyFit ff = levy_fit(h, {});
  LevyFitOptions og;
  og.fix_alpha = 2.0;
  LevyFit fg = levy_fit(h, og);
  Table t;
  t.columns = {"x", "density", "levy_alpha1", "levy_free", "gaussian"};
  for (size_t b = 0; b < h.centers.size(); ++b) {
    double c = h.centers[b];
    t.add({c, h.density[b], levy_density(c, f1.params), levy_density(c, ff.params),
           levy_density(c, fg.params)});
  }
  auto fit_json = [](const LevyFit& f) {
    return nlohmann::json{{"alpha", f.params.alpha}, {"beta", f.params.beta},
                          {"g", f.params.g},         {"D", f.params.D},
                          {"residual", f.residual},  {"bins_used", f.bins_used},
                          {"x_lo", f.x_lo},          {"x_hi", f.x_hi}};
  };
  sink.table("levy_histogram", t, "levy", {{"coverage", h.coverage}, {"shift", shift}});
  sink.json("levy_fits",
            {{"alpha1", fit_json(f1)}, {"free", fit_json(ff)}, {"gaussian", fit_json(fg)},
             {"t", cfg.t_levy}, {"samples", cfg.samples}, {"fit_mass_window", {0.02, 0.98}}},
            "levy");
  Table m;
  m.columns = {"sigma", "Ma_samples", "Ma_levy_alpha1", "Ma_gaussian"};
  for (double s : dedup(cfg.sigma))
    m.add({s, mean_value_M(x, 1.0 / s), levy_Ma_prediction(f1.params, s),
           levy_Ma_prediction(fg.params, s)});
  sink.table("levy_Ma", m, "levy");
  sink.finish();
}

void cmd_regimes(const RunConfig& cfg) {
  OutputSink sink(cfg);
  MapSpec map = cfg.map_spec();
  Table b;
  b.columns = {"N", "sigma_p", "sigma", "t_B", "t_H"};
  std::vector<double> lx, ly;
  for (int n : cfg.Ns) {
    QuantumDims dims(n);
    PerturbationSpec unit = cfg.pert_spec(1.0, n);
    double K_E = diffusion_estimate(map, unit, cfg.l_max, cfg.seed);
    double sp = perturbative_border(K_E, n);
    double s = 0.5 * sp;
    PerturbationSpec pert = cfg.pert_spec(s, n);
    int T = 3 * n;
    RunConfig c = cfg;
    c.N = n;
    EnsembleCurve e = ensemble_fidelity(dims, unperturbed(map), perturbed(map, pert), cfg.ensemble,
                                        state_factory(c, dims), T);
    std::vector<double> pred(size_t(T) + 1);
    for (int k = 0; k <= T; ++k) pred[size_t(k)] = fgr_M(K_E, s, k);
    std::optional<int> tb = breakdown_time(e.M_mean, pred, 0.1);
    b.add({double(n), sp, s, tb ? double(*tb) : std::nan(""), double(n)});
    if (tb) {
      lx.push_back(std::log(double(n)));
      ly.push_back(std::log(double(*tb)));
    }
  }
  nlohmann::json extra = nlohmann::json::object();
  if (lx.size() >= 2) {
    LinearFit f = linear_fit(lx, ly);
    extra["tB_loglog_slope"] = f.slope;
    extra["tB_prefactor"] = std::exp(f.intercept);
  }
  extra["external_borders"] = {"sigma_d", "sigma_r"};
  sink.table("breakdown", b, "pt", extra);

  QuantumDims dims(cfg.N);
  GaussianPacketSpec pk = GaussianPacketSpec::with_kappa(dims, cfg.r0, cfg.p0, cfg.kappa);
  ScWindow w = sc_window(map, dims.hbar(), pk, pk.p0, 1);
  double lam = map.kind == MapKind::sawtooth ? lyapunov_closed_form(map.K)
                                             : stretch_stats(map, 10, 20000, cfg.seed).lambda_t;
  Table tau;
  tau.columns = {"sigma", "dp0_1", "tau1", "tau1_below_first_kick", "tau2", "t_H"};
  for (double s : dedup(cfg.sigma)) {
    PerturbationSpec pert = cfg.pert_spec(s, cfg.N);
    double dp = first_kick_linear_width(map, pert, pk.r0, pk.p0);
    TimeEstimate t1 = tau1_estimate(lam, dp, cfg.a1, cfg.b_bar, w.w_p);
    double t2 = tau2_estimate(lam, cfg.c0, w.w_p);
    tau.add({s, dp, t1.value, t1.below_first_kick ? 1.0 : 0.0, t2, double(cfg.N)});
  }
  sink.table("time_scales", tau, "tau", {{"D", w.D}, {"w_p", w.w_p}, {"Lambda", lam}});

  Table sp;
  sp.columns = {"N", "sigma_p"};
  PerturbationSpec unit = cfg.pert_spec(1.0, cfg.N);
  double K_E = diffusion_estimate(map, unit, cfg.l_max, cfg.seed);
  for (int n = 64; n <= (1 << 17); n *= 2) sp.add({double(n), perturbative_border(K_E, n)});
  sink.table("sigma_p", sp, "pt", {{"K_E", K_E}});
  sink.finish();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Loschmidt echo experiments on quantized kicked maps"};
  app.set_config("--config", "", "key = value config file");
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--map", cfg.map, "standard | sawtooth");
  app.add_option("--K", cfg.K, "kick strength");
  app.add_option("--N", cfg.N, "Hilbert space dimension (even)");
  app.add_option("--sigma", cfg.sigma, "perturbation strength(s)")->delimiter(',');
  app.add_option("--family", cfg.family, "monomial | cosine");
  app.add_option("--order", cfg.order, "monomial order i");
  app.add_option("--state", cfg.state, "point | gaussian");
  app.add_option("--kappa", cfg.kappa, "hbar / xi^2");
  app.add_option("--centers", cfg.centers, "full | central");
  app.add_option("--r0", cfg.r0, "packet / point-source position");
  app.add_option("--p0", cfg.p0, "packet momentum");
  app.add_option("--ensemble", cfg.ensemble, "number of initial states or samples");
  app.add_option("--T", cfg.T, "number of kicks");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--threads", cfg.threads, "worker threads (0 = runtime default)");
  app.add_option("--format", cfg.format, "csv | json");
  app.add_flag("--per-state", cfg.per_state, "also emit per-state fidelity curves");
  app.add_option("--Ns", cfg.Ns, "dimensions for the breakdown scan")->delimiter(',');
  app.add_option("--times", cfg.times, "kick counts for action curves")->delimiter(',');
  app.add_option("--samples", cfg.samples, "Monte Carlo samples");
  app.add_option("--bins", cfg.bins, "histogram bins");
  app.add_option("--l-max", cfg.l_max, "correlation lag cutoff");
  app.add_option("--t-levy", cfg.t_levy, "kick count for action statistics");
  app.add_option("--c0", cfg.c0, "oscillation prefactor for tau2");
  app.add_option("--a1", cfg.a1, "accuracy factor for tau1");
  app.add_option("--b-bar", cfg.b_bar, "slope prefactor for tau1");
  app.add_option("--chord-tol", cfg.chord_tol, "chord tolerance (radians) for the appendix estimate");

  const std::vector<std::pair<std::string, std::function<void(const RunConfig&)>>> commands = {
      {"fidelity", cmd_fidelity},       {"compare-sc", cmd_compare_sc},
      {"fgr-scan", cmd_fgr_scan},       {"short-time", cmd_short_time},
      {"classical", cmd_classical},     {"action-stats", cmd_action_stats},
      {"levy", cmd_levy},               {"regimes", cmd_regimes}};
  for (const auto& c : commands) app.add_subcommand(c.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    for (const auto& c : commands) {
      if (!app.got_subcommand(c.first)) continue;
      cfg.command = c.first;
      cfg.validate();
      if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
      c.second(cfg);
      std::cout << "wrote " << cfg.out << "/manifest.json\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalGuard& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace lecho
