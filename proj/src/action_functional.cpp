#include "lecho/action_functional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lecho {

PerturbationSpec PerturbationSpec::cosine(double epsilon, double hbar) {
  PerturbationSpec p;
  p.family = PerturbationFamily::cosine;
  p.order = 0;
  p.coefficient = 1.0;
  p.epsilon = epsilon;
  p.hbar = hbar;
  p.validate();
  return p;
}

PerturbationSpec PerturbationSpec::monomial(int i, double epsilon, double hbar) {
  if (i < 1 || i > 5) throw ConfigError("monomial order must be in 1..5");
  return monomial(i, epsilon, hbar, standard_coefficients()[static_cast<size_t>(i - 1)]);
}

PerturbationSpec PerturbationSpec::monomial(int i, double epsilon, double hbar,
                                            double coefficient) {
  PerturbationSpec p;
  p.family = PerturbationFamily::monomial;
  p.order = i;
  p.coefficient = coefficient;
  p.epsilon = epsilon;
  p.hbar = hbar;
  p.validate();
  return p;
}

PerturbationSpec PerturbationSpec::with_sigma(double sigma) const {
  PerturbationSpec p = *this;
  p.epsilon = sigma * hbar;
  return p;
}

PerturbationSpec PerturbationSpec::with_epsilon(double eps) const {
  PerturbationSpec p = *this;
  p.epsilon = eps;
  return p;
}

void PerturbationSpec::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("hbar must be > 0");
  if (!std::isfinite(epsilon)) throw ConfigError("epsilon must be finite");
  if (family == PerturbationFamily::monomial) {
    if (order < 1 || order > 5) throw ConfigError("monomial order must be in 1..5");
    if (!std::isfinite(coefficient)) throw ConfigError("monomial coefficient must be finite");
  }
}

std::string PerturbationSpec::describe() const {
  std::ostringstream os;
  if (family == PerturbationFamily::cosine)
    os << "cosine";
  else
    os << "monomial" << order;
  return os.str();
}

double PerturbationSpec::value(double r) const {
  if (family == PerturbationFamily::cosine) return std::cos(r);
  double d = r - kPi;
  double v = d;
  for (int k = 1; k < order; ++k) v *= d;
  return -coefficient * v;
}

double PerturbationSpec::slope(double r) const {
  if (family == PerturbationFamily::cosine) return -std::sin(r);
  double d = r - kPi;
  double v = 1.0;
  for (int k = 1; k < order; ++k) v *= d;
  return -coefficient * order * v;
}

double PerturbationSpec::curvature(double r) const {
  if (family == PerturbationFamily::cosine) return -std::cos(r);
  if (order < 2) return 0.0;
  double d = r - kPi;
  double v = 1.0;
  for (int k = 2; k < order; ++k) v *= d;
  return -coefficient * order * (order - 1) * v;
}

double potential_value(const PerturbationSpec& pert, double r) { return pert.value(r); }

std::array<double, 5> standard_coefficients() {
  return {kPi / std::sqrt(15.0), 0.5, std::sqrt(1.4) / (3.0 * kPi),
          std::sqrt(5.0) / (4.0 * kPi * kPi), std::sqrt(2.2) / (3.0 * kPi * kPi * kPi)};
}

double c0_closed_form(int i, double coefficient) {
  if (i < 1 || i > 5) throw ConfigError("c0_closed_form: i must be in 1..5");
  double pw = std::pow(kPi, 2 * i);
  double n2 = coefficient * coefficient;
  if (i % 2 == 1) return n2 * pw / (2 * i + 1);
  return static_cast<double>(i * i) * n2 * pw / ((2 * i + 1) * (i + 1.0) * (i + 1.0));
}

ActionJet action_jet(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                     int t) {
  ActionJet j;
  double r = wrap_angle(r0), p = wrap_angle(p0);
  double dr = 0.0, dp = 1.0, d2r = 0.0, d2p = 0.0;
  double er = 1.0, ep = 0.0;
  for (int n = 0; n < t; ++n) {
    double f1 = map.force_slope(r);
    double f2 = map.force_curvature(r);
    p = wrap_angle(p + map.force(r));
    d2p += f2 * dr * dr + f1 * d2r;
    dp += f1 * dr;
    ep += f1 * er;
    r = wrap_angle(r + p);
    dr += dp;
    d2r += d2p;
    er += ep;
    double v1 = pert.slope(r);
    j.s += pert.value(r);
    j.kp += v1 * dr;
    j.kpp += pert.curvature(r) * dr * dr + v1 * d2r;
  }
  j.drt_dp0 = dr;
  j.drt_dr0 = er;
  return j;
}

ActionJet action_jet1(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                      int t) {
  ActionJet j;
  double r = wrap_angle(r0), p = wrap_angle(p0);
  double dr = 0.0, dp = 1.0, er = 1.0, ep = 0.0;
  for (int n = 0; n < t; ++n) {
    double f1 = map.force_slope(r);
    p = wrap_angle(p + map.force(r));
    dp += f1 * dr;
    ep += f1 * er;
    r = wrap_angle(r + p);
    dr += dp;
    er += ep;
    j.s += pert.value(r);
    j.kp += pert.slope(r) * dr;
  }
  j.drt_dp0 = dr;
  j.drt_dr0 = er;
  return j;
}

double action_sum(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                  int t) {
  double r = wrap_angle(r0), p = wrap_angle(p0), s = 0.0;
  for (int n = 0; n < t; ++n) {
    p = wrap_angle(p + map.force(r));
    r = wrap_angle(r + p);
    s += pert.value(r);
  }
  return s;
}

double delta_action(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                    int t) {
  if (t < 0) throw ConfigError("delta_action: t must be >= 0");
  return pert.epsilon * action_sum(map, pert, p0, r0, t);
}

bool stencil_crosses_cut(const MapSpec& map, const PerturbationSpec& pert, double p0,
                         double r0, int t, double h) {
  if (!map.has_branch_cut() && !pert.cut_sensitive()) return false;
  PhasePoint a{wrap_angle(r0), wrap_angle(p0 - h)};
  PhasePoint b{wrap_angle(r0), wrap_angle(p0 + h)};
  for (int n = 0; n < t; ++n) {
    a = step(map, a);
    b = step(map, b);
    if (std::abs(a.r - b.r) > kPi) return true;
  }
  return false;
}

FlaggedValue slope_kp(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                      int t) {
  return {action_jet1(map, pert, p0, r0, t).kp, stencil_crosses_cut(map, pert, p0, r0, t)};
}

FlaggedValue second_derivative(const MapSpec& map, const PerturbationSpec& pert, double p0,
                               double r0, int t) {
  return {pert.epsilon * action_jet(map, pert, p0, r0, t).kpp,
          stencil_crosses_cut(map, pert, p0, r0, t)};
}

double dps_dr0(const MapSpec& map, double p0, double r0, int t, double tol) {
  Monodromy m = monodromy(map, {wrap_angle(r0), wrap_angle(p0)}, t);
  double a = m.m.dr_dp0();
  double b = m.m.dr_dr0();
  if (std::abs(a) < tol * std::max(std::abs(a), std::abs(b)))
    throw CausticError("dps_dr0: dr_t/dp0 vanishes (conjugate point)");
  return -b / a;
}

double growth_rate_estimate(const MapSpec& map) {
  if (map.kind == MapKind::sawtooth) return lyapunov_closed_form(map.K);
  return std::max(1.0, std::log(map.K / 2.0));
}

namespace {

bool bracket_crosses_cut(const MapSpec& map, const PerturbationSpec& pert, double a, double b,
                         double r0, int t) {
  double mid = 0.5 * (a + b);
  return stencil_crosses_cut(map, pert, mid, r0, t, 0.5 * (b - a));
}

}  // namespace

std::vector<StationaryPoint> find_stationary_points(const MapSpec& map,
                                                    const PerturbationSpec& pert, double r0,
                                                    int t, double p_lo, double p_hi,
                                                    const RootSearchOptions& opt) {
  if (!(p_hi > p_lo)) throw ConfigError("find_stationary_points: empty window");
  std::vector<StationaryPoint> out;
  if (t < 1) return out;
  double lam = growth_rate_estimate(map);
  double want = opt.min_points_per_2pi * std::exp(lam * t) * (p_hi - p_lo) / kTwoPi;
  std::int64_t n = static_cast<std::int64_t>(std::ceil(want));
  n = std::clamp<std::int64_t>(n, 256, opt.max_grid);
  double h = (p_hi - p_lo) / static_cast<double>(n);
  std::vector<double> kp(static_cast<size_t>(n) + 1);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k <= n; ++k)
    kp[static_cast<size_t>(k)] = action_jet1(map, pert, p_lo + h * k, r0, t).kp;
  double scale = 0.0;
  for (double v : kp) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return out;
  double ds2_tol = 1e-8 * std::abs(pert.epsilon) * std::exp(2.0 * lam * t);
  for (std::int64_t k = 0; k < n; ++k) {
    double fa = kp[static_cast<size_t>(k)];
    double fb = kp[static_cast<size_t>(k) + 1];
    double a = p_lo + h * k, b = p_lo + h * (k + 1);
    double root;
    if (fa == 0.0) {
      root = a;
    } else if (fa * fb > 0.0 || fb == 0.0) {
      continue;
    } else {
      for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
        double m = 0.5 * (a + b);
        double fm = action_jet1(map, pert, m, r0, t).kp;
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      root = 0.5 * (a + b);
      if (bracket_crosses_cut(map, pert, a, std::max(b, a + 1e-13), r0, t)) continue;
    }
    ActionJet j = action_jet(map, pert, root, r0, t);
    if (std::abs(j.kp) > opt.rel_tol * scale) continue;
    StationaryPoint sp;
    sp.p0 = root;
    sp.ds = pert.epsilon * j.s;
    sp.ds2 = pert.epsilon * j.kpp;
    sp.degenerate = std::abs(sp.ds2) < ds2_tol;
    out.push_back(sp);
  }
  return out;
}

McEstimate autocorrelation(const MapSpec& map, const PerturbationSpec& pert, int l,
                           std::int64_t samples, std::uint64_t seed) {
  if (l < 0) throw ConfigError("autocorrelation: l must be >= 0");
  if (samples < 2) throw ConfigError("autocorrelation: need >= 2 samples");
  std::vector<double> v0(static_cast<size_t>(samples)), vl(static_cast<size_t>(samples));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < samples; ++i) {
    PhasePoint x = sample_phase_point(seed, static_cast<std::uint64_t>(i));
    v0[static_cast<size_t>(i)] = pert.value(x.r);
    for (int n = 0; n < l; ++n) x = step(map, x);
    vl[static_cast<size_t>(i)] = pert.value(x.r);
  }
  double mu = 0.0;
  for (std::int64_t i = 0; i < samples; ++i)
    mu += v0[static_cast<size_t>(i)] + vl[static_cast<size_t>(i)];
  mu /= 2.0 * static_cast<double>(samples);
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    double y = (v0[static_cast<size_t>(i)] - mu) * (vl[static_cast<size_t>(i)] - mu);
    sum += y;
    sum2 += y * y;
  }
  double n = static_cast<double>(samples);
  McEstimate e;
  e.samples = samples;
  e.value = sum / n;
  e.stderr_ = std::sqrt(std::max(0.0, sum2 / n - e.value * e.value) / (n - 1.0));
  return e;
}

McEstimate diffusion_constant(const MapSpec& map, const PerturbationSpec& pert, int l_max,
                              std::int64_t samples, std::uint64_t seed) {
  if (l_max < 0) throw ConfigError("diffusion_constant: l_max must be >= 0");
  if (samples < 2) throw ConfigError("diffusion_constant: need >= 2 samples");
  std::vector<double> vsum(static_cast<size_t>(samples));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < samples; ++i) {
    PhasePoint x = sample_phase_point(seed, static_cast<std::uint64_t>(i));
    double s = pert.value(x.r);
    for (int n = 0; n < l_max; ++n) {
      x = step(map, x);
      s += pert.value(x.r);
    }
    vsum[static_cast<size_t>(i)] = s;
  }
  double mu = 0.0;
  for (double v : vsum) mu += v;
  mu /= static_cast<double>(samples) * (l_max + 1);
  std::vector<double> y(static_cast<size_t>(samples));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < samples; ++i) {
    PhasePoint x = sample_phase_point(seed, static_cast<std::uint64_t>(i));
    double c0 = pert.value(x.r) - mu;
    double acc = 0.5 * c0 * c0;
    for (int n = 0; n < l_max; ++n) {
      x = step(map, x);
      acc += c0 * (pert.value(x.r) - mu);
    }
    y[static_cast<size_t>(i)] = acc;
  }
  double sum = 0.0, sum2 = 0.0;
  for (double v : y) {
    sum += v;
    sum2 += v * v;
  }
  double n = static_cast<double>(samples);
  McEstimate e;
  e.samples = samples;
  e.value = sum / n;
  e.stderr_ = std::sqrt(std::max(0.0, sum2 / n - e.value * e.value) / (n - 1.0));
  return e;
}

std::vector<double> action_samples(const MapSpec& map, const PerturbationSpec& pert, int t,
                                   std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("action_samples: n must be >= 1");
  std::vector<double> out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    PhasePoint x = sample_phase_point(seed, static_cast<std::uint64_t>(i));
    out[static_cast<size_t>(i)] = pert.epsilon * action_sum(map, pert, x.p, x.r, t);
  }
  return out;
}

ActionCurve action_curve(const MapSpec& map, const PerturbationSpec& pert, double r0, int t,
                         std::int64_t points, double p_lo, double p_hi) {
  if (points < 2) throw ConfigError("action_curve: need >= 2 points");
  ActionCurve c;
  c.r0 = r0;
  c.t = t;
  double h = (p_hi - p_lo) / static_cast<double>(points);
  for (std::int64_t k = 0; k < points; ++k) {
    double p0 = p_lo + h * k;
    c.p0.push_back(p0);
    c.ds_over_eps.push_back(action_sum(map, pert, p0, r0, t));
  }
  return c;
}

}  // namespace lecho
