#include "lecho/semiclassical_fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lecho {

namespace {

constexpr cplx kI(0.0, 1.0);

struct Grid {
  double lo = 0.0;
  double h = 0.0;
  std::int64_t n = 0;
};

double max_abs_kp(const MapSpec& map, const PerturbationSpec& pert, double r0, int t, double lo,
                  double hi, std::int64_t points) {
  double h = (hi - lo) / static_cast<double>(points);
  double best = 0.0;
  for (std::int64_t k = 0; k <= points; ++k)
    best = std::max(best, std::abs(action_jet1(map, pert, lo + h * k, r0, t).kp));
  return best;
}

// Uniform grid over [lo, hi) dense enough that sigma * |k_p| * h stays below pi/4.
Grid plan_grid(const MapSpec& map, const PerturbationSpec& pert, double r0, int t, double lo,
               double hi, const QuadratureSettings& q) {
  double width = hi - lo;
  double kmax = max_abs_kp(map, pert, r0, t, lo, hi, q.coarse_points);
  double osc = std::abs(pert.sigma()) * kmax * width / kTwoPi;
  double want = std::ceil(1.25 * q.points_per_oscillation * osc);
  if (want > static_cast<double>(q.max_points))
    throw QuadratureUnresolved("quadrature needs more than max_points grid points");
  Grid g;
  g.lo = lo;
  g.n = std::max<std::int64_t>(q.min_points, static_cast<std::int64_t>(want));
  g.h = width / static_cast<double>(g.n);
  return g;
}

// Returns false after refining g when the sampled slopes show the grid was too coarse.
bool resolved(double sigma, const std::vector<double>& kps, Grid& g, double width,
              const QuadratureSettings& q) {
  double worst = 0.0;
  for (double kp : kps) worst = std::max(worst, std::abs(sigma * kp) * g.h);
  if (worst <= kPi / 4.0) return true;
  double want = std::ceil(1.25 * static_cast<double>(g.n) * worst / (kPi / 4.0));
  if (want > static_cast<double>(q.max_points))
    throw QuadratureUnresolved("phase change per quadrature step exceeds pi/4");
  g.n = static_cast<std::int64_t>(want);
  g.h = width / static_cast<double>(g.n);
  return false;
}

cplx packet_quadrature(const MapSpec& map, const PerturbationSpec& pert,
                       const GaussianPacketSpec& packet, int t, bool second_order,
                       const QuadratureSettings& q) {
  const double hbar = pert.hbar;
  const double sigma = pert.sigma();
  const double w0 = hbar / packet.xi;
  const double kappa = hbar / (packet.xi * packet.xi);
  double wc = w0;
  if (second_order) wc = sc_window(map, hbar, packet, packet.p0, t).w_p;
  double half = q.span_multiplier * wc;
  if (half > kPi) half = kPi;
  const double lo = packet.p0 - half, hi = packet.p0 + half;
  Grid g = plan_grid(map, pert, packet.r0, t, lo, hi, q);
  std::vector<cplx> f;
  std::vector<double> kps;
  do {
    f.assign(static_cast<size_t>(g.n) + 1, cplx(0.0));
    kps.assign(static_cast<size_t>(g.n) + 1, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k <= g.n; ++k) {
      double p0 = g.lo + g.h * k;
      ActionJet j = action_jet1(map, pert, p0, packet.r0, t);
      kps[static_cast<size_t>(k)] = j.kp;
      double w = w0;
      if (second_order && t > 0) {
        double a = j.drt_dp0, b = j.drt_dr0;
        double D = std::sqrt(a * a + b * b / (kappa * kappa)) / std::abs(a);
        if (!std::isfinite(D)) D = std::numeric_limits<double>::infinity();
        w = w0 * D;
      }
      double d = p0 - packet.p0;
      double amp = std::isfinite(w) ? std::exp(-d * d / (w * w)) / (std::sqrt(kPi) * w) : 0.0;
      f[static_cast<size_t>(k)] = std::polar(amp, std::fmod(sigma * j.s, kTwoPi));
    }
  } while (!resolved(sigma, kps, g, hi - lo, q));
  // Trapezoid; on the full torus the end points coincide.
  cplx acc = 0.0;
  bool periodic = (hi - lo) >= kTwoPi - 1e-12;
  for (std::int64_t k = 0; k <= g.n; ++k) {
    double wgt = (k == 0 || k == g.n) ? (periodic ? (k == 0 ? 1.0 : 0.0) : 0.5) : 1.0;
    acc += wgt * f[static_cast<size_t>(k)];
  }
  return acc * g.h;
}

}  // namespace

ScWindow sc_window(const MapSpec& map, double hbar, const GaussianPacketSpec& packet, double p0,
                   int t) {
  ScWindow w;
  double w0 = hbar / packet.xi;
  if (t < 1) {
    w.w_p = w0;
    return w;
  }
  double kappa = hbar / (packet.xi * packet.xi);
  Monodromy m = monodromy(map, {wrap_angle(packet.r0), wrap_angle(p0)}, t);
  double a = m.m.dr_dp0(), b = m.m.dr_dr0();
  w.D = std::sqrt(a * a + b * b / (kappa * kappa)) / std::abs(a);
  w.w_p = w0 * w.D;
  return w;
}

cplx m_sc1(const QuantumDims&, const MapSpec& map, const PerturbationSpec& pert,
           const GaussianPacketSpec& packet, int t, const QuadratureSettings& q) {
  if (t < 0) throw ConfigError("t must be >= 0");
  return packet_quadrature(map, pert, packet, t, false, q);
}

cplx m_sc2(const QuantumDims&, const MapSpec& map, const PerturbationSpec& pert,
           const GaussianPacketSpec& packet, int t, const QuadratureSettings& q) {
  if (t < 0) throw ConfigError("t must be >= 0");
  return packet_quadrature(map, pert, packet, t, true, q);
}

cplx m_point(const QuantumDims&, const MapSpec& map, const PerturbationSpec& pert, double r0,
             int t, const QuadratureSettings& q) {
  if (t < 0) throw ConfigError("t must be >= 0");
  if (t == 0) return 1.0;
  const double sigma = pert.sigma();
  Grid g = plan_grid(map, pert, r0, t, 0.0, kTwoPi, q);
  std::vector<cplx> f;
  std::vector<double> kps;
  do {
    f.assign(static_cast<size_t>(g.n), cplx(0.0));
    kps.assign(static_cast<size_t>(g.n), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < g.n; ++k) {
      ActionJet j = action_jet1(map, pert, g.h * k, r0, t);
      kps[static_cast<size_t>(k)] = j.kp;
      f[static_cast<size_t>(k)] = std::polar(1.0, std::fmod(sigma * j.s, kTwoPi));
    }
  } while (!resolved(sigma, kps, g, kTwoPi, q));
  cplx acc = 0.0;
  for (const cplx& v : f) acc += v;
  return acc / static_cast<double>(g.n);
}

double short_time_M(double kp, double w_p, double sigma) {
  double x = sigma * w_p * kp;
  return std::exp(-0.5 * x * x);
}

TimeEstimate tau1_estimate(double Lambda, double dp0_1, double a1, double b_bar, double w_p) {
  return tau1_estimate([Lambda](double) { return Lambda; }, dp0_1, a1, b_bar, w_p);
}

TimeEstimate tau1_estimate(const std::function<double(double)>& Lambda_of_t, double dp0_1,
                           double a1, double b_bar, double w_p) {
  if (!(dp0_1 > 0.0 && a1 > 0.0 && b_bar > 0.0 && w_p > 0.0))
    throw ConfigError("tau1_estimate: inputs must be positive");
  const double ratio = std::log(b_bar * dp0_1 / (a1 * w_p));
  double tau = 1.0;
  for (int it = 0; it < 200; ++it) {
    double lam = Lambda_of_t(std::max(1.0, tau));
    if (!(lam > 0.0)) throw ConfigError("tau1_estimate: Lambda must be > 0");
    double next = 1.0 + ratio / lam;
    if (std::abs(next - tau) < 1e-13) {
      tau = next;
      break;
    }
    tau = next;
  }
  TimeEstimate e;
  e.below_first_kick = tau < 1.0;
  e.value = std::max(0.0, tau);
  return e;
}

double tau2_estimate(double Lambda, double c0, double w_p) {
  return tau2_estimate([Lambda](double) { return Lambda; }, c0, w_p);
}

double tau2_estimate(const std::function<double(double)>& Lambda_of_t, double c0, double w_p) {
  if (!(c0 > 0.0 && w_p > 0.0)) throw ConfigError("tau2_estimate: inputs must be positive");
  if (c0 * w_p >= kPi) throw ConfigError("tau2_estimate: c0 * w_p must be < pi");
  const double num = std::log(kPi / (c0 * w_p));
  double tau = 1.0;
  for (int it = 0; it < 200; ++it) {
    double lam = Lambda_of_t(std::max(1.0, tau));
    if (!(lam > 0.0)) throw ConfigError("tau2_estimate: Lambda must be > 0");
    double next = num / lam;
    if (std::abs(next - tau) < 1e-13) {
      tau = next;
      break;
    }
    tau = next;
  }
  return tau;
}

double first_kick_linear_width(const MapSpec& map, const PerturbationSpec& pert, double r0c,
                               double p0c, double frac) {
  const int n_full = 4096;
  double smin = 1e300, smax = -1e300;
  for (int k = 0; k < n_full; ++k) {
    double s = action_sum(map, pert, kTwoPi * k / n_full, r0c, 1);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  const double tol = frac * (smax - smin);
  if (!(tol > 0.0)) return kPi;
  const int steps = 2048;
  const int inner = 512;
  double best = 0.0;
  for (int i = 1; i <= steps; ++i) {
    double a = kPi * i / steps;
    double sl = action_sum(map, pert, p0c - a, r0c, 1);
    double sr = action_sum(map, pert, p0c + a, r0c, 1);
    bool ok = true;
    for (int k = 1; k < inner && ok; ++k) {
      double u = static_cast<double>(k) / inner;
      double p = p0c - a + 2.0 * a * u;
      double chord = sl + (sr - sl) * u;
      if (std::abs(action_sum(map, pert, p, r0c, 1) - chord) >= tol) ok = false;
    }
    if (!ok) break;
    best = a;
  }
  return best;
}

cplx stationary_phase_m(const QuantumDims& dims, const MapSpec& map,
                        const std::vector<StationaryPoint>& points,
                        const GaussianPacketSpec& packet, int t, double degeneracy_tol) {
  const double hbar = dims.hbar();
  cplx acc = 0.0;
  for (const StationaryPoint& sp : points) {
    if (sp.degenerate || std::abs(sp.ds2) <= degeneracy_tol)
      throw DegenerateStationaryPoint("stationary point with vanishing second derivative");
    double w = sc_window(map, hbar, packet, sp.p0, t).w_p;
    double d = torus_delta(sp.p0, packet.p0);
    double amp = std::sqrt(2.0 * hbar) / (w * std::sqrt(std::abs(sp.ds2))) * std::exp(-d * d / (w * w));
    double phase = std::fmod(sp.ds / hbar, kTwoPi) + (sp.ds2 > 0 ? 1.0 : -1.0) * kPi / 4.0;
    acc += std::polar(amp, phase);
  }
  return acc;
}

double diagonal_M(const QuantumDims& dims, const MapSpec& map,
                  const std::vector<StationaryPoint>& points, const GaussianPacketSpec& packet,
                  int t) {
  const double hbar = dims.hbar();
  double acc = 0.0;
  for (const StationaryPoint& sp : points) {
    if (sp.ds2 == 0.0) continue;
    double w = sc_window(map, hbar, packet, sp.p0, t).w_p;
    double d = torus_delta(sp.p0, packet.p0);
    acc += 2.0 * hbar / (w * w) * std::exp(-2.0 * d * d / (w * w)) / std::abs(sp.ds2);
  }
  return acc;
}

std::vector<double> lambda1_decay_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                        std::uint64_t seed) {
  std::vector<double> out{1.0};
  if (t_max < 1) return out;
  for (const StretchStats& s : stretch_curve(map, t_max, ensemble, seed))
    out.push_back(std::exp(-s.lambda1_t * s.t));
  return out;
}

std::vector<double> lambda_decay_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                       std::uint64_t seed) {
  std::vector<double> out{1.0};
  if (t_max < 1) return out;
  for (const StretchStats& s : stretch_curve(map, t_max, ensemble, seed))
    out.push_back(std::exp(-s.lambda_t * s.t));
  return out;
}

double fgr_M(double K_E, double sigma, double t) { return std::exp(-2.0 * sigma * sigma * K_E * t); }

double perturbative_M(double K_E, double sigma, double t, int N) {
  // 2g/beta = 2 and mean level density N/(2pi).
  double dbar = N / kTwoPi;
  return std::exp(-(2.0 * K_E / (kPi * dbar)) * sigma * sigma * t * t);
}

double perturbative_border(double K_E, int N) {
  if (N < 2) throw ConfigError("perturbative_border: N must be >= 2");
  return std::sqrt(std::log(static_cast<double>(N)) / (2.0 * K_E * N));
}

double mean_value_M(const std::vector<double>& samples, double hbar) {
  if (samples.empty()) throw ConfigError("mean_value_M: no samples");
  double re = 0.0, im = 0.0;
  for (double s : samples) {
    double ph = std::fmod(s / hbar, kTwoPi);
    re += std::cos(ph);
    im += std::sin(ph);
  }
  double n = static_cast<double>(samples.size());
  re /= n;
  im /= n;
  return re * re + im * im;
}

namespace {

double chord_deviation(const std::vector<double>& phase, size_t a, size_t b) {
  double fa = phase[a], fb = phase[b];
  double worst = 0.0;
  double len = static_cast<double>(b - a);
  for (size_t k = a + 1; k < b; ++k) {
    double chord = fa + (fb - fa) * static_cast<double>(k - a) / len;
    worst = std::max(worst, std::abs(phase[k] - chord));
  }
  return worst;
}

}  // namespace

AppendixEstimate appendix_from_phase(const std::vector<double>& p0,
                                     const std::vector<double>& phase, double sigma,
                                     double chord_tol) {
  if (p0.size() != phase.size() || p0.size() < 2)
    throw ConfigError("appendix: phase grid needs >= 2 matching points");
  if (!(sigma > 0.0)) throw ConfigError("appendix: sigma must be > 0");
  const size_t last = p0.size() - 1;
  double sum_sq = 0.0;
  cplx sum = 0.0;
  std::int64_t segments = 0;
  size_t a = 0;
  while (a < last) {
    // Gallop then bisect for the farthest end b with chord deviation below tol.
    size_t good = a + 1, step = 1;
    size_t bad = last + 1;
    while (true) {
      size_t b = std::min(a + step * 2, last);
      if (b == good) break;
      if (chord_deviation(phase, a, b) < chord_tol) {
        good = b;
        if (b == last) break;
        step *= 2;
      } else {
        bad = b;
        break;
      }
    }
    while (bad != last + 1 && bad - good > 1) {
      size_t mid = good + (bad - good) / 2;
      if (chord_deviation(phase, a, mid) < chord_tol)
        good = mid;
      else
        bad = mid;
    }
    size_t b = good;
    double L = p0[b] - p0[a];
    double dphi = phase[b] - phase[a];
    cplx head = std::polar(1.0, std::fmod(phase[a], kTwoPi));
    // X = e^{i phi_a} (e^{i dphi} - 1) / k with k = dphi / (sigma L).
    cplx x;
    if (std::abs(dphi) < 1e-8)
      x = head * kI * sigma * L;
    else
      x = head * (std::polar(1.0, dphi) - 1.0) * (sigma * L / dphi);
    sum_sq += std::norm(x);
    sum += x;
    ++segments;
    a = b;
  }
  double denom = (kTwoPi * sigma) * (kTwoPi * sigma);
  AppendixEstimate e;
  e.M_p = sum_sq / denom;
  e.M_full = std::norm(sum) / denom;
  e.N_X = static_cast<double>(segments);
  return e;
}

AppendixEstimate appendix_sigma_scaling(const MapSpec& map, const PerturbationSpec& pert,
                                        const std::vector<double>& r0s, int t, double chord_tol,
                                        std::int64_t grid) {
  if (r0s.empty()) throw ConfigError("appendix: need at least one r0");
  if (!(chord_tol > 0.0)) throw ConfigError("appendix: chord_tol must be > 0");
  const double sigma = pert.sigma();
  AppendixEstimate avg;
  for (double r0 : r0s) {
    std::int64_t n = grid;
    if (n <= 0) {
      double cmax = 0.0, kmax = 0.0;
      const int coarse = 4096;
      for (int k = 0; k < coarse; ++k) {
        ActionJet j = action_jet(map, pert, kTwoPi * k / coarse, r0, t);
        cmax = std::max(cmax, std::abs(j.kpp));
        kmax = std::max(kmax, std::abs(j.kp));
      }
      double seg = cmax > 0.0 ? std::sqrt(8.0 * chord_tol / (sigma * cmax)) : kTwoPi;
      double by_curv = 32.0 * kTwoPi / seg;
      double by_slope = 8.0 * sigma * kmax;
      n = static_cast<std::int64_t>(std::ceil(std::max({4096.0, by_curv, by_slope})));
    }
    std::vector<double> p(static_cast<size_t>(n) + 1), ph(static_cast<size_t>(n) + 1);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k <= n; ++k) {
      double p0 = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      p[static_cast<size_t>(k)] = p0;
      ph[static_cast<size_t>(k)] = sigma * action_sum(map, pert, p0, r0, t);
    }
    AppendixEstimate e = appendix_from_phase(p, ph, sigma, chord_tol);
    avg.M_p += e.M_p;
    avg.M_full += e.M_full;
    avg.N_X += e.N_X;
  }
  double m = static_cast<double>(r0s.size());
  avg.M_p /= m;
  avg.M_full /= m;
  avg.N_X /= m;
  return avg;
}

}  // namespace lecho
