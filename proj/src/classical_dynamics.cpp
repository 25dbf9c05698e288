#include "lecho/classical_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace lecho {

std::string to_string(MapKind kind) {
  return kind == MapKind::standard ? "standard" : "sawtooth";
}

MapKind map_kind_from_string(const std::string& s) {
  if (s == "standard" || s == "rotator" || s == "kicked_rotator") return MapKind::standard;
  if (s == "sawtooth") return MapKind::sawtooth;
  throw ConfigError("unknown map kind: " + s);
}

MapSpec MapSpec::standard(double K) {
  MapSpec m{MapKind::standard, K};
  m.validate();
  return m;
}

MapSpec MapSpec::sawtooth(double K) {
  MapSpec m{MapKind::sawtooth, K};
  m.validate();
  return m;
}

void MapSpec::validate() const {
  if (!std::isfinite(K) || K <= 0.0) throw ConfigError("map strength K must be finite and > 0");
}

double MapSpec::potential(double r) const {
  if (kind == MapKind::standard) return K * std::cos(r);
  double d = r - kPi;
  return -0.5 * K * d * d;
}

double MapSpec::force(double r) const {
  return kind == MapKind::standard ? K * std::sin(r) : K * (r - kPi);
}

double MapSpec::force_slope(double r) const {
  return kind == MapKind::standard ? K * std::cos(r) : K;
}

double MapSpec::force_curvature(double r) const {
  return kind == MapKind::standard ? -K * std::sin(r) : 0.0;
}

TangentMatrix TangentMatrix::operator*(const TangentMatrix& b) const {
  return {pp * b.pp + pr * b.rp, pp * b.pr + pr * b.rr, rp * b.pp + rr * b.rp,
          rp * b.pr + rr * b.rr};
}

PhasePoint step(const MapSpec& map, PhasePoint x) {
  double p = wrap_angle(x.p + map.force(x.r));
  double r = wrap_angle(x.r + p);
  return {r, p};
}

PhasePoint step_back(const MapSpec& map, PhasePoint x) {
  double r = wrap_angle(x.r - x.p);
  double p = wrap_angle(x.p - map.force(r));
  return {r, p};
}

TangentMatrix tangent_step(const MapSpec& map, PhasePoint x) {
  double f = map.force_slope(x.r);
  return {1.0, f, 1.0, 1.0 + f};
}

std::vector<PhasePoint> evolve(const MapSpec& map, PhasePoint x0, int t) {
  if (t < 0) throw ConfigError("evolve: t must be >= 0");
  std::vector<PhasePoint> out;
  out.reserve(static_cast<size_t>(t) + 1);
  out.push_back(x0);
  for (int n = 0; n < t; ++n) out.push_back(step(map, out.back()));
  return out;
}

double Monodromy::det() const { return det_sign * std::exp(log_det); }

TangentMatrix Monodromy::unscaled() const {
  double s = std::exp(log_scale);
  return {m.pp * s, m.pr * s, m.rp * s, m.rr * s};
}

Monodromy monodromy(const MapSpec& map, PhasePoint x0, int t) {
  if (t < 1) throw ConfigError("monodromy: t must be >= 1");
  Monodromy out;
  // Q kept as its first column (c, s); second column is (-s, c).
  double qc = 1.0, qs = 0.0;
  PhasePoint x = x0;
  for (int n = 0; n < t; ++n) {
    TangentMatrix j = tangent_step(map, x);
    out.m = j * out.m;
    double big = std::max({std::abs(out.m.pp), std::abs(out.m.pr), std::abs(out.m.rp),
                           std::abs(out.m.rr)});
    if (big > 1e64) {
      out.m = {out.m.pp / big, out.m.pr / big, out.m.rp / big, out.m.rr / big};
      out.log_scale += std::log(big);
    }
    double a1p = j.pp * qc + j.pr * qs;
    double a1r = j.rp * qc + j.rr * qs;
    double a2p = -j.pp * qs + j.pr * qc;
    double a2r = -j.rp * qs + j.rr * qc;
    double r11 = std::hypot(a1p, a1r);
    qc = a1p / r11;
    qs = a1r / r11;
    double r22 = -qs * a2p + qc * a2r;
    out.log_det += std::log(r11) + std::log(std::abs(r22));
    if (r22 < 0.0) out.det_sign = -out.det_sign;
    x = step(map, x);
  }
  return out;
}

double lyapunov_closed_form(double K) {
  if (!(K > 0.0) || !std::isfinite(K)) throw ConfigError("lyapunov_closed_form: K must be > 0");
  double a = 2.0 + K;
  return std::log((a + std::sqrt(a * a - 4.0)) / 2.0);
}

PhasePoint sample_phase_point(std::uint64_t seed, std::uint64_t member) {
  MemberRng rng(seed, member);
  double r = rng.uniform(0.0, kTwoPi);
  double p = rng.uniform(0.0, kTwoPi);
  return {wrap_angle(r), wrap_angle(p)};
}

namespace {

// Unit tangent vector at x0 carried from `align_steps` kicks in the past.
void aligned_vector(const MapSpec& map, PhasePoint x0, int align_steps, double& vp,
                    double& vr) {
  std::vector<PhasePoint> back(static_cast<size_t>(align_steps));
  PhasePoint y = x0;
  for (int k = 0; k < align_steps; ++k) {
    y = step_back(map, y);
    back[static_cast<size_t>(k)] = y;
  }
  vp = 1.0;
  vr = 0.0;
  for (int k = align_steps - 1; k >= 0; --k) {
    TangentMatrix j = tangent_step(map, back[static_cast<size_t>(k)]);
    double np = j.pp * vp + j.pr * vr;
    double nr = j.rp * vp + j.rr * vr;
    double norm = std::hypot(np, nr);
    vp = np / norm;
    vr = nr / norm;
  }
}

}  // namespace

std::vector<double> log_stretch_series(const MapSpec& map, PhasePoint x0, int t_max,
                                       int align_steps) {
  if (t_max < 1) throw ConfigError("stretch: t must be >= 1");
  double vp, vr;
  aligned_vector(map, x0, align_steps, vp, vr);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(t_max));
  double acc = 0.0;
  PhasePoint x = x0;
  for (int n = 0; n < t_max; ++n) {
    TangentMatrix j = tangent_step(map, x);
    double np = j.pp * vp + j.pr * vr;
    double nr = j.rp * vp + j.rr * vr;
    double norm = std::hypot(np, nr);
    acc += std::log(norm);
    vp = np / norm;
    vr = nr / norm;
    out.push_back(acc);
    x = step(map, x);
  }
  return out;
}

double log_stretch(const MapSpec& map, PhasePoint x0, int t, int align_steps) {
  return log_stretch_series(map, x0, t, align_steps).back();
}

StretchStats stretch_stats_from_logs(const std::vector<double>& log_g, int t) {
  StretchStats s;
  s.t = t;
  s.ensemble_size = static_cast<std::int64_t>(log_g.size());
  if (log_g.empty()) return s;
  double sum = 0.0;
  double lo = log_g.front();
  for (double v : log_g) {
    sum += v;
    lo = std::min(lo, v);
  }
  double inv = 0.0;
  for (double v : log_g) inv += std::exp(-(v - lo));
  double n = static_cast<double>(log_g.size());
  s.lambda_t = sum / n / t;
  // -ln mean(1/g) = lo - ln(mean(exp(-(ln g - lo))))
  s.lambda1_t = (lo - std::log(inv / n)) / t;
  return s;
}

std::vector<StretchStats> stretch_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                        std::uint64_t seed) {
  if (ensemble < 1) throw ConfigError("stretch: ensemble must be >= 1");
  if (t_max < 1) throw ConfigError("stretch: t must be >= 1");
  std::vector<std::vector<double>> per(static_cast<size_t>(ensemble));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < ensemble; ++i) {
    per[static_cast<size_t>(i)] =
        log_stretch_series(map, sample_phase_point(seed, static_cast<std::uint64_t>(i)), t_max);
  }
  std::vector<StretchStats> out;
  std::vector<double> col(static_cast<size_t>(ensemble));
  for (int t = 1; t <= t_max; ++t) {
    for (std::int64_t i = 0; i < ensemble; ++i)
      col[static_cast<size_t>(i)] = per[static_cast<size_t>(i)][static_cast<size_t>(t - 1)];
    StretchStats s = stretch_stats_from_logs(col, t);
    s.seed = seed;
    out.push_back(s);
  }
  return out;
}

StretchStats stretch_stats(const MapSpec& map, int t, std::int64_t ensemble,
                           std::uint64_t seed) {
  return stretch_curve(map, t, ensemble, seed).back();
}

StretchStats finite_time_lambda(const MapSpec& map, int t, std::int64_t ensemble,
                                std::uint64_t seed) {
  return stretch_stats(map, t, ensemble, seed);
}

StretchStats finite_time_lambda1(const MapSpec& map, int t, std::int64_t ensemble,
                                 std::uint64_t seed) {
  return stretch_stats(map, t, ensemble, seed);
}

}  // namespace lecho
