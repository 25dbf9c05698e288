#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lecho/common.hpp"

namespace lecho {

/// A point (r, p) on the 2-torus, both in [0, 2pi).
struct PhasePoint {
  double r = 0.0;
  double p = 0.0;
};

enum class MapKind { standard, sawtooth };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& s);

/// Kicked map with strength K. Standard: V = K cos r. Sawtooth: V = -K (r - pi)^2 / 2.
struct MapSpec {
  MapKind kind = MapKind::sawtooth;
  double K = 1.0;

  static MapSpec standard(double K);
  static MapSpec sawtooth(double K);
  void validate() const;

  /// Kick potential V(r).
  double potential(double r) const;
  /// Force F(r) = -V'(r); p' = p + F(r).
  double force(double r) const;
  double force_slope(double r) const;
  double force_curvature(double r) const;
  /// True when the sawtooth force has a jump at r = 0 that the torus sees.
  bool has_branch_cut() const { return kind == MapKind::sawtooth; }
};

/// Jacobian in (dp, dr) ordering: [dp'; dr'] = [[pp, pr], [rp, rr]] [dp; dr].
struct TangentMatrix {
  double pp = 1.0, pr = 0.0, rp = 0.0, rr = 1.0;

  double det() const { return pp * rr - pr * rp; }
  /// dr_t / dp0 and dr_t / dr0.
  double dr_dp0() const { return rp; }
  double dr_dr0() const { return rr; }
  TangentMatrix operator*(const TangentMatrix& b) const;
};

PhasePoint step(const MapSpec& map, PhasePoint x);
/// Exact inverse of step.
PhasePoint step_back(const MapSpec& map, PhasePoint x);
TangentMatrix tangent_step(const MapSpec& map, PhasePoint x);
std::vector<PhasePoint> evolve(const MapSpec& map, PhasePoint x0, int t);

/// t-fold Jacobian product. `scale` holds a log factor pulled out of the
/// entries to avoid overflow: true entries = m * exp(log_scale).
/// log_det is ln|det| accumulated through a running QR factorization.
struct Monodromy {
  TangentMatrix m;
  double log_scale = 0.0;
  double log_det = 0.0;
  double det_sign = 1.0;

  double det() const;
  TangentMatrix unscaled() const;
};

Monodromy monodromy(const MapSpec& map, PhasePoint x0, int t);

/// ln((2 + K + sqrt((2 + K)^2 - 4)) / 2), sawtooth only.
double lyapunov_closed_form(double K);

struct StretchStats {
  int t = 0;
  double lambda_t = 0.0;
  double lambda1_t = 0.0;
  std::int64_t ensemble_size = 0;
  std::uint64_t seed = 0;
};

/// Uniform phase-space point for ensemble member `member`.
PhasePoint sample_phase_point(std::uint64_t seed, std::uint64_t member);

/// ln of the stretch factor g = |M_t v| / |v| for the tangent vector v at x0.
/// v is (1, 0) in (dp, dr) pre-aligned by `align_steps` kicks of backward
/// history so that it already lies along the local unstable direction.
double log_stretch(const MapSpec& map, PhasePoint x0, int t, int align_steps = 24);

/// Running ln g for t = 1..t_max along one orbit (element k is for t = k + 1).
std::vector<double> log_stretch_series(const MapSpec& map, PhasePoint x0, int t_max,
                                       int align_steps = 24);

StretchStats stretch_stats(const MapSpec& map, int t, std::int64_t ensemble, std::uint64_t seed);
StretchStats finite_time_lambda(const MapSpec& map, int t, std::int64_t ensemble,
                                std::uint64_t seed);
StretchStats finite_time_lambda1(const MapSpec& map, int t, std::int64_t ensemble,
                                 std::uint64_t seed);
/// Both exponents for every t = 1..t_max from one pass over the ensemble.
std::vector<StretchStats> stretch_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                        std::uint64_t seed);
/// Same statistics from explicit stretch samples, ln g_i at a single t.
StretchStats stretch_stats_from_logs(const std::vector<double>& log_g, int t);

}  // namespace lecho
