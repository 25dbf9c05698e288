#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "lecho/action_functional.hpp"
#include "lecho/torus_quantum.hpp"

namespace lecho {

struct QuadratureSettings {
  double span_multiplier = 6.0;
  double points_per_oscillation = 8.0;
  std::int64_t min_points = 4096;
  std::int64_t coarse_points = 2048;
  std::int64_t max_points = std::int64_t(1) << 24;
};

/// Window data at one p0: D and w_p = (hbar/xi) D.
struct ScWindow {
  double D = 1.0;
  double w_p = 0.0;
};

/// D from the caustic-regular form sqrt(a^2 + b^2/kappa^2)/|a|, a = dr_t/dp0, b = dr_t/dr0.
ScWindow sc_window(const MapSpec& map, double hbar, const GaussianPacketSpec& packet, double p0,
                   int t);

cplx m_sc1(const QuantumDims& dims, const MapSpec& map, const PerturbationSpec& pert,
           const GaussianPacketSpec& packet, int t, const QuadratureSettings& q = {});
cplx m_sc2(const QuantumDims& dims, const MapSpec& map, const PerturbationSpec& pert,
           const GaussianPacketSpec& packet, int t, const QuadratureSettings& q = {});
/// (1/2pi) integral over the full momentum torus of exp(i Delta S / hbar).
cplx m_point(const QuantumDims& dims, const MapSpec& map, const PerturbationSpec& pert,
             double r0, int t, const QuadratureSettings& q = {});

/// exp(-(sigma w_p k_p)^2 / 2).
double short_time_M(double kp, double w_p, double sigma);

struct TimeEstimate {
  double value = 0.0;
  /// Formula fell below one kick: the linear-phase window is already gone at t = 1.
  bool below_first_kick = false;
};

TimeEstimate tau1_estimate(double Lambda, double dp0_1, double a1, double b_bar, double w_p);
TimeEstimate tau1_estimate(const std::function<double(double)>& Lambda_of_t, double dp0_1,
                           double a1, double b_bar, double w_p);
double tau2_estimate(double Lambda, double c0, double w_p);
double tau2_estimate(const std::function<double(double)>& Lambda_of_t, double c0, double w_p);

/// Largest half-width a around p0c such that Delta S(t = 1) stays within `frac` of its
/// full-torus range from the chord over [p0c - a, p0c + a].
double first_kick_linear_width(const MapSpec& map, const PerturbationSpec& pert, double r0c,
                               double p0c, double frac = 0.1);

cplx stationary_phase_m(const QuantumDims& dims, const MapSpec& map,
                        const std::vector<StationaryPoint>& points,
                        const GaussianPacketSpec& packet, int t, double degeneracy_tol = 0.0);
double diagonal_M(const QuantumDims& dims, const MapSpec& map,
                  const std::vector<StationaryPoint>& points, const GaussianPacketSpec& packet,
                  int t);

/// exp(-Lambda_1(t) t) for t = 0..t_max.
std::vector<double> lambda1_decay_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                        std::uint64_t seed);
/// exp(-Lambda(t) t) for t = 0..t_max.
std::vector<double> lambda_decay_curve(const MapSpec& map, int t_max, std::int64_t ensemble,
                                       std::uint64_t seed);

double fgr_M(double K_E, double sigma, double t);
double perturbative_M(double K_E, double sigma, double t, int N);
double perturbative_border(double K_E, int N);

double mean_value_M(const std::vector<double>& action_samples, double hbar);

struct AppendixEstimate {
  double M_p = 0.0;
  double N_X = 0.0;
  /// |sum_j X_j|^2 / (2 pi sigma)^2, the non-diagonal piecewise-linear value.
  double M_full = 0.0;
};

/// Piecewise-linear chords of Delta S/hbar over p0 in [0, 2pi) with chord deviation below
/// chord_tol (radians of phase); averaged over the listed r0 values.
AppendixEstimate appendix_sigma_scaling(const MapSpec& map, const PerturbationSpec& pert,
                                        const std::vector<double>& r0s, int t,
                                        double chord_tol = 0.5, std::int64_t grid = 0);

/// Same segmentation on an explicit phase function sampled on a uniform p0 grid.
AppendixEstimate appendix_from_phase(const std::vector<double>& p0,
                                     const std::vector<double>& phase, double sigma,
                                     double chord_tol);

}  // namespace lecho
