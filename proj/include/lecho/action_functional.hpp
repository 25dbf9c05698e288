#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lecho/classical_dynamics.hpp"

namespace lecho {

enum class PerturbationFamily { cosine, monomial };

/// Perturbation eps * V(r). Cosine: V = cos r. Monomial i: V = -N_i (r - pi)^i.
/// sigma = eps / hbar, with the hbar stored alongside.
struct PerturbationSpec {
  PerturbationFamily family = PerturbationFamily::monomial;
  int order = 2;
  double coefficient = 0.5;
  double epsilon = 0.0;
  double hbar = 1.0;

  static PerturbationSpec cosine(double epsilon, double hbar);
  static PerturbationSpec monomial(int i, double epsilon, double hbar);
  static PerturbationSpec monomial(int i, double epsilon, double hbar, double coefficient);
  /// Same family with epsilon = sigma * hbar.
  PerturbationSpec with_sigma(double sigma) const;
  PerturbationSpec with_epsilon(double eps) const;

  double sigma() const { return epsilon / hbar; }
  void validate() const;
  std::string describe() const;

  double value(double r) const;
  double slope(double r) const;
  double curvature(double r) const;
  /// Trajectories through the r = 0 cut see a jump in V or its derivatives.
  bool cut_sensitive() const { return family == PerturbationFamily::monomial; }
};

double potential_value(const PerturbationSpec& pert, double r);

/// N_1..N_5 giving equal C(0) for all five monomial families.
std::array<double, 5> standard_coefficients();
double c0_closed_form(int i, double coefficient);

/// Derivative together with a flag raised when the finite stencil around p0
/// straddles a branch cut of the map or of V.
struct FlaggedValue {
  double value = 0.0;
  bool discontinuity = false;
};

/// Everything the semiclassical integrands need from one trajectory.
/// s = sum_{n=1..t} V(r(n)) (so Delta S = eps * s), kp = ds/dp0, kpp = d2s/dp0^2,
/// plus dr_t/dp0 and dr_t/dr0 from the tangent map.
struct ActionJet {
  double s = 0.0;
  double kp = 0.0;
  double kpp = 0.0;
  double drt_dp0 = 0.0;
  double drt_dr0 = 0.0;
};

ActionJet action_jet(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                     int t);
/// Only s, kp and drt_* (cheaper; no second-order tangent).
ActionJet action_jet1(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                      int t);
/// s alone.
double action_sum(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0, int t);

double delta_action(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                    int t);
FlaggedValue slope_kp(const MapSpec& map, const PerturbationSpec& pert, double p0, double r0,
                      int t);
/// d2(Delta S)/dp0^2 (includes the factor eps).
FlaggedValue second_derivative(const MapSpec& map, const PerturbationSpec& pert, double p0,
                               double r0, int t);
/// Finite-difference stencil check for branch cuts: trajectories from p0 - h and p0 + h.
bool stencil_crosses_cut(const MapSpec& map, const PerturbationSpec& pert, double p0,
                         double r0, int t, double h = 1e-7);

/// -(dr_t/dr0) / (dr_t/dp0). CausticError when |dr_t/dp0| < tol * scale.
double dps_dr0(const MapSpec& map, double p0, double r0, int t, double tol = 1e-12);

struct StationaryPoint {
  double p0 = 0.0;
  double ds = 0.0;
  double ds2 = 0.0;
  bool degenerate = false;
};

struct RootSearchOptions {
  double min_points_per_2pi = 64.0;
  std::int64_t max_grid = std::int64_t(1) << 22;
  double rel_tol = 1e-10;
};

/// Growth-rate guess used to size root-search grids.
double growth_rate_estimate(const MapSpec& map);

std::vector<StationaryPoint> find_stationary_points(const MapSpec& map,
                                                    const PerturbationSpec& pert, double r0,
                                                    int t, double p_lo, double p_hi,
                                                    const RootSearchOptions& opt = {});

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

McEstimate autocorrelation(const MapSpec& map, const PerturbationSpec& pert, int l,
                           std::int64_t samples, std::uint64_t seed);
McEstimate diffusion_constant(const MapSpec& map, const PerturbationSpec& pert, int l_max,
                              std::int64_t samples, std::uint64_t seed);
/// Delta S at n uniform phase-space points.
std::vector<double> action_samples(const MapSpec& map, const PerturbationSpec& pert, int t,
                                   std::int64_t n, std::uint64_t seed);

struct ActionCurve {
  double r0 = 0.0;
  int t = 0;
  std::vector<double> p0;
  std::vector<double> ds_over_eps;
};

ActionCurve action_curve(const MapSpec& map, const PerturbationSpec& pert, double r0, int t,
                         std::int64_t points, double p_lo = 0.0, double p_hi = kTwoPi);

}  // namespace lecho
