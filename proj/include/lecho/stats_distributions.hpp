#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lecho/common.hpp"

namespace lecho {

/// Stable law with characteristic function
/// psi(z) = exp(i g z - D |z|^alpha [1 - i beta sgn(z) omega(z, alpha)]).
struct LevyParams {
  double alpha = 1.0;
  double beta = 0.0;
  double g = 0.0;
  double D = 1.0;

  void validate() const;
};

double levy_density(double x, const LevyParams& params);

struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> centers;
  std::vector<double> density;
  std::vector<std::int64_t> counts;
  /// Fraction of the samples that fell inside [lo, lo + bins * width).
  double coverage = 0.0;
  std::int64_t total = 0;
};

struct HistogramRange {
  /// Mass fraction kept in the central window when lo/hi are not given.
  double central_mass = 0.999;
  std::optional<double> lo;
  std::optional<double> hi;
};

/// Density normalized over in-range samples (unit mass over the bins).
Histogram histogram(const std::vector<double>& samples, int bins, const HistogramRange& range = {});

struct LevyFit {
  LevyParams params;
  double residual = 0.0;
  int bins_used = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int iterations = 0;
};

struct LevyFitOptions {
  std::optional<double> fix_alpha;
  /// Fit region in cumulative histogram mass.
  double mass_lo = 0.02;
  double mass_hi = 0.98;
  int max_iterations = 4000;
};

LevyFit levy_fit(const Histogram& h, const LevyFitOptions& opt = {});

/// exp(-2 D sigma^alpha).
double levy_Ma_prediction(const LevyParams& params, double sigma);

struct RateFit {
  double gamma = 0.0;
  int t_lo = 0;
  int t_hi = 0;
  double residual = 0.0;
  double intercept = 0.0;
  std::string method;
};

struct RateWindow {
  int t_min = 1;
  std::optional<int> t_max;
  /// Window stops before the first point below floor_factor * c / N.
  double floor_factor = 10.0;
  double c = 1.0;
  int N = 0;
  std::optional<double> floor;
};

/// OLS of ln M(t) against t over the window; curve[t] is M at kick t.
RateFit decay_rate_fit(const std::vector<double>& curve, const RateWindow& window);

/// First t with |exact - predictor| / exact > threshold (strictly); nullopt when none.
std::optional<int> breakdown_time(const std::vector<double>& exact,
                                  const std::vector<double>& predictor, double threshold = 0.1);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lecho
