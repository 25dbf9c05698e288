#include "lecho/stats_distributions.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_statistics_double.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lecho {

void LevyParams::validate() const {
  if (!(alpha >= 0.3 && alpha <= 2.0)) throw ConfigError("levy: alpha must be in [0.3, 2]");
  if (!(beta >= -1.0 && beta <= 1.0)) throw ConfigError("levy: beta must be in [-1, 1]");
  if (!(D > 0.0) || !std::isfinite(D)) throw ConfigError("levy: D must be > 0");
  if (!std::isfinite(g)) throw ConfigError("levy: g must be finite");
}

namespace {

struct LevyKernel {
  double a, y, D, beta, omega;
  bool log_branch;
};

double levy_kernel(double z, void* vp) {
  const auto& k = *static_cast<const LevyKernel*>(vp);
  if (z <= 0.0) return 1.0;
  const double za = (k.a == 1.0) ? z : (k.a == 2.0 ? z * z : std::pow(z, k.a));
  const double w = k.log_branch ? (2.0 / kPi) * std::log(z) : k.omega;
  return std::exp(-k.D * za) * std::cos(z * k.y - k.D * k.beta * za * w);
}

}  // namespace

double levy_density(double x, const LevyParams& prm) {
  prm.validate();
  const double a = prm.alpha;
  const double y = x - prm.g;
  const double log_cut = std::log(1e14);
  const double zmax = std::pow(log_cut / prm.D, 1.0 / a);
  LevyKernel k{a, y, prm.D, prm.beta, a == 1.0 ? 0.0 : std::tan(kPi * a / 2.0), a == 1.0};
  gsl_function f{&levy_kernel, &k};
  // z^alpha (and z log z) at the origin defeats fixed rules; QAGS extrapolates it away.
  const double sz = std::pow(prm.D, -1.0 / a);
  double wp = std::min(sz, zmax);
  if (y != 0.0) wp = std::min(wp, 2.0 * kPi / std::abs(y));
  const double np = std::ceil(zmax / wp);
  if (np > 1e6) throw QuadratureUnconverged("levy_density: too many panels");
  const auto n = static_cast<std::int64_t>(np);
  wp = zmax / np;
  static const bool quiet = (gsl_set_error_handler_off(), true);
  (void)quiet;
  thread_local gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
  double val = 0.0, err = 0.0;
  int st = gsl_integration_qags(&f, 0.0, wp, 1e-14, 1e-10, 200, ws, &val, &err);
  if (st != GSL_SUCCESS && err > 1e-10)
    throw QuadratureUnconverged("levy_density: origin panel unconverged");
  for (std::int64_t j = 1; j < n; ++j) {
    double r, e, ra, rs;
    gsl_integration_qk21(&f, wp * double(j), wp * double(j + 1), &r, &e, &ra, &rs);
    val += r;
  }
  return val / kPi;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  double pos = q * static_cast<double>(s.size() - 1);
  size_t i = static_cast<size_t>(std::floor(pos));
  size_t j = std::min(i + 1, s.size() - 1);
  double f = pos - static_cast<double>(i);
  return s[i] * (1.0 - f) + s[j] * f;
}

}  // namespace

Histogram histogram(const std::vector<double>& samples, int bins, const HistogramRange& range) {
  if (bins < 1) throw ConfigError("histogram: bins must be >= 1");
  if (static_cast<std::int64_t>(samples.size()) < bins)
    throw ConfigError("histogram: need at least as many samples as bins");
  double lo, hi;
  if (range.lo && range.hi) {
    lo = *range.lo;
    hi = *range.hi;
  } else {
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    double tail = 0.5 * (1.0 - range.central_mass);
    lo = range.lo ? *range.lo : quantile_sorted(s, tail);
    hi = range.hi ? *range.hi : quantile_sorted(s, 1.0 - tail);
  }
  if (!(hi > lo)) throw ConfigError("histogram: empty range");
  Histogram h;
  h.lo = lo;
  h.width = (hi - lo) / bins;
  h.counts.assign(static_cast<size_t>(bins), 0);
  std::int64_t inside = 0;
  for (double v : samples) {
    if (!(v >= lo && v <= hi)) continue;
    int b = static_cast<int>((v - lo) / h.width);
    if (b >= bins) b = bins - 1;
    ++h.counts[static_cast<size_t>(b)];
    ++inside;
  }
  h.total = static_cast<std::int64_t>(samples.size());
  h.coverage = static_cast<double>(inside) / static_cast<double>(samples.size());
  for (int b = 0; b < bins; ++b) {
    h.centers.push_back(lo + (b + 0.5) * h.width);
    h.density.push_back(inside ? static_cast<double>(h.counts[static_cast<size_t>(b)]) /
                                     (static_cast<double>(inside) * h.width)
                               : 0.0);
  }
  return h;
}

namespace {

struct FitData {
  std::vector<double> x, y;
  std::optional<double> fix_alpha;
};

LevyParams unpack(const gsl_vector* v, const FitData& d) {
  LevyParams p;
  p.g = gsl_vector_get(v, 0);
  p.D = std::exp(gsl_vector_get(v, 1));
  p.beta = std::tanh(gsl_vector_get(v, 2));
  if (d.fix_alpha)
    p.alpha = *d.fix_alpha;
  else
    p.alpha = 0.3 + 1.7 / (1.0 + std::exp(-gsl_vector_get(v, 3)));
  return p;
}

double objective(const gsl_vector* v, void* ctx) {
  const FitData& d = *static_cast<const FitData*>(ctx);
  LevyParams p = unpack(v, d);
  if (!std::isfinite(p.D) || p.D <= 0.0 || p.D > 1e12) return 1e300;
  double s = 0.0;
  try {
    for (size_t i = 0; i < d.x.size(); ++i) {
      double r = levy_density(d.x[i], p) - d.y[i];
      s += r * r;
    }
  } catch (const NumericalGuard&) {
    return 1e300;
  }
  return std::isfinite(s) ? s : 1e300;
}

}  // namespace

LevyFit levy_fit(const Histogram& h, const LevyFitOptions& opt) {
  gsl_set_error_handler_off();
  const size_t nb = h.density.size();
  if (nb == 0) throw ConfigError("levy_fit: empty histogram");
  if (opt.fix_alpha && !(*opt.fix_alpha >= 0.3 && *opt.fix_alpha <= 2.0))
    throw ConfigError("levy_fit: fixed alpha must be in [0.3, 2]");
  std::vector<double> cum(nb);
  double tot = 0.0;
  for (size_t b = 0; b < nb; ++b) {
    tot += h.density[b] * h.width;
    cum[b] = tot;
  }
  FitData d;
  d.fix_alpha = opt.fix_alpha;
  // Histogram density has unit mass over its range; the stable law has unit mass overall.
  const double mass = h.coverage > 0.0 ? h.coverage : 1.0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  for (size_t b = 0; b < nb; ++b) {
    double before = b ? cum[b - 1] : 0.0;
    if (before >= opt.mass_lo * tot && cum[b] <= opt.mass_hi * tot) {
      d.x.push_back(h.centers[b]);
      d.y.push_back(h.density[b] * mass);
    }
    if (before < 0.25 * tot && cum[b] >= 0.25 * tot) q25 = h.centers[b];
    if (before < 0.5 * tot && cum[b] >= 0.5 * tot) q50 = h.centers[b];
    if (before < 0.75 * tot && cum[b] >= 0.75 * tot) q75 = h.centers[b];
  }
  if (d.x.size() < 20) throw ConfigError("levy_fit: fewer than 20 bins in the fit region");
  double iqr = std::max(q75 - q25, h.width);
  double a0 = opt.fix_alpha ? *opt.fix_alpha : 1.5;
  double scale0 = a0 >= 1.9 ? iqr / 1.349 / std::sqrt(2.0) : iqr / 2.0;
  const size_t dim = opt.fix_alpha ? 3 : 4;
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  gsl_vector_set(x, 0, q50);
  gsl_vector_set(x, 1, a0 * std::log(scale0));
  gsl_vector_set(x, 2, 0.0);
  gsl_vector_set(step, 0, 0.1 * iqr);
  gsl_vector_set(step, 1, 0.5);
  gsl_vector_set(step, 2, 0.3);
  if (dim == 4) {
    gsl_vector_set(x, 3, std::log((a0 - 0.3) / (2.0 - a0)));
    gsl_vector_set(step, 3, 0.5);
  }
  gsl_multimin_function fn{&objective, dim, &d};
  gsl_multimin_fminimizer* mm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  LevyFit out;
  int iter = 0;
  // Two rounds: the restart shakes the simplex out of early collapse.
  for (int round = 0; round < 2; ++round) {
    gsl_multimin_fminimizer_set(mm, &fn, x, step);
    int status = GSL_CONTINUE;
    for (int it = 0; it < opt.max_iterations && status == GSL_CONTINUE; ++it, ++iter) {
      if (gsl_multimin_fminimizer_iterate(mm)) break;
      status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(mm), 1e-9);
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(mm));
    for (size_t k = 0; k < dim; ++k) gsl_vector_set(step, k, 0.2 * gsl_vector_get(step, k));
  }
  double best = gsl_multimin_fminimizer_minimum(mm);
  out.params = unpack(x, d);
  gsl_multimin_fminimizer_free(mm);
  gsl_vector_free(x);
  gsl_vector_free(step);
  if (!std::isfinite(best) || best >= 1e299) throw FitDiverged("levy_fit: minimizer diverged");
  out.residual = best;
  out.bins_used = static_cast<int>(d.x.size());
  out.x_lo = d.x.front();
  out.x_hi = d.x.back();
  out.iterations = iter;
  return out;
}

double levy_Ma_prediction(const LevyParams& params, double sigma) {
  params.validate();
  return std::exp(-2.0 * params.D * std::pow(std::abs(sigma), params.alpha));
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  gsl_set_error_handler_off();
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear_fit: need >= 2 points");
  LinearFit f;
  double c00, c01, c11, sumsq;
  gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &f.intercept, &f.slope, &c00, &c01, &c11,
                 &sumsq);
  f.r = x.size() > 2 ? gsl_stats_correlation(x.data(), 1, y.data(), 1, x.size()) : 1.0;
  return f;
}

RateFit decay_rate_fit(const std::vector<double>& curve, const RateWindow& w) {
  double floor = 0.0;
  if (w.floor)
    floor = *w.floor;
  else if (w.N > 0)
    floor = w.floor_factor * w.c / w.N;
  int last = static_cast<int>(curve.size()) - 1;
  if (w.t_max) last = std::min(last, *w.t_max);
  std::vector<double> ts, ls;
  for (int t = std::max(0, w.t_min); t <= last; ++t) {
    double m = curve[static_cast<size_t>(t)];
    if (!(m > 0.0) || m < floor) break;
    ts.push_back(t);
    ls.push_back(std::log(m));
  }
  if (ts.size() < 4) throw WindowEmpty("decay_rate_fit: fewer than 4 usable points");
  LinearFit f = linear_fit(ts, ls);
  RateFit r;
  r.gamma = -f.slope;
  r.intercept = f.intercept;
  r.t_lo = static_cast<int>(ts.front());
  r.t_hi = static_cast<int>(ts.back());
  double ss = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    double e = ls[i] - (f.intercept + f.slope * ts[i]);
    ss += e * e;
  }
  r.residual = std::sqrt(ss / static_cast<double>(ts.size()));
  r.method = "ols_log";
  return r;
}

std::optional<int> breakdown_time(const std::vector<double>& exact,
                                  const std::vector<double>& predictor, double threshold) {
  if (exact.size() != predictor.size()) throw ConfigError("breakdown_time: grid mismatch");
  for (size_t t = 0; t < exact.size(); ++t) {
    double e = exact[t], p = predictor[t];
    if (e == p) continue;
    double rel = e != 0.0 ? std::abs((e - p) / e) : std::numeric_limits<double>::infinity();
    if (rel > threshold) return static_cast<int>(t);
  }
  return std::nullopt;
}

}  // namespace lecho
