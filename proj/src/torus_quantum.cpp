#include "lecho/torus_quantum.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <new>

namespace lecho {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  void* p = fftw_malloc(n * sizeof(T));
  if (!p && n) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_free(p);
}

template struct FftwAllocator<cplx>;

QuantumDims::QuantumDims(int n) : N(n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even and >= 2");
}

double KickSpec::potential(double r) const {
  double v = map.potential(r);
  if (pert) v += pert->epsilon * pert->value(r);
  return v;
}

KickSpec unperturbed(const MapSpec& map) { return {map, std::nullopt}; }

KickSpec perturbed(const MapSpec& map, const PerturbationSpec& pert) { return {map, pert}; }

FloquetOperator::FloquetOperator(const QuantumDims& dims, const KickSpec& kick) : N_(dims.N) {
  const double hbar = dims.hbar();
  kick_.resize(static_cast<size_t>(N_));
  kinetic_.resize(static_cast<size_t>(N_));
  for (int j = 0; j < N_; ++j) kick_[static_cast<size_t>(j)] = std::polar(1.0, -kick.potential(dims.r(j)) / hbar);
  const long long twoN = 2LL * N_;
  for (int k = 0; k < N_; ++k) {
    long long q = (static_cast<long long>(k) * k) % twoN;
    kinetic_[static_cast<size_t>(k)] = std::polar(1.0 / N_, -kPi * static_cast<double>(q) / N_);
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  WaveFunction buf(static_cast<size_t>(N_));
  fwd_ = fftw_plan_dft_1d(N_, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_FORWARD,
                          FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_1d(N_, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_BACKWARD,
                          FFTW_ESTIMATE);
}

FloquetOperator::~FloquetOperator() {
  if (!fwd_ && !bwd_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

FloquetOperator::FloquetOperator(FloquetOperator&& o) noexcept
    : N_(o.N_), kick_(std::move(o.kick_)), kinetic_(std::move(o.kinetic_)), fwd_(o.fwd_),
      bwd_(o.bwd_) {
  o.fwd_ = o.bwd_ = nullptr;
}

FloquetOperator& FloquetOperator::operator=(FloquetOperator&& o) noexcept {
  if (this != &o) {
    this->~FloquetOperator();
    N_ = o.N_;
    kick_ = std::move(o.kick_);
    kinetic_ = std::move(o.kinetic_);
    fwd_ = o.fwd_;
    bwd_ = o.bwd_;
    o.fwd_ = o.bwd_ = nullptr;
  }
  return *this;
}

void FloquetOperator::apply_kick(WaveFunction& psi) const {
  for (int j = 0; j < N_; ++j) psi[static_cast<size_t>(j)] *= kick_[static_cast<size_t>(j)];
}

void FloquetOperator::apply_free(WaveFunction& psi) const {
  if (static_cast<int>(psi.size()) != N_) throw ConfigError("state dimension mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(psi.data()), as_fftw(psi.data()));
  for (int k = 0; k < N_; ++k) psi[static_cast<size_t>(k)] *= kinetic_[static_cast<size_t>(k)];
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(psi.data()), as_fftw(psi.data()));
}

void FloquetOperator::apply(WaveFunction& psi) const {
  if (static_cast<int>(psi.size()) != N_) throw ConfigError("state dimension mismatch");
  apply_kick(psi);
  apply_free(psi);
}

std::vector<cplx> build_floquet_dense(const QuantumDims& dims, const KickSpec& kick) {
  const int N = dims.N;
  if (N > 1024) throw ConfigError("dense Floquet matrix limited to N <= 1024");
  std::vector<cplx> u(static_cast<size_t>(N) * N);
  const double norm = 1.0 / std::sqrt(static_cast<double>(N));
  const long long twoN = 2LL * N;
  for (int jp = 0; jp < N; ++jp) {
    for (int j = 0; j < N; ++j) {
      long long d = jp - j;
      long long q = (d * d) % twoN;
      double phase = kPi * static_cast<double>(q) / N -
                     N * kick.potential(dims.r(j)) / kTwoPi - kPi / 4.0;
      u[static_cast<size_t>(jp) * N + j] = std::polar(norm, phase);
    }
  }
  return u;
}

WaveFunction apply_dense(const std::vector<cplx>& u, const WaveFunction& psi) {
  const size_t N = psi.size();
  if (u.size() != N * N) throw ConfigError("dense matrix dimension mismatch");
  WaveFunction out(N);
  for (size_t i = 0; i < N; ++i) {
    cplx acc = 0.0;
    for (size_t j = 0; j < N; ++j) acc += u[i * N + j] * psi[j];
    out[i] = acc;
  }
  return out;
}

WaveFunction apply_floquet_fft(const QuantumDims& dims, const KickSpec& kick,
                               const WaveFunction& psi) {
  FloquetOperator u(dims, kick);
  WaveFunction out = psi;
  u.apply(out);
  return out;
}

GaussianPacketSpec GaussianPacketSpec::with_kappa(const QuantumDims& dims, double r0, double p0,
                                                  double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  return {r0, p0, std::sqrt(dims.hbar() / kappa)};
}

double norm2(const WaveFunction& psi) {
  double s = 0.0;
  for (const cplx& c : psi) s += std::norm(c);
  return s;
}

cplx inner(const WaveFunction& a, const WaveFunction& b) {
  cplx s = 0.0;
  for (size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s;
}

WaveFunction prepare_gaussian(const QuantumDims& dims, const GaussianPacketSpec& spec) {
  if (!(spec.xi > 0.0)) throw ConfigError("packet width must be > 0");
  if (spec.xi < kTwoPi / dims.N) throw PacketTooNarrow("packet narrower than the grid spacing");
  const int N = dims.N;
  const double hbar = dims.hbar();
  const double reach = spec.xi * std::sqrt(2.0 * std::log(1e16));
  WaveFunction psi(static_cast<size_t>(N));
  for (int j = 0; j < N; ++j) {
    const double r = dims.r(j);
    const long long m_lo = static_cast<long long>(std::floor((spec.r0 - reach - r) / kTwoPi));
    const long long m_hi = static_cast<long long>(std::ceil((spec.r0 + reach - r) / kTwoPi));
    cplx acc = 0.0;
    for (long long m = m_lo; m <= m_hi; ++m) {
      const double x = r + kTwoPi * static_cast<double>(m);
      const double d = x - spec.r0;
      const double env = std::exp(-d * d / (2.0 * spec.xi * spec.xi));
      if (env == 0.0) continue;
      acc += std::polar(env, std::fmod(spec.p0 * x / hbar, kTwoPi));
    }
    psi[static_cast<size_t>(j)] = acc;
  }
  const double n = std::sqrt(norm2(psi));
  if (!(n > 0.0)) throw PacketTooNarrow("packet has no weight on the grid");
  for (cplx& c : psi) c /= n;
  return psi;
}

WaveFunction prepare_point_source(const QuantumDims& dims, int j0) {
  if (j0 < 0 || j0 >= dims.N) throw ConfigError("point source index out of range");
  WaveFunction psi(static_cast<size_t>(dims.N), cplx(0.0, 0.0));
  psi[static_cast<size_t>(j0)] = 1.0;
  return psi;
}

FidelityCurve echo_series(const FloquetOperator& ua, const FloquetOperator& ub,
                          const WaveFunction& phi, int T) {
  if (T < 0) throw ConfigError("T must be >= 0");
  if (ua.N() != ub.N() || static_cast<int>(phi.size()) != ua.N())
    throw ConfigError("state dimension mismatch");
  FidelityCurve c;
  c.records.reserve(static_cast<size_t>(T) + 1);
  c.records.push_back({0, cplx(1.0, 0.0), 1.0});
  if (T == 0) return c;
  const size_t N = static_cast<size_t>(ua.N());
  std::vector<cplx> d(N);
  for (size_t j = 0; j < N; ++j) d[j] = std::conj(ub.kick_phases()[j]) * ua.kick_phases()[j];
  WaveFunction xa = phi;
  ua.apply_free(xa);
  WaveFunction xb = xa;
  for (int t = 1; t <= T; ++t) {
    cplx m = 0.0;
    for (size_t j = 0; j < N; ++j) m += std::conj(xb[j]) * xa[j] * d[j];
    c.records.push_back({t, m, std::norm(m)});
    if (t < T) {
      ua.apply(xa);
      ub.apply(xb);
    }
  }
  return c;
}

FidelityCurve fidelity_series(const FloquetOperator& u0, const FloquetOperator& u1,
                              const WaveFunction& psi0, int T) {
  WaveFunction phi = psi0;
  u0.apply_kick(phi);
  return echo_series(u0, u1, phi, T);
}

FidelityCurve echo_series(const QuantumDims& dims, const KickSpec& a, const KickSpec& b,
                          const WaveFunction& phi, int T) {
  FloquetOperator ua(dims, a), ub(dims, b);
  return echo_series(ua, ub, phi, T);
}

FidelityCurve fidelity_series(const QuantumDims& dims, const KickSpec& h0, const KickSpec& h1,
                              const WaveFunction& psi0, int T) {
  FloquetOperator u0(dims, h0), u1(dims, h1);
  return fidelity_series(u0, u1, psi0, T);
}

}  // namespace lecho
