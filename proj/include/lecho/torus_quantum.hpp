#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "lecho/action_functional.hpp"
#include "lecho/classical_dynamics.hpp"

namespace lecho {

using cplx = std::complex<double>;

/// Allocator returning FFTW-aligned storage so plans can run on any state.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const {
    return true;
  }
};

using WaveFunction = std::vector<cplx, FftwAllocator<cplx>>;

struct QuantumDims {
  int N = 0;

  explicit QuantumDims(int n);
  double hbar() const { return kTwoPi / N; }
  double r(int j) const { return kTwoPi * j / N; }
  double p(int k) const { return kTwoPi * k / N; }
};

/// Full kick potential: map potential plus the optional eps * V perturbation.
struct KickSpec {
  MapSpec map;
  std::optional<PerturbationSpec> pert;

  double potential(double r) const;
};

/// One period of the quantized map: kick phase exp(-i V(r_j)/hbar), then
/// the kinetic phase exp(-i pi k^2 / N) in the momentum basis.
class FloquetOperator {
 public:
  FloquetOperator(const QuantumDims& dims, const KickSpec& kick);
  ~FloquetOperator();
  FloquetOperator(const FloquetOperator&) = delete;
  FloquetOperator& operator=(const FloquetOperator&) = delete;
  FloquetOperator(FloquetOperator&&) noexcept;
  FloquetOperator& operator=(FloquetOperator&&) noexcept;

  int N() const { return N_; }
  void apply(WaveFunction& psi) const;
  void apply_kick(WaveFunction& psi) const;
  void apply_free(WaveFunction& psi) const;
  const std::vector<cplx>& kick_phases() const { return kick_; }

 private:
  int N_ = 0;
  std::vector<cplx> kick_;
  std::vector<cplx> kinetic_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Dense N x N matrix of one period (row-major, U[j' * N + j]). N <= 1024.
std::vector<cplx> build_floquet_dense(const QuantumDims& dims, const KickSpec& kick);
WaveFunction apply_dense(const std::vector<cplx>& u, const WaveFunction& psi);

WaveFunction apply_floquet_fft(const QuantumDims& dims, const KickSpec& kick,
                               const WaveFunction& psi);

struct GaussianPacketSpec {
  double r0 = kPi;
  double p0 = kPi;
  double xi = 0.0;

  double kappa(const QuantumDims& dims) const { return dims.hbar() / (xi * xi); }
  /// xi = sqrt(hbar / kappa).
  static GaussianPacketSpec with_kappa(const QuantumDims& dims, double r0, double p0,
                                       double kappa);
  bool too_wide() const { return xi > kTwoPi / 6.0; }
};

WaveFunction prepare_gaussian(const QuantumDims& dims, const GaussianPacketSpec& spec);
WaveFunction prepare_point_source(const QuantumDims& dims, int j0);

double norm2(const WaveFunction& psi);
cplx inner(const WaveFunction& a, const WaveFunction& b);

struct FidelityRecord {
  int t = 0;
  cplx m;
  double M = 0.0;
};

struct FidelityCurve {
  std::vector<FidelityRecord> records;
};

/// Echo of a prepared state phi: m(t) = <K_b (F K_b)^(t-1) F phi | K_a (F K_a)^(t-1) F phi>
/// for t >= 1, m(0) = 1. Swapping a and b conjugates m.
FidelityCurve echo_series(const QuantumDims& dims, const KickSpec& a, const KickSpec& b,
                          const WaveFunction& phi, int T);

/// Fidelity of psi0 under H0 = `h0` and H1 = `h1`. The kick at n = 0 is the
/// reference kick of H0, so psi_a(t) = (K_a F)^t K_0 psi0 and M(t) is read just
/// after kick t.
FidelityCurve fidelity_series(const QuantumDims& dims, const KickSpec& h0, const KickSpec& h1,
                              const WaveFunction& psi0, int T);

/// Same two series on prebuilt operators (shared read-only across threads).
FidelityCurve echo_series(const FloquetOperator& ua, const FloquetOperator& ub,
                          const WaveFunction& phi, int T);
FidelityCurve fidelity_series(const FloquetOperator& u0, const FloquetOperator& u1,
                              const WaveFunction& psi0, int T);

/// U0 and U1 for a map and a perturbation.
KickSpec unperturbed(const MapSpec& map);
KickSpec perturbed(const MapSpec& map, const PerturbationSpec& pert);

}  // namespace lecho
