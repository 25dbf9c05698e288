#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lecho {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2pi). Exact multiples of 2pi map to 0.
inline double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

/// Signed distance a - b folded into [-pi, pi).
inline double torus_delta(double a, double b) {
  double d = wrap_angle(a - b + kPi) - kPi;
  return d;
}

/// Raised for bad parameters or config values (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of every numerical guard (CLI exit code 3).
class NumericalGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureUnresolved : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class QuadratureUnconverged : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class CausticError : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class DegenerateStationaryPoint : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class FitDiverged : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class WindowEmpty : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};
class PacketTooNarrow : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-member generator: member k of a run with seed s always sees the same stream.
class MemberRng {
 public:
  MemberRng(std::uint64_t seed, std::uint64_t member)
      : state_(splitmix64(seed) ^ splitmix64(member + 0x632be59bd9b4e019ULL)) {}
  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (own implementation keeps streams portable).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-60;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  /// SplitMix64 stream: cheap to seed per member.
  std::uint64_t bits() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }

 private:
  std::uint64_t state_;
};

}  // namespace lecho
