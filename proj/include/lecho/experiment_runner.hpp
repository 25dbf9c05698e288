#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lecho/action_functional.hpp"
#include "lecho/classical_dynamics.hpp"
#include "lecho/io.hpp"
#include "lecho/semiclassical_fidelity.hpp"
#include "lecho/stats_distributions.hpp"
#include "lecho/torus_quantum.hpp"

namespace lecho {

/// Everything a subcommand reads. Serialized verbatim into every sidecar.
struct RunConfig {
  std::string command;
  std::string map = "sawtooth";
  double K = 1.0;
  int N = 4096;
  std::vector<double> sigma{1.0};
  /// "monomial" or "cosine".
  std::string family = "monomial";
  int order = 2;
  /// "point" or "gaussian".
  std::string state = "point";
  double kappa = 1.0;
  /// "full" torus or "central" square [pi/2, 3pi/2).
  std::string centers = "full";
  double r0 = kPi;
  double p0 = kPi;
  std::int64_t ensemble = 100;
  int T = 50;
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 0;
  std::string format = "csv";
  bool per_state = false;
  std::vector<int> Ns{256, 512, 1024};
  std::vector<int> times{1, 2, 3};
  std::int64_t samples = 1000000;
  int bins = 400;
  int l_max = 8;
  int t_levy = 10;
  double c0 = 0.45;
  double a1 = 5.0;
  double b_bar = 1.0;
  double chord_tol = 0.5;

  void validate() const;
  MapSpec map_spec() const;
  /// Perturbation at sigma with hbar = 2pi/N.
  PerturbationSpec pert_spec(double sigma, int N) const;
  nlohmann::json to_json() const;
};

/// Ensemble statistics per kick.
struct EnsembleCurve {
  std::vector<double> M_mean;
  std::vector<double> M_stderr;
  std::vector<double> M_geo;
  /// |mean m|^2.
  std::vector<double> Ma;
  std::vector<FidelityCurve> members;
};

using StateFactory = std::function<WaveFunction(std::int64_t member)>;

/// Ensemble fidelity with per-member states; members evaluated in parallel,
/// reduced in index order.
EnsembleCurve ensemble_fidelity(const QuantumDims& dims, const KickSpec& h0, const KickSpec& h1,
                                std::int64_t members, const StateFactory& make_state, int T,
                                bool keep_members = false);

/// Initial-state centers for member k: uniform over the torus or over the central square.
PhasePoint ensemble_center(const std::string& region, std::uint64_t seed, std::int64_t member);
/// Grid index of a point source for member k.
int ensemble_point_index(const std::string& region, int N, std::uint64_t seed,
                         std::int64_t member);

/// Exact phase-space mean of V over uniform r.
double mean_potential(const PerturbationSpec& pert);

/// Writes tables and sidecars under cfg.out and records them for the manifest.
class OutputSink {
 public:
  explicit OutputSink(const RunConfig& cfg);
  void table(const std::string& stem, const Table& t, const std::string& kind,
             const nlohmann::json& extra = nlohmann::json::object());
  void json(const std::string& stem, const nlohmann::json& body, const std::string& kind);
  void finish();
  const std::vector<std::string>& files() const { return files_; }

 private:
  void sidecar(const std::string& file, const std::string& kind, const nlohmann::json& extra);
  const RunConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::string started_;
};

void cmd_fidelity(const RunConfig& cfg);
void cmd_compare_sc(const RunConfig& cfg);
void cmd_fgr_scan(const RunConfig& cfg);
void cmd_short_time(const RunConfig& cfg);
void cmd_classical(const RunConfig& cfg);
void cmd_action_stats(const RunConfig& cfg);
void cmd_levy(const RunConfig& cfg);
void cmd_regimes(const RunConfig& cfg);

/// Full CLI: returns the process exit code (0 ok, 2 config error, 3 numerical guard).
int run_cli(int argc, char** argv);

}  // namespace lecho
