#pragma once

// Experiment configuration (JSON), runners and on-disk artifacts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kuramoto/integrator.hpp"
#include "kuramoto/meanfield.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/sync_analysis.hpp"

namespace kuramoto {

enum class ExperimentKind { Single, Sweep, StabilityPair, MeanfieldConvergence, KineticSync };

const char* to_string(ExperimentKind k) noexcept;

struct SyncSettings {
  bool enabled = true;
  double tol_freq = 1e-6;
  double hold_time = 10.0;
};

struct DecaySettings {
  std::string quantity = "D_omega";  // D_omega, D_theta, E_K, E, F
  double t_start = 0.0;
  double t_end = 0.0;
};

struct AnalysisSettings {
  std::vector<TheoremId> verdicts;
  std::optional<double> a_bar;
  SyncSettings sync;
  bool classify = true;
  double tol_angle = 1e-3;
  std::vector<std::string> monitors;
  std::vector<DecaySettings> decay;
};

struct SweepSettings {
  std::string parameter;
  std::vector<double> values;
};

struct StabilitySettings {
  OscillatorEnsemble init_b;
  std::optional<double> epsilon;
  double fit_t_start = 1.0;
  double fit_t_end = 50.0;
};

struct ConvergenceSettings {
  std::vector<std::size_t> n_list;
  std::size_t n_ref = 0;
  std::vector<std::uint64_t> seeds;
  double sample_interval = 1.0;
  W2Options w2;
};

struct ExperimentConfig {
  nlohmann::json source;    // the document as given (after command-line overrides)
  nlohmann::json resolved;  // every field with defaults applied, output section excluded
  std::string hash;         // FNV-1a 64 of resolved.dump(), hex
  ModelParams params = ModelParams::homogeneous(1, 1.0, 1.0, 0.0);
  OscillatorEnsemble init;
  std::optional<InitialDistribution> init_distribution;
  std::uint64_t init_seed = 0;
  IntegratorConfig integrator;
  AnalysisSettings analyses;
  ExperimentKind kind = ExperimentKind::Single;
  SweepSettings sweep;
  StabilitySettings stability;
  ConvergenceSettings convergence;
  std::filesystem::path out_dir;
  bool write_csv = true;
  bool write_json = true;
};

/// Values given on the command line; each replaces the matching config field.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_final;
};

/// Throws Error{ConfigError} with the offending field path (and line when known).
ExperimentConfig parse_config(const std::string& text, const Overrides& overrides = {});
ExperimentConfig parse_config_file(const std::filesystem::path& path, const Overrides& overrides = {});

/// Resolves an already-parsed document (used for sweep children).
ExperimentConfig resolve_config(nlohmann::json doc, const Overrides& overrides = {});

std::string fnv1a_hex(const std::string& bytes);

/// The source document of the single run for one sweep value.
nlohmann::json sweep_child_document(const ExperimentConfig& config, double value);

/// One resolved single-run config per sweep value, ordered by value.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& config);

struct BoundViolation {
  std::string monitor;
  double first_time = 0.0;
  std::size_t count = 0;
  double worst_excess = 0.0;
};

struct RunReport {
  std::string config_hash;
  std::vector<ConditionVerdict> verdicts;
  std::optional<double> sync_time;
  std::optional<LockClassification> classification;
  std::vector<BoundViolation> bound_violations;
  std::vector<std::pair<std::string, DecayFit>> decay_fits;
  std::map<std::string, double> timings;

  // values used by sweep rows and summaries
  double final_R_p = 0.0;
  double final_D_omega = 0.0;
  double final_E = 0.0;
};

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const ConditionVerdict& v);

/// Condition verdicts only, no simulation.
std::vector<ConditionVerdict> evaluate_verdicts(const ExperimentConfig& config);

/// Simulates a single-kind config; returns the report and, if requested, the sampled trajectory.
RunReport run_single(const ExperimentConfig& config, Trajectory* keep = nullptr);

/// Runs any experiment kind and writes its artifacts under config.out_dir.
/// Returns the process exit code: 0 success, 2 when bound violations were recorded.
int run(const ExperimentConfig& config, std::size_t workers = 1);

/// Runs every sweep child (in parallel when workers > 1) and writes sweep.csv.
int sweep(const ExperimentConfig& config, std::size_t workers = 1);

// CSV helpers

/// 17 significant digits, round-trip exact; "nan"/"inf" spelled out.
std::string format_double(double x);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj);

/// Snapshot CSV with header "theta,omega", or a trajectory CSV (last row is used).
OscillatorEnsemble read_state_csv(const std::filesystem::path& path);

}  // namespace kuramoto
