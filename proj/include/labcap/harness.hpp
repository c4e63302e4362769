#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "labcap/ces.hpp"
#include "labcap/fem.hpp"
#include "labcap/model.hpp"
#include "labcap/stability.hpp"
#include "labcap/wnl.hpp"

namespace labcap::harness {

/// Reaction coefficients can enter the pipeline either through the CES
/// derivation or directly in scaled units.
struct ReactionSpec {
  bool from_ces = true;
  ces::CesParams ces_params{};
  ces::FactorPrices prices{};
  // direct scaled coefficients (used when from_ces == false)
  double alpha1 = 0, alpha2 = 0, beta1 = 0, beta2 = 0;
};

/// Diffusion coefficients in raw units (fed through model::rescale) or
/// directly in scaled units.
struct DiffusionSpec {
  bool scaled_units = true;
  double c1 = 0.01, c2 = 0.01;
  double a1 = 0, a2 = 0;    // scaled units
  double a11 = 0, a22 = 0;  // raw units
  double a12 = 0;           // raw units; informational (b is set from b_multiplier)
};

struct SaturationSpec {
  // K_s = Ks_factor * K_star unless an explicit value is given.
  double Ks_factor = 10.0;
  std::optional<double> Ks_explicit;
};

/// Expected reference values for one experiment, with the precision they are
/// displayed at (tolerance = one unit of the last displayed digit).
struct ReferenceValue {
  double value;
  double display_ulp;
};
using ReferenceRow = std::map<std::string, ReferenceValue>;

struct ExperimentConfig {
  std::string name;
  ReactionSpec reaction;
  DiffusionSpec diffusion;
  SaturationSpec saturation;
  double gamma = 1.0;
  double b_multiplier = 1.01;
  fem::SolverConfig solver;
  int grid_nodes = 256;
  double ic_amplitude = 0.05;
  ReferenceRow reference;  // may be empty

  void validate() const;
};

struct ComparisonReport {
  std::string name;
  ces::LotkaVolterraCoeffs lv;   // meaningful only when reaction.from_ces
  bool lv_derived = false;
  model::ScaledModelParams params;
  model::Equilibrium eq;
  stability::StabilityReport stability;
  double b = 0.0;                // b_multiplier * b_c, as used by the solver
  wnl::WnlResult wnl;
  std::optional<double> T_s;
  bool reached_steady = false;
  double t_final = 0.0;
  std::optional<double> mse;     // sign-aligned sum of squared nodal differences,
                                 // both fields; present iff supercritical
  std::optional<double> dominant_mode;
  long total_fp_iterations = 0;
  int max_fp_iterations = 0;
  bool negativity_warning = false;
};

/// Built-in experiment presets exp1..exp4.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

/// Parses the key = value config format (# comments, dotted keys).
/// Throws std::invalid_argument on unknown keys or malformed input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolves a name as a preset first, then as a config file path.
ExperimentConfig resolve_config(const std::string& name_or_path);

/// Scaled parameters (with b = b_multiplier * b_c of the same run), the
/// equilibrium and the stability report for a config, without running the FEM.
struct PipelineHead {
  ces::LotkaVolterraCoeffs lv;
  bool lv_derived = false;
  model::ScaledModelParams params;
  model::Equilibrium eq;
  stability::StabilityReport stability;
  double b;
};
PipelineHead pipeline_head(const ExperimentConfig& cfg);

/// Full pipeline: CES -> rescale -> stability -> WNL -> FEM -> comparison.
/// Writes profile_fem.csv, profile_wnl.csv (supercritical only) and
/// report.json into out_dir/<name>/.
ComparisonReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir);

/// Aligned sum of squared nodal differences over both fields, minimized over
/// the sign of the primary mode (equivalently over half-period translations).
double aligned_mse(const fem::Field& fem_state, const wnl::WnlResult& res,
                   const model::Equilibrium& eq, const fem::Grid& grid);

struct TableCell {
  std::string column;
  double derived;
  std::optional<double> reference;
  std::optional<double> tolerance;
  bool matches;  // true when no reference is present
};
struct TableRow {
  std::string name;
  bool failed = false;        // pipeline error; one bad row does not abort
  std::string error;
  std::vector<TableCell> cells;
};

/// Derived columns (alpha1, alpha2, beta1, beta2, L*, K*, b_c, k_c) for each
/// config, next to the reference values and deviations.
std::vector<TableRow> table1(const std::vector<ExperimentConfig>& cfgs);
std::string format_table(const std::vector<TableRow>& rows);

/// One dispersion CSV per b value (columns k, detAk, reLambda1, reLambda2)
/// into out_dir/<name>/. Defaults to {b_c, 1.01 b_c}. Returns file paths.
std::vector<std::filesystem::path> dispersion_dump(
    const ExperimentConfig& cfg, std::vector<double> b_values,
    const std::filesystem::path& out_dir);

struct SweepPoint {
  double value;
  bool failed = false;
  double b_c = 0, k_c = 0, sigma = 0, ell = 0, L_star = 0, K_star = 0;
  std::string regime;
};

/// Sweeps one named parameter (gamma, b_multiplier, diffusion.c1,
/// diffusion.c2, diffusion.a1, diffusion.a2) over n uniform values in [a, b];
/// writes sweep.csv into out_dir/<name>/.
std::vector<SweepPoint> sweep(const ExperimentConfig& cfg,
                              const std::string& param, double a, double b,
                              int n, const std::filesystem::path& out_dir);

/// Writes x,L,K rows with full precision ("%.17g").
void write_profile_csv(const std::filesystem::path& file,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& L,
                       const Eigen::VectorXd& K);

void write_report_json(const std::filesystem::path& file,
                       const ExperimentConfig& cfg,
                       const ComparisonReport& report);

/// Exit codes used by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitStageError = 3;
inline constexpr int kExitComparisonError = 4;

}  // namespace labcap::harness
