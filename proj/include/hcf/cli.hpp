#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hcf/analysis.hpp"
#include "hcf/flow.hpp"
#include "hcf/geometry.hpp"
#include "hcf/lie.hpp"

namespace hcf::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIntegration = 3,
  kExitVerify = 4,
  kExitNoData = 5,
};

/// "identity", "scalar:0.5", "diag:1,1,2", "random_pd", "random_pd(7)", "random_pd(7,2.5)",
/// "random_diag(...)" or "file:path.json" holding [[a, b, re, im], ...].
struct InitialFormSpec {
  enum class Kind { Identity, Scalar, Diagonal, RandomPd, RandomDiag, File };
  Kind kind = Kind::Identity;
  std::vector<double> values;         // Scalar / Diagonal
  std::optional<std::uint64_t> seed;  // Random*, falls back to the run seed
  double scale = 1.0;                 // Random*
  std::string path;                   // File

  [[nodiscard]] std::string to_string() const;
};

InitialFormSpec parse_initial_form(std::string_view text);
forms::HermitianForm resolve_initial_form(const InitialFormSpec& spec, int dim,
                                          std::uint64_t run_seed);

struct RunConfig {
  lie::AlgebraSpec algebra;
  InitialFormSpec h0;
  flow::IntegratorConfig integrator;
  std::string out_dir = "hcf_out";
  std::uint64_t seed = 0;
  std::string name = "flow";
};

/// Defaults used by the command line: t_end 100, grid of t_end / 1000 plus every step.
flow::IntegratorConfig default_cli_integrator();

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = RunConfig{});

struct RunRecord {
  RunConfig config;
  std::string csv_path;
  std::string record_path;
  std::string plot_path;
  flow::Termination termination = flow::Termination::ReachedTEnd;
  double t_last = 0.0;
  std::size_t samples = 0;
  std::optional<analysis::GrowthReport> growth;
  std::string growth_error;
  std::optional<double> blowup_time;
  std::optional<double> pinching_floor;
  analysis::EinsteinReport einstein;
  std::vector<std::string> warnings;
  double wall_time = 0.0;
  std::string version = kVersion;
  std::string error;  // set when the run could not be carried out

  [[nodiscard]] bool integration_failed() const;
};

nlohmann::json to_json(const RunRecord& rec);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header t, re_a_b / im_a_b for a <= b, then the monitors.
void write_trajectory_csv(const flow::Trajectory& traj, const std::string& path);
void write_plot_script(const std::string& csv_path, const std::string& script_path);

/// Integrates, analyses and writes <name>.csv, <name>.run.json, <name>.gp into out_dir.
RunRecord execute_run(const RunConfig& cfg);

int cmd_flow(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct SweepConfig {
  RunConfig base;  // h0 defaults to random_pd; run i uses seed base.seed + i
  int count = 1;
  int jobs = 0;  // 0 = hardware concurrency
};

struct SweepSummary {
  std::vector<RunRecord> runs;
  nlohmann::json summary;
  int exit_code = kExitOk;
};

SweepSummary run_sweep(const SweepConfig& cfg);
int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err);

struct VerifyConfig {
  geometry::ModelSpec model;
  int trials = 100;
  std::uint64_t seed = 0;
  double analytic_tol = 1e-10;
  double fd_tol = 1e-5;
  double push_tol = 1e-10;
};

struct VerifyCase {
  CVector z;
  forms::HermitianForm h;
  double analytic = 0.0;  // theta_coordinate vs theta_brackets
  double fd = 0.0;        // theta_coordinate_fd vs theta_brackets
  double push = 0.0;      // theta_brackets vs pushed sharp square
};

struct VerifyReport {
  std::string model;
  int sign_convention = 1;
  int trials = 0;
  double max_analytic = 0.0;
  double max_fd = 0.0;
  double max_push = 0.0;
  /// Largest relative change of Theta between two points for one form.
  double max_point_variation = 0.0;
  std::optional<VerifyCase> worst;
  bool passed = true;
};

VerifyReport run_verify(const VerifyConfig& cfg);
int cmd_verify(const VerifyConfig& cfg, std::ostream& out, std::ostream& err);

int cmd_classify(const lie::AlgebraSpec& spec, std::ostream& out, std::ostream& err);

/// Markdown table over every *.run.json below dir.
int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err);

/// Full command-line entry point; args[0] is the program name.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcf::cli
