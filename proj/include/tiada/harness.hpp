#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiada/optimizers.hpp"

namespace tiada {

/// One experiment: problem, optimizer, budget, start, noise and seeds.
///
/// JSON schema (all keys except problem/optimizer optional):
///   name            string, default "run"
///   problem         {"id": "quadratic"|"mccormick", "params": {...}}
///   optimizer       {"id": <optimizer id>, "params": {"eta_x": .., "eta_y": .., ...}}
///   T               iteration budget, default 2000 (quadratic) / 10000 (mccormick)
///   initial_point   {"x": [...], "y": [...]}, default (1, 0.01) / zeros
///   noise_stddev    Gaussian noise per gradient component, default 0
///   seeds           list of unsigned integers, default [0]
///   domain          {"kind": "unconstrained"} | {"kind": "box", "lower": [..], "upper": [..]}
///                   | {"kind": "ball", "center": [..], "radius": r}
///   output          output directory, default "."
///   record_every    diagnostics stride, default 1
///   stationarity_tol  early stop threshold on the noise-free gradient norm, default 0 (off)
struct ExperimentConfig {
    std::string name = "run";
    std::string problem_id = "quadratic";
    ParamMap problem_params;
    std::string optimizer_id = "tiada";
    ParamMap optimizer_params;
    std::uint64_t T = 2000;
    Iterate initial_point;
    double noise_stddev = 0.0;
    std::vector<std::uint64_t> seeds{0};
    DomainSpec domain;
    std::string output = ".";
    std::uint64_t record_every = 1;
    double stationarity_tol = 0.0;

    /// Throws std::invalid_argument on any broken invariant or unresolvable id.
    void validate() const;
    bool stochastic() const { return noise_stddev > 0.0; }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Fills problem-dependent defaults, then validates.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j);

/// Oracle seed for (seed, cell): splitmix64(splitmix64(seed) ^ cell). Every run
/// gets its own stream, so cells and seeds can execute in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell);

struct RunResult {
    ExperimentConfig config;
    ParamMap resolved_optimizer_params;
    ProblemConstants constants;
    std::uint64_t cell = 0;
    std::vector<TrajectoryRecord> trajectories;  // one per seed (one if deterministic)
};

/// Executes the configured optimizer for every seed. Deterministic configs run
/// once with the first seed.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t cell = 0);

enum class OutputFormat { Csv, Json };

/// CSV with columns iter, grad_calls, grad_x_norm, grad_y_norm, det_grad_x_norm,
/// det_grad_y_norm, eff_step_x, eff_step_y, ratio, f_value, phi_value, stage,
/// damping, v_x, v_y. Numbers use the shortest round-trip representation.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj);
nlohmann::json trajectory_rows_json(const TrajectoryRecord& traj);

nlohmann::json summary_json(const RunResult& result);
/// Name of each trajectory file without extension.
std::vector<std::string> trajectory_names(const RunResult& result, const std::string& base);

/// Writes <name>.csv (or .json) per trajectory and <name>.summary.json into
/// `dir`. Throws std::runtime_error if the directory cannot be written.
void write_run(const RunResult& result, const std::filesystem::path& dir, const std::string& name,
               OutputFormat format);

// ---------------------------------------------------------------------------

/// One swept parameter. `param` is one of:
///   optimizer            optimizer id (string values)
///   optimizer.<key>      optimizer parameter
///   problem.<key>        problem parameter
///   T, noise_stddev      top-level numbers
///   ratio                eta_x = value * eta_y
///   alpha_complement     alpha = value, beta = 1 - value
struct SweepAxis {
    std::string param;
    std::vector<nlohmann::json> values;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

enum class Aggregation { Median, Mean };

struct SweepSpec {
    std::string name = "sweep";
    ExperimentConfig base;
    std::vector<SweepAxis> axes;
    Aggregation aggregation = Aggregation::Median;
    bool keep_trajectories = false;
    unsigned jobs = 1;

    std::size_t cell_count() const;
};

SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSpec& s);

/// Cell configs in row-major order (first axis outermost). Derived axes
/// (ratio, alpha_complement) are applied after the plain ones.
std::vector<ExperimentConfig> expand_cells(const SweepSpec& spec);

struct CellRow {
    std::size_t cell = 0;
    std::vector<std::pair<std::string, nlohmann::json>> assignment;
    std::size_t runs = 0;
    double final_det_grad_x_norm = 0.0;  // aggregated over seeds
    double final_det_grad_y_norm = 0.0;
    double final_det_grad_norm = 0.0;
    std::optional<double> t_star;  // aggregated over runs that reached Stage II
    std::size_t reached_stage_ii = 0;
    std::size_t completed = 0;
    std::size_t non_finite = 0;
    std::size_t stationary = 0;
    double grad_calls = 0.0;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<RunResult> cells;
    std::vector<CellRow> table;
};

/// Aggregates one cell. Non-finite final norms count as +inf.
CellRow aggregate_cell(const RunResult& run, Aggregation agg, std::size_t cell,
                       std::vector<std::pair<std::string, nlohmann::json>> assignment);

SweepResult run_sweep(const SweepSpec& spec);
void write_sweep_table(std::ostream& os, const SweepResult& result);
/// <name>.table.csv, plus per-cell trajectories and summaries when requested.
void write_sweep(const SweepResult& result, const std::filesystem::path& dir, OutputFormat format);

// ---------------------------------------------------------------------------

struct AblationSpec {
    std::string name = "ablation";
    ExperimentConfig base;
    std::vector<double> alphas;
    unsigned jobs = 1;
};

AblationSpec ablation_from_json(const nlohmann::json& j);

struct AblationRow {
    double alpha = 0.0;
    double beta = 0.0;
    RunResult run;
    std::optional<std::uint64_t> t_star;  // first trajectory's Stage II entry
    bool stays_in_stage_ii = false;
};

struct AblationResult {
    AblationSpec spec;
    double kappa = 1.0;
    std::vector<AblationRow> rows;
};

/// Runs the base config once per alpha with beta = 1 - alpha. Throws
/// std::invalid_argument unless every alpha lies in (0.5, 1).
AblationResult run_ablation(const AblationSpec& spec);
void write_ablation(const AblationResult& result, const std::filesystem::path& dir,
                    OutputFormat format);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Median with the usual midpoint rule for even counts; empty input gives NaN.
double median(std::vector<double> values);

}  // namespace tiada
