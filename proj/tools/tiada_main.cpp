// tiada: run, sweep and ablate minimax experiments from JSON specs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tiada/checks.hpp"
#include "tiada/harness.hpp"

namespace {

enum Exit { Ok = 0, Failure = 1, ConfigError = 2, InvariantFailure = 3 };

struct Common {
    std::string out;
    std::vector<std::uint64_t> seeds;
    std::uint64_t record_every = 0;
    std::string format = "csv";
    unsigned jobs = 0;
};

nlohmann::json read_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open " + path);
    try {
        return nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void apply_overrides(tiada::ExperimentConfig& c, const Common& o) {
    if (!o.seeds.empty()) c.seeds = o.seeds;
    if (o.record_every > 0) c.record_every = o.record_every;
    c.validate();
}

tiada::OutputFormat output_format(const Common& o) {
    return o.format == "json" ? tiada::OutputFormat::Json : tiada::OutputFormat::Csv;
}

std::string out_dir(const Common& o, const tiada::ExperimentConfig& base) {
    return o.out.empty() ? base.output : o.out;
}

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Re-derives every summary from its rows.
void verify(const tiada::RunResult& r) {
    const auto problem = tiada::make_problem(r.config.problem_id, r.config.problem_params);
    for (const auto& t : r.trajectories) {
        try {
            tiada::verify_record(t, *problem);
        } catch (const std::runtime_error& e) {
            throw InvariantError(e.what());
        }
    }
}

std::string describe(const tiada::Summary& s) {
    std::string line = "steps=" + std::to_string(s.steps) +
                       " grad_calls=" + std::to_string(s.grad_calls) +
                       " final_grad_x=" + tiada::format_double(s.final_det_grad_x_norm) +
                       " final_grad_y=" + tiada::format_double(s.final_det_grad_y_norm);
    line += " t_star=" + (s.t_star ? std::to_string(*s.t_star) : std::string("none"));
    return line;
}

int cmd_run(const std::string& path, const Common& o) {
    tiada::ExperimentConfig c = tiada::config_from_json(read_spec(path));
    apply_overrides(c, o);
    const tiada::RunResult r = tiada::run_experiment(c);
    verify(r);
    const std::string dir = out_dir(o, c);
    tiada::write_run(r, dir, c.name, output_format(o));
    const auto names = tiada::trajectory_names(r, c.name);
    for (std::size_t i = 0; i < r.trajectories.size(); ++i)
        std::cout << names[i] << ": " << tiada::to_string(r.trajectories[i].termination) << ' '
                  << describe(r.trajectories[i].summary) << '\n';
    std::cout << "wrote " << dir << '/' << c.name << ".summary.json\n";
    return Ok;
}

int cmd_sweep(const std::string& path, const Common& o) {
    tiada::SweepSpec spec = tiada::sweep_from_json(read_spec(path));
    apply_overrides(spec.base, o);
    if (o.jobs > 0) spec.jobs = o.jobs;
    const tiada::SweepResult r = tiada::run_sweep(spec);
    for (const auto& cell : r.cells) verify(cell);
    const std::string dir = out_dir(o, spec.base);
    tiada::write_sweep(r, dir, output_format(o));
    std::cout << r.table.size() << " cells; wrote " << dir << '/' << spec.name << ".table.csv\n";
    return Ok;
}

int cmd_ablate(const std::string& path, const Common& o) {
    tiada::AblationSpec spec = tiada::ablation_from_json(read_spec(path));
    apply_overrides(spec.base, o);
    if (o.jobs > 0) spec.jobs = o.jobs;
    const tiada::AblationResult r = tiada::run_ablation(spec);
    for (const auto& row : r.rows) verify(row.run);
    const std::string dir = out_dir(o, spec.base);
    tiada::write_ablation(r, dir, output_format(o));
    for (const auto& row : r.rows)
        std::cout << "alpha=" << tiada::format_double(row.alpha)
                  << " beta=" << tiada::format_double(row.beta) << " t_star="
                  << (row.t_star ? std::to_string(*row.t_star) : std::string("none"))
                  << (row.stays_in_stage_ii ? " (stays below 1/kappa)" : "") << '\n';
    std::cout << "wrote " << dir << '/' << spec.name << ".table.csv\n";
    return Ok;
}

int cmd_check() {
    int failed = 0;
    for (const auto& r : tiada::run_checks()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        if (!r.passed) ++failed;
    }
    return failed == 0 ? Ok : InvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TiAda minimax optimization experiments"};
    app.require_subcommand(1);

    Common opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", opts.out, "Output directory (overrides the spec)");
        sub->add_option("--seeds", opts.seeds, "Comma-separated seeds (overrides the spec)")
            ->delimiter(',');
        sub->add_option("--record-every", opts.record_every, "Diagnostics stride")
            ->check(CLI::PositiveNumber);
        sub->add_option("--format", opts.format, "Trajectory format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    std::string path;
    auto* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("config", path, "Experiment config (JSON)")->required();
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "Run a grid sweep");
    sweep->add_option("spec", path, "Sweep spec (JSON)")->required();
    add_common(sweep);
    sweep->add_option("--jobs", opts.jobs, "Worker threads");

    auto* ablate = app.add_subcommand("ablate", "Run an alpha/beta ablation");
    ablate->add_option("spec", path, "Ablation spec (JSON)")->required();
    add_common(ablate);
    ablate->add_option("--jobs", opts.jobs, "Worker threads");

    auto* check = app.add_subcommand("check", "Run the finite-difference and invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Ok : ConfigError;
    }

    try {
        if (*run) return cmd_run(path, opts);
        if (*sweep) return cmd_sweep(path, opts);
        if (*ablate) return cmd_ablate(path, opts);
        if (*check) return cmd_check();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ConfigError;
    } catch (const tiada::UnsupportedOperation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ConfigError;
    } catch (const InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        return InvariantFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Failure;
    }
    return Failure;
}
