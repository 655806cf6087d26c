#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "tiada/harness.hpp"

using namespace tiada;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig fig1(const std::string& optimizer = "tiada") {
    ExperimentConfig c = config_from_json(json::parse(R"({
        "problem": {"id": "quadratic", "params": {"L": 2}},
        "optimizer": {"id": "tiada", "params": {"eta_x": 1.0, "eta_y": 0.2}},
        "T": 2000
    })"));
    c.optimizer_id = optimizer;
    return c;
}

ExperimentConfig mccormick_stochastic() {
    ExperimentConfig c;
    c.problem_id = "mccormick";
    c.optimizer_params = {{"eta_x", 1.0}, {"eta_y", 0.01}};
    c.T = 200;
    c.initial_point = {{0.0, 0.0}, {0.0, 0.0}};
    c.noise_stddev = 0.1;
    c.seeds = {1, 2, 3};
    return c;
}

std::string csv_of(const TrajectoryRecord& t) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    return os.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("tiada_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("config defaults") {
    const ExperimentConfig q = config_from_json(json::parse(
        R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 0.2}}})"));
    CHECK(q.T == 2000);
    CHECK(q.initial_point == Iterate{{1.0}, {0.01}});
    CHECK(q.seeds == std::vector<std::uint64_t>{0});
    CHECK(q.record_every == 1);
    CHECK_FALSE(q.stochastic());

    const ExperimentConfig m = config_from_json(json::parse(
        R"({"problem": {"id": "mccormick"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 0.01}}})"));
    CHECK(m.T == 10000);
    CHECK(m.initial_point == Iterate{{0.0, 0.0}, {0.0, 0.0}});
}

TEST_CASE("config round-trip") {
    ExperimentConfig c = mccormick_stochastic();
    c.name = "rt";
    c.domain = DomainSpec::ball({0.0, 0.0}, 3.0);
    c.record_every = 7;
    c.stationarity_tol = 1e-9;
    c.optimizer_params["alpha"] = 0.7000000000000001;
    CHECK(config_from_json(to_json(c)) == c);
    CHECK(config_from_json(json::parse(to_json(c).dump())) == c);

    c.domain = DomainSpec::box({-1.0, -2.0}, {1.0, 0.5});
    CHECK(config_from_json(json::parse(to_json(c).dump())) == c);
}

TEST_CASE("config validation") {
    const auto bad = [](const char* text) { return config_from_json(json::parse(text)); };
    CHECK_THROWS_AS(bad(R"({"optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "nope", "params": {"eta_x": 1, "eta_y": 1}}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "T": 0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "record_every": 0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "seeds": []})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "Tmax": 5})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "initial_point": {"x": [1, 2], "y": [0]}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "domain": {"kind": "box", "lower": [0], "upper": [0.001]}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad(R"({"problem": {"id": "quadratic"}, "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 1}}, "noise_stddev": -1})"),
                    std::invalid_argument);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(0, 0) == derive_seed(0, 0));
    CHECK(derive_seed(0, 0) != derive_seed(0, 1));
    CHECK(derive_seed(0, 1) != derive_seed(1, 0));
}

TEST_CASE("run_experiment") {
    SUBCASE("one row for T = 1") {
        ExperimentConfig c = fig1();
        c.T = 1;
        const RunResult r = run_experiment(c);
        REQUIRE(r.trajectories.size() == 1);
        CHECK(r.trajectories[0].steps.size() == 1);
        CHECK_NOTHROW(verify_record(r.trajectories[0], *quadratic_problem(2.0)));
    }
    SUBCASE("deterministic configs run once") {
        ExperimentConfig c = fig1();
        c.seeds = {4, 5, 6};
        c.T = 10;
        CHECK(run_experiment(c).trajectories.size() == 1);
    }
    SUBCASE("stochastic configs run per seed and are byte-reproducible") {
        const ExperimentConfig c = mccormick_stochastic();
        const RunResult a = run_experiment(c), b = run_experiment(c);
        REQUIRE(a.trajectories.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(csv_of(a.trajectories[i]) == csv_of(b.trajectories[i]));
        CHECK(csv_of(a.trajectories[0]) != csv_of(a.trajectories[1]));
        CHECK(csv_of(run_experiment(c, 1).trajectories[0]) != csv_of(a.trajectories[0]));
    }
    SUBCASE("AdaGrad-GDA at ratio 5 shows the divergence signature") {
        const RunResult r = run_experiment(fig1("adagrad-gda"));
        const Summary& s = r.trajectories[0].summary;
        const bool diverged = r.trajectories[0].termination == Termination::NonFinite ||
                              s.final_det_grad_norm() > s.initial_det_grad_norm;
        CHECK(diverged);
    }
    SUBCASE("TiAda at ratio 5 reaches Stage II") {
        const RunResult r = run_experiment(fig1());
        CHECK(r.trajectories[0].summary.t_star.has_value());
        CHECK(r.trajectories[0].summary.stays_in_stage_ii);
    }
}

TEST_CASE("CSV layout") {
    ExperimentConfig c = fig1();
    c.T = 3;
    const std::string csv = csv_of(run_experiment(c).trajectories[0]);
    std::istringstream is(csv);
    std::string header, row;
    std::getline(is, header);
    CHECK(header ==
          "iter,grad_calls,grad_x_norm,grad_y_norm,det_grad_x_norm,det_grad_y_norm,eff_step_x,"
          "eff_step_y,ratio,f_value,phi_value,stage,damping,v_x,v_y");
    std::getline(is, row);
    CHECK(row.rfind("0,1,3.98,1.99,3.98,1.99,", 0) == 0);
    int rows = 1;
    while (std::getline(is, row)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 16.840400000000002}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("write_run output files") {
    TempDir dir;
    ExperimentConfig c = mccormick_stochastic();
    c.name = "mc";
    const RunResult r = run_experiment(c);
    write_run(r, dir.path, c.name, OutputFormat::Csv);
    for (auto seed : c.seeds) CHECK(fs::exists(dir.path / ("mc.seed" + std::to_string(seed) + ".csv")));
    const json summary = json::parse(slurp(dir.path / "mc.summary.json"));
    CHECK(config_from_json(summary["config"]) == c);
    CHECK(summary["problem"]["kappa"] == 4.0);
    CHECK(summary["trajectories"].size() == 3);
    CHECK(summary.contains("created_at"));

    // Rewriting changes nothing but the timestamp.
    json again = summary_json(r);
    json first = summary;
    again.erase("created_at");
    first.erase("created_at");
    CHECK(again == first);

    write_run(r, dir.path, "mcj", OutputFormat::Json);
    const json rows = json::parse(slurp(dir.path / "mcj.seed1.json"));
    CHECK(rows.size() == 200);
    CHECK(rows[0]["iter"] == 0);

    CHECK_THROWS_AS(write_run(r, "/proc/definitely/not/writable", "x", OutputFormat::Csv),
                    std::runtime_error);
}

TEST_CASE("sweep expansion") {
    SweepSpec spec;
    spec.base = fig1();
    spec.axes = {{"optimizer", {"tiada", "adagrad-gda"}}, {"ratio", {1, 0.5, 0.25}}, {"T", {10, 20}}};
    CHECK(spec.cell_count() == 12);
    const auto cells = expand_cells(spec);
    REQUIRE(cells.size() == 12);
    CHECK(cells[0].optimizer_id == "tiada");
    CHECK(cells[0].optimizer_params.at("eta_x") == 0.2);
    CHECK(cells[0].T == 10);
    CHECK(cells[1].T == 20);
    CHECK(cells[2].optimizer_params.at("eta_x") == 0.1);
    CHECK(cells[6].optimizer_id == "adagrad-gda");

    SweepSpec bad = spec;
    bad.axes = {{"warp", {1}}};
    CHECK_THROWS_AS(expand_cells(bad), std::invalid_argument);
}

TEST_CASE("sweep spec JSON") {
    const json j = json::parse(R"({
        "name": "s",
        "base": {"problem": {"id": "quadratic"},
                 "optimizer": {"id": "tiada", "params": {"eta_x": 1, "eta_y": 0.2}}},
        "axes": [{"param": "ratio", "values": [1, 0.5]}],
        "aggregation": "mean",
        "jobs": 2
    })");
    const SweepSpec s = sweep_from_json(j);
    CHECK(s.aggregation == Aggregation::Mean);
    CHECK(s.jobs == 2);
    const SweepSpec back = sweep_from_json(to_json(s));
    CHECK(back.base == s.base);
    CHECK(back.axes == s.axes);
    CHECK_THROWS_AS(sweep_from_json(json::parse(R"({"base": {}, "axes": []})")), std::invalid_argument);
}

TEST_CASE("single-cell sweep equals run_experiment") {
    SweepSpec spec;
    spec.base = mccormick_stochastic();
    spec.axes = {{"optimizer", {"tiada"}}};
    const SweepResult s = run_sweep(spec);
    const RunResult r = run_experiment(spec.base);
    REQUIRE(s.cells.size() == 1);
    for (std::size_t i = 0; i < r.trajectories.size(); ++i)
        CHECK(csv_of(s.cells[0].trajectories[i]) == csv_of(r.trajectories[i]));
}

TEST_CASE("parallel sweep equals serial") {
    SweepSpec spec;
    spec.base = mccormick_stochastic();
    spec.axes = {{"optimizer", {"tiada", "adagrad-gda", "tiada-nomax"}}, {"ratio", {100, 20}}};
    const SweepResult serial = run_sweep(spec);
    spec.jobs = 3;
    const SweepResult parallel = run_sweep(spec);
    std::ostringstream a, b;
    write_sweep_table(a, serial);
    write_sweep_table(b, parallel);
    CHECK(a.str() == b.str());
}

TEST_CASE("sweep aggregates are recomputable from the written summaries") {
    TempDir dir;
    SweepSpec spec;
    spec.name = "agg";
    spec.base = mccormick_stochastic();
    spec.axes = {{"optimizer", {"tiada", "adagrad-gda"}}};
    spec.keep_trajectories = true;
    const SweepResult res = run_sweep(spec);
    write_sweep(res, dir.path, OutputFormat::Csv);
    CHECK(fs::exists(dir.path / "agg.table.csv"));

    for (std::size_t i = 0; i < res.table.size(); ++i) {
        const json s = json::parse(slurp(dir.path / ("agg.cell" + std::to_string(i) + ".summary.json")));
        std::vector<double> gx, calls;
        for (const auto& t : s["trajectories"]) {
            gx.push_back(t["final_det_grad_x_norm"].get<double>());
            calls.push_back(t["grad_calls"].get<double>());
        }
        CHECK(doctest::Approx(median(gx)).epsilon(1e-12) == res.table[i].final_det_grad_x_norm);
        CHECK(median(calls) == res.table[i].grad_calls);
        CHECK(res.table[i].runs == 3);
        CHECK(res.table[i].assignment[0].second == spec.axes[0].values[i]);
    }
}

TEST_CASE("aggregation treats non-finite results as +inf") {
    RunResult r;
    for (double v : {1.0, std::nan(""), 3.0}) {
        TrajectoryRecord t;
        t.summary.final_det_grad_x_norm = v;
        t.termination = std::isnan(v) ? Termination::NonFinite : Termination::Completed;
        r.trajectories.push_back(t);
    }
    const CellRow row = aggregate_cell(r, Aggregation::Median, 0, {});
    CHECK(row.final_det_grad_x_norm == 3.0);
    CHECK(row.non_finite == 1);
    CHECK(row.completed == 2);
    CHECK(std::isinf(aggregate_cell(r, Aggregation::Mean, 0, {}).final_det_grad_x_norm));
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(std::isnan(median({})));
}

TEST_CASE("quadratic ratio sweep: TiAda is best in every cell") {
    SweepSpec spec;
    spec.base = fig1();
    spec.axes = {{"ratio", {1, 0.5, 0.25, 0.125}},
                 {"optimizer", {"tiada", "adagrad-gda", "neada-adagrad"}}};
    const SweepResult res = run_sweep(spec);
    for (std::size_t r = 0; r < 4; ++r) {
        const double tiada = res.table[3 * r].final_det_grad_norm;
        CHECK(tiada <= res.table[3 * r + 1].final_det_grad_norm);
        CHECK(tiada <= res.table[3 * r + 2].final_det_grad_norm);
    }
}

TEST_CASE("ablation") {
    AblationSpec spec;
    spec.base = fig1();
    spec.base.optimizer_params = {{"eta_x", 4.0}, {"eta_y", 0.2}};
    spec.base.T = 20000;

    SUBCASE("alpha must exceed one half") {
        spec.alphas = {0.5};
        CHECK_THROWS_AS(run_ablation(spec), std::invalid_argument);
        spec.alphas = {1.0};
        CHECK_THROWS_AS(run_ablation(spec), std::invalid_argument);
    }
    SUBCASE("singleton grid equals run_experiment") {
        spec.alphas = {0.6};
        spec.base.T = 500;
        const AblationResult a = run_ablation(spec);
        ExperimentConfig c = spec.base;
        c.optimizer_params["alpha"] = 0.6;
        c.optimizer_params["beta"] = 0.4;
        CHECK(csv_of(a.rows[0].run.trajectories[0]) == csv_of(run_experiment(c).trajectories[0]));
    }
    SUBCASE("Stage II entry is nonincreasing in alpha") {
        spec.alphas = {0.59, 0.6, 0.61, 0.62};
        const AblationResult a = run_ablation(spec);
        CHECK(a.kappa == 4.0);
        for (const auto& row : a.rows) REQUIRE(row.t_star.has_value());
        for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(*a.rows[i].t_star <= *a.rows[i - 1].t_star);
    }
}
