#include "tiada/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace tiada {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Formatting helpers

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double mean(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double aggregate(const std::vector<double>& values, Aggregation agg) {
    return agg == Aggregation::Median ? median(values) : mean(values);
}

std::string to_string(Aggregation a) { return a == Aggregation::Median ? "median" : "mean"; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write output file " + path.string());
    return os;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory " + dir.string());
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = std::min<std::size_t>(jobs, n);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// JSON field access

[[noreturn]] void config_error(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) config_error("unknown key '" + k + "' in " + where);
}

double get_number(const json& j, const std::string& what) {
    if (!j.is_number()) config_error(what + " must be a number");
    return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& what) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
        config_error(what + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

Vector get_vector(const json& j, const std::string& what) {
    if (!j.is_array()) config_error(what + " must be an array of numbers");
    Vector v;
    for (const auto& e : j) v.push_back(get_number(e, what));
    return v;
}

ParamMap get_params(const json& j, const std::string& what) {
    if (j.is_null()) return {};
    if (!j.is_object()) config_error(what + " must be an object of numbers");
    ParamMap p;
    for (const auto& [k, v] : j.items()) p[k] = get_number(v, what + "." + k);
    return p;
}

json params_json(const ParamMap& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

Iterate default_initial_point(const std::string& problem_id, const MinimaxProblem& problem) {
    if (problem_id == "quadratic") return {{1.0}, {0.01}};
    return {Vector(problem.dim_x(), 0.0), Vector(problem.dim_y(), 0.0)};
}

std::uint64_t default_budget(const std::string& problem_id) {
    return problem_id == "mccormick" ? 10000 : 2000;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::validate() const {
    if (T < 1) config_error("T must be >= 1");
    if (record_every < 1) config_error("record_every must be >= 1");
    if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev))
        config_error("noise_stddev must be finite and >= 0");
    if (seeds.empty()) config_error("seeds must be nonempty");
    if (!(stationarity_tol >= 0.0)) config_error("stationarity_tol must be >= 0");
    if (name.empty() || name.find('/') != std::string::npos)
        config_error("name must be a nonempty file stem");

    const ProblemPtr problem = make_problem(problem_id, problem_params);
    check_dimensions(*problem, initial_point);
    if (!all_finite(initial_point.x) || !all_finite(initial_point.y))
        config_error("initial point must be finite");
    domain.check_dimension(problem->dim_y());
    if (project(domain, initial_point.y) != initial_point.y)
        config_error("initial y lies outside the domain");
    // Constructing the optimizer validates ids, keys and values.
    (void)make_optimizer(optimizer_id, optimizer_params, initial_point, stochastic());
}

json to_json(const DomainSpec& d) {
    return std::visit(
        [](const auto& k) -> json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Box>)
                return {{"kind", "box"}, {"lower", k.lower}, {"upper", k.upper}};
            else if constexpr (std::is_same_v<K, Ball>)
                return {{"kind", "ball"}, {"center", k.center}, {"radius", k.radius}};
            else
                return {{"kind", "unconstrained"}};
        },
        d.kind());
}

DomainSpec domain_from_json(const json& j) {
    if (j.is_null()) return DomainSpec::unconstrained();
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        config_error("domain must be an object with a string 'kind'");
    const std::string kind = j["kind"];
    if (kind == "unconstrained") {
        reject_unknown_keys(j, {"kind"}, "domain");
        return DomainSpec::unconstrained();
    }
    if (kind == "box") {
        reject_unknown_keys(j, {"kind", "lower", "upper"}, "domain");
        return DomainSpec::box(get_vector(j.value("lower", json()), "domain.lower"),
                               get_vector(j.value("upper", json()), "domain.upper"));
    }
    if (kind == "ball") {
        reject_unknown_keys(j, {"kind", "center", "radius"}, "domain");
        return DomainSpec::ball(get_vector(j.value("center", json()), "domain.center"),
                                get_number(j.value("radius", json()), "domain.radius"));
    }
    config_error("unknown domain kind '" + kind + "'");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["problem"] = {{"id", c.problem_id}, {"params", params_json(c.problem_params)}};
    j["optimizer"] = {{"id", c.optimizer_id}, {"params", params_json(c.optimizer_params)}};
    j["T"] = c.T;
    j["initial_point"] = {{"x", c.initial_point.x}, {"y", c.initial_point.y}};
    j["noise_stddev"] = c.noise_stddev;
    j["seeds"] = c.seeds;
    j["domain"] = to_json(c.domain);
    j["output"] = c.output;
    j["record_every"] = c.record_every;
    j["stationarity_tol"] = c.stationarity_tol;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) config_error("experiment config must be a JSON object");
    reject_unknown_keys(j,
                        {"name", "problem", "optimizer", "T", "initial_point", "noise_stddev",
                         "seeds", "domain", "output", "record_every", "stationarity_tol"},
                        "experiment config");
    ExperimentConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string()) config_error("name must be a string");
        c.name = j["name"];
    }

    if (!j.contains("problem") || !j["problem"].is_object()) config_error("missing 'problem'");
    const json& pj = j["problem"];
    reject_unknown_keys(pj, {"id", "params"}, "problem");
    if (!pj.contains("id") || !pj["id"].is_string()) config_error("problem.id must be a string");
    c.problem_id = pj["id"];
    c.problem_params = get_params(pj.value("params", json()), "problem.params");

    if (!j.contains("optimizer") || !j["optimizer"].is_object())
        config_error("missing 'optimizer'");
    const json& oj = j["optimizer"];
    reject_unknown_keys(oj, {"id", "params"}, "optimizer");
    if (!oj.contains("id") || !oj["id"].is_string())
        config_error("optimizer.id must be a string");
    c.optimizer_id = oj["id"];
    c.optimizer_params = get_params(oj.value("params", json()), "optimizer.params");

    const ProblemPtr problem = make_problem(c.problem_id, c.problem_params);
    c.T = j.contains("T") ? get_count(j["T"], "T") : default_budget(c.problem_id);
    if (j.contains("initial_point")) {
        const json& ip = j["initial_point"];
        if (!ip.is_object()) config_error("initial_point must be an object");
        reject_unknown_keys(ip, {"x", "y"}, "initial_point");
        c.initial_point = {get_vector(ip.value("x", json()), "initial_point.x"),
                           get_vector(ip.value("y", json()), "initial_point.y")};
    } else {
        c.initial_point = default_initial_point(c.problem_id, *problem);
    }
    if (j.contains("noise_stddev")) c.noise_stddev = get_number(j["noise_stddev"], "noise_stddev");
    if (j.contains("seeds")) {
        if (!j["seeds"].is_array()) config_error("seeds must be an array");
        c.seeds.clear();
        for (const auto& s : j["seeds"]) c.seeds.push_back(get_count(s, "seeds[]"));
    }
    c.domain = domain_from_json(j.value("domain", json()));
    if (j.contains("output")) {
        if (!j["output"].is_string()) config_error("output must be a string");
        c.output = j["output"];
    }
    if (j.contains("record_every")) c.record_every = get_count(j["record_every"], "record_every");
    if (j.contains("stationarity_tol"))
        c.stationarity_tol = get_number(j["stationarity_tol"], "stationarity_tol");
    c.validate();
    return c;
}

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path.string());
    try {
        return json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) { return config_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Runs

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell) {
    auto splitmix64 = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return splitmix64(splitmix64(seed) ^ cell);
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t cell) {
    config.validate();
    const ProblemPtr problem = make_problem(config.problem_id, config.problem_params);

    RunResult result;
    result.config = config;
    result.cell = cell;
    result.constants = problem->constants();
    result.resolved_optimizer_params =
        resolved_params(config.optimizer_id, config.optimizer_params, config.stochastic());

    std::vector<std::uint64_t> seeds = config.seeds;
    if (!config.stochastic()) seeds.resize(1);

    RunOptions options;
    options.T = config.T;
    options.record_every = config.record_every;
    options.stationarity_tol = config.stationarity_tol;

    for (std::uint64_t seed : seeds) {
        std::unique_ptr<GradientSource> oracle;
        if (config.stochastic())
            oracle = make_stochastic(problem, config.noise_stddev, derive_seed(seed, cell));
        else
            oracle = std::make_unique<DeterministicOracle>(problem);
        auto opt = make_optimizer(config.optimizer_id, config.optimizer_params,
                                  config.initial_point, config.stochastic());
        TrajectoryRecord rec = run_optimizer(*opt, *oracle, config.domain, options);
        rec.optimizer_params = result.resolved_optimizer_params;
        rec.seed = seed;
        result.trajectories.push_back(std::move(rec));
    }
    return result;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj) {
    os << "iter,grad_calls,grad_x_norm,grad_y_norm,det_grad_x_norm,det_grad_y_norm,"
          "eff_step_x,eff_step_y,ratio,f_value,phi_value,stage,damping,v_x,v_y\n";
    for (const auto& d : traj.steps) {
        os << d.t << ',' << d.grad_calls << ',' << format_double(d.grad_x_norm) << ','
           << format_double(d.grad_y_norm) << ',' << format_double(d.det_grad_x_norm) << ','
           << format_double(d.det_grad_y_norm) << ',' << format_double(d.eff_step_x) << ','
           << format_double(d.eff_step_y) << ',' << format_double(d.ratio) << ','
           << format_double(d.f_value) << ','
           << (d.phi_value ? format_double(*d.phi_value) : std::string()) << ','
           << (d.stage ? to_string(*d.stage) : std::string()) << ',' << format_double(d.damping)
           << ',' << format_double(d.v_x) << ',' << format_double(d.v_y) << '\n';
    }
}

json trajectory_rows_json(const TrajectoryRecord& traj) {
    json rows = json::array();
    for (const auto& d : traj.steps) {
        json r;
        r["iter"] = d.t;
        r["grad_calls"] = d.grad_calls;
        r["grad_x_norm"] = d.grad_x_norm;
        r["grad_y_norm"] = d.grad_y_norm;
        r["det_grad_x_norm"] = d.det_grad_x_norm;
        r["det_grad_y_norm"] = d.det_grad_y_norm;
        r["eff_step_x"] = d.eff_step_x;
        r["eff_step_y"] = d.eff_step_y;
        r["ratio"] = d.ratio;
        r["f_value"] = d.f_value;
        r["phi_value"] = d.phi_value ? json(*d.phi_value) : json();
        r["stage"] = d.stage ? json(to_string(*d.stage)) : json();
        r["damping"] = d.damping;
        r["v_x"] = d.v_x;
        r["v_y"] = d.v_y;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::string> trajectory_names(const RunResult& result, const std::string& base) {
    std::vector<std::string> names;
    if (!result.config.stochastic()) {
        names.push_back(base);
        return names;
    }
    for (const auto& t : result.trajectories) names.push_back(base + ".seed" + std::to_string(t.seed));
    return names;
}

namespace {

json optional_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(); }

json trajectory_summary_json(const TrajectoryRecord& t, std::uint64_t oracle_seed,
                             bool stochastic) {
    const Summary& s = t.summary;
    json j;
    j["seed"] = t.seed;
    j["oracle_seed"] = stochastic ? json(oracle_seed) : json();
    j["termination"] = to_string(t.termination);
    j["abort_message"] = t.abort_message;
    j["steps"] = s.steps;
    j["grad_calls"] = s.grad_calls;
    j["t_star"] = optional_json(s.t_star);
    j["stays_in_stage_ii"] = s.stays_in_stage_ii;
    j["initial_det_grad_norm"] = s.initial_det_grad_norm;
    j["min_det_grad_norm"] = s.min_det_grad_norm;
    j["final_det_grad_x_norm"] = s.final_det_grad_x_norm;
    j["final_det_grad_y_norm"] = s.final_det_grad_y_norm;
    j["final_det_grad_norm"] = s.final_det_grad_norm();
    j["avg_sq_grad_x"] = s.avg_sq_grad_x;
    j["avg_sq_grad_y"] = s.avg_sq_grad_y;
    j["final_x"] = t.final_iterate.x;
    j["final_y"] = t.final_iterate.y;
    return j;
}

}  // namespace

json summary_json(const RunResult& result) {
    const ProblemConstants& k = result.constants;
    json j;
    j["config"] = to_json(result.config);
    j["problem"] = {{"id", result.config.problem_id},
                    {"l", k.l},
                    {"mu", k.mu},
                    {"kappa", k.kappa},
                    {"stage_threshold", 1.0 / k.kappa},
                    {"hessian_spectral_norm", k.hessian_spectral_norm},
                    {"assumptions",
                     {{"smooth", k.assumptions.smooth},
                      {"strongly_concave", k.assumptions.strongly_concave},
                      {"interior_optimum", k.assumptions.interior_optimum},
                      {"bounded_stochastic_grad", k.assumptions.bounded_stochastic_grad},
                      {"bounded_primal", k.assumptions.bounded_primal},
                      {"second_order_smooth", k.assumptions.second_order_smooth}}}};
    j["resolved_optimizer_params"] = params_json(result.resolved_optimizer_params);
    j["cell"] = result.cell;

    const auto names = trajectory_names(result, result.config.name);
    json trajs = json::array();
    for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
        const auto& t = result.trajectories[i];
        json tj = trajectory_summary_json(t, derive_seed(t.seed, result.cell),
                                          result.config.stochastic());
        tj["name"] = names[i];
        trajs.push_back(std::move(tj));
    }
    j["trajectories"] = std::move(trajs);
    j["created_at"] = utc_timestamp();
    return j;
}

void write_run(const RunResult& result, const fs::path& dir, const std::string& name,
               OutputFormat format) {
    ensure_directory(dir);
    const auto names = trajectory_names(result, name);
    for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
        if (format == OutputFormat::Csv) {
            auto os = open_for_write(dir / (names[i] + ".csv"));
            write_trajectory_csv(os, result.trajectories[i]);
        } else {
            auto os = open_for_write(dir / (names[i] + ".json"));
            os << trajectory_rows_json(result.trajectories[i]).dump(1) << '\n';
        }
    }
    json summary = summary_json(result);
    for (std::size_t i = 0; i < names.size(); ++i) summary["trajectories"][i]["name"] = names[i];
    auto os = open_for_write(dir / (name + ".summary.json"));
    os << summary.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t SweepSpec::cell_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

namespace {

bool derived_axis(const std::string& param) {
    return param == "ratio" || param == "alpha_complement";
}

void apply_axis(ExperimentConfig& c, const std::string& param, const json& value) {
    auto number = [&] { return get_number(value, "sweep axis '" + param + "'"); };
    if (param == "optimizer") {
        if (!value.is_string()) config_error("sweep axis 'optimizer' takes string values");
        c.optimizer_id = value.get<std::string>();
    } else if (param.rfind("optimizer.", 0) == 0) {
        c.optimizer_params[param.substr(10)] = number();
    } else if (param.rfind("problem.", 0) == 0) {
        c.problem_params[param.substr(8)] = number();
    } else if (param == "T") {
        c.T = get_count(value, "sweep axis 'T'");
    } else if (param == "noise_stddev") {
        c.noise_stddev = number();
    } else if (param == "ratio") {
        auto it = c.optimizer_params.find("eta_y");
        if (it == c.optimizer_params.end()) config_error("sweep axis 'ratio' needs eta_y");
        c.optimizer_params["eta_x"] = number() * it->second;
    } else if (param == "alpha_complement") {
        const double a = number();
        c.optimizer_params["alpha"] = a;
        c.optimizer_params["beta"] = 1.0 - a;
    } else {
        config_error("unknown sweep axis '" + param + "'");
    }
}

std::vector<std::vector<std::size_t>> index_product(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (const auto& a : axes)
        if (a.values.empty()) return out;
    for (;;) {
        out.push_back(idx);
        std::size_t k = axes.size();
        while (k > 0) {
            --k;
            if (++idx[k] < axes[k].values.size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
        if (axes.empty()) return out;
    }
}

std::vector<std::pair<std::string, json>> assignment_of(const SweepSpec& spec,
                                                        const std::vector<std::size_t>& idx) {
    std::vector<std::pair<std::string, json>> a;
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
        a.emplace_back(spec.axes[k].param, spec.axes[k].values[idx[k]]);
    return a;
}

}  // namespace

std::vector<ExperimentConfig> expand_cells(const SweepSpec& spec) {
    std::vector<ExperimentConfig> cells;
    const auto product = index_product(spec.axes);
    for (std::size_t i = 0; i < product.size(); ++i) {
        ExperimentConfig c = spec.base;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < spec.axes.size(); ++k) {
                const bool derived = derived_axis(spec.axes[k].param);
                if (derived == (pass == 1))
                    apply_axis(c, spec.axes[k].param, spec.axes[k].values[product[i][k]]);
            }
        }
        c.name = spec.name + ".cell" + std::to_string(i);
        c.validate();
        cells.push_back(std::move(c));
    }
    return cells;
}

SweepSpec sweep_from_json(const json& j) {
    if (!j.is_object()) config_error("sweep spec must be a JSON object");
    reject_unknown_keys(j, {"name", "base", "axes", "aggregation", "keep_trajectories", "jobs"},
                        "sweep spec");
    SweepSpec s;
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (!j.contains("base")) config_error("sweep spec needs 'base'");
    s.base = config_from_json(j["base"]);
    if (!j.contains("axes") || !j["axes"].is_array()) config_error("sweep spec needs 'axes'");
    for (const auto& a : j["axes"]) {
        reject_unknown_keys(a, {"param", "values"}, "sweep axis");
        if (!a.contains("param") || !a["param"].is_string() || !a.contains("values") ||
            !a["values"].is_array() || a["values"].empty())
            config_error("sweep axis needs a string 'param' and nonempty 'values'");
        SweepAxis axis{a["param"].get<std::string>(), {}};
        for (const auto& v : a["values"]) axis.values.push_back(v);
        s.axes.push_back(std::move(axis));
    }
    const std::string agg = j.value("aggregation", std::string("median"));
    if (agg == "median")
        s.aggregation = Aggregation::Median;
    else if (agg == "mean")
        s.aggregation = Aggregation::Mean;
    else
        config_error("aggregation must be 'median' or 'mean'");
    s.keep_trajectories = j.value("keep_trajectories", false);
    s.jobs = static_cast<unsigned>(j.contains("jobs") ? get_count(j["jobs"], "jobs") : 1);
    return s;
}

json to_json(const SweepSpec& s) {
    json axes = json::array();
    for (const auto& a : s.axes) axes.push_back({{"param", a.param}, {"values", a.values}});
    return {{"name", s.name},
            {"base", to_json(s.base)},
            {"axes", axes},
            {"aggregation", to_string(s.aggregation)},
            {"keep_trajectories", s.keep_trajectories},
            {"jobs", s.jobs}};
}

CellRow aggregate_cell(const RunResult& run, Aggregation agg, std::size_t cell,
                       std::vector<std::pair<std::string, json>> assignment) {
    CellRow row;
    row.cell = cell;
    row.assignment = std::move(assignment);
    row.runs = run.trajectories.size();
    auto finite_or_inf = [](double v) {
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    std::vector<double> gx, gy, g, ts, calls;
    for (const auto& t : run.trajectories) {
        const Summary& s = t.summary;
        gx.push_back(finite_or_inf(s.final_det_grad_x_norm));
        gy.push_back(finite_or_inf(s.final_det_grad_y_norm));
        g.push_back(finite_or_inf(s.final_det_grad_norm()));
        calls.push_back(static_cast<double>(s.grad_calls));
        if (s.t_star) ts.push_back(static_cast<double>(*s.t_star));
        switch (t.termination) {
            case Termination::Completed: ++row.completed; break;
            case Termination::NonFinite: ++row.non_finite; break;
            case Termination::Stationary: ++row.stationary; break;
        }
    }
    row.final_det_grad_x_norm = aggregate(gx, agg);
    row.final_det_grad_y_norm = aggregate(gy, agg);
    row.final_det_grad_norm = aggregate(g, agg);
    row.reached_stage_ii = ts.size();
    if (!ts.empty()) row.t_star = aggregate(ts, agg);
    row.grad_calls = aggregate(calls, agg);
    return row;
}

SweepResult run_sweep(const SweepSpec& spec) {
    SweepResult result;
    result.spec = spec;
    const auto configs = expand_cells(spec);
    const auto product = index_product(spec.axes);
    result.cells.resize(configs.size());
    parallel_for(configs.size(), spec.jobs,
                 [&](std::size_t i) { result.cells[i] = run_experiment(configs[i], i); });
    for (std::size_t i = 0; i < configs.size(); ++i)
        result.table.push_back(aggregate_cell(result.cells[i], spec.aggregation, i,
                                              assignment_of(spec, product[i])));
    return result;
}

void write_sweep_table(std::ostream& os, const SweepResult& result) {
    const std::string agg = to_string(result.spec.aggregation);
    os << "cell";
    for (const auto& a : result.spec.axes) os << ',' << a.param;
    os << ",runs," << agg << "_final_det_grad_x_norm," << agg << "_final_det_grad_y_norm," << agg
       << "_final_det_grad_norm," << agg << "_t_star,reached_stage_ii,completed,non_finite,"
       << "stationary," << agg << "_grad_calls\n";
    for (const auto& r : result.table) {
        os << r.cell;
        for (const auto& [param, v] : r.assignment)
            os << ',' << (v.is_string() ? v.get<std::string>() : format_double(v.get<double>()));
        os << ',' << r.runs << ',' << format_double(r.final_det_grad_x_norm) << ','
           << format_double(r.final_det_grad_y_norm) << ',' << format_double(r.final_det_grad_norm)
           << ',' << (r.t_star ? format_double(*r.t_star) : std::string()) << ','
           << r.reached_stage_ii << ',' << r.completed << ',' << r.non_finite << ','
           << r.stationary << ',' << format_double(r.grad_calls) << '\n';
    }
}

void write_sweep(const SweepResult& result, const fs::path& dir, OutputFormat format) {
    ensure_directory(dir);
    {
        auto os = open_for_write(dir / (result.spec.name + ".table.csv"));
        write_sweep_table(os, result);
    }
    if (!result.spec.keep_trajectories) return;
    for (const auto& cell : result.cells) write_run(cell, dir, cell.config.name, format);
}

// ---------------------------------------------------------------------------
// Ablation

AblationSpec ablation_from_json(const json& j) {
    if (!j.is_object()) config_error("ablation spec must be a JSON object");
    reject_unknown_keys(j, {"name", "base", "alphas", "jobs"}, "ablation spec");
    AblationSpec s;
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (!j.contains("base")) config_error("ablation spec needs 'base'");
    s.base = config_from_json(j["base"]);
    s.alphas = get_vector(j.value("alphas", json()), "alphas");
    if (s.alphas.empty()) config_error("alphas must be nonempty");
    s.jobs = static_cast<unsigned>(j.contains("jobs") ? get_count(j["jobs"], "jobs") : 1);
    return s;
}

AblationResult run_ablation(const AblationSpec& spec) {
    for (double a : spec.alphas)
        if (!(a > 0.5 && a < 1.0))
            throw std::invalid_argument("ablation alpha " + format_double(a) +
                                        " outside (0.5, 1): beta = 1 - alpha must be < alpha");
    SweepSpec sweep;
    sweep.name = spec.name;
    sweep.base = spec.base;
    sweep.jobs = spec.jobs;
    SweepAxis axis{"alpha_complement", {}};
    for (double a : spec.alphas) axis.values.emplace_back(a);
    sweep.axes.push_back(std::move(axis));
    SweepResult sr = run_sweep(sweep);

    AblationResult out;
    out.spec = spec;
    out.kappa = make_problem(spec.base.problem_id, spec.base.problem_params)->constants().kappa;
    for (std::size_t i = 0; i < spec.alphas.size(); ++i) {
        AblationRow row;
        row.alpha = spec.alphas[i];
        row.beta = 1.0 - spec.alphas[i];
        row.run = std::move(sr.cells[i]);
        const Summary& s = row.run.trajectories.front().summary;
        row.t_star = s.t_star;
        row.stays_in_stage_ii = s.stays_in_stage_ii;
        out.rows.push_back(std::move(row));
    }
    return out;
}

void write_ablation(const AblationResult& result, const fs::path& dir, OutputFormat format) {
    ensure_directory(dir);
    auto os = open_for_write(dir / (result.spec.name + ".table.csv"));
    os << "alpha,beta,stage_threshold,t_star,stays_in_stage_ii,final_det_grad_x_norm,"
          "final_det_grad_y_norm,trajectory\n";
    for (const auto& r : result.rows) {
        const std::string name = result.spec.name + ".alpha" + format_double(r.alpha);
        const Summary& s = r.run.trajectories.front().summary;
        os << format_double(r.alpha) << ',' << format_double(r.beta) << ','
           << format_double(1.0 / result.kappa) << ','
           << (r.t_star ? std::to_string(*r.t_star) : std::string()) << ','
           << (r.stays_in_stage_ii ? "true" : "false") << ','
           << format_double(s.final_det_grad_x_norm) << ','
           << format_double(s.final_det_grad_y_norm) << ',' << name << '\n';
        write_run(r.run, dir, name, format);
    }
}

}  // namespace tiada
