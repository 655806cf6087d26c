// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance               run every criterion
//   acceptance --criterion N run only criterion N (exit code reflects it)

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "tiada/harness.hpp"

using namespace tiada;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-6;
constexpr double kFig1GradTol = 1e-2;
constexpr double kBoundRelSlack = 1e-12;
constexpr double kAdaGradRatioBand = 0.05;
constexpr double kRateLo = 0.35, kRateHi = 0.65;
constexpr double kAdamTol = 1e-6;
constexpr double kAggRelTol = 1e-12;
constexpr double kNonexpansiveSlack = 1e-12;
constexpr double kFastLimitSeconds = 1.0;
constexpr double kStochasticLimitSeconds = 30.0;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

ExperimentConfig quadratic_config(const std::string& optimizer, double eta_x, double eta_y,
                                  std::uint64_t T) {
    ExperimentConfig c;
    c.problem_id = "quadratic";
    c.problem_params = {{"L", 2.0}};
    c.optimizer_id = optimizer;
    c.optimizer_params = {{"eta_x", eta_x}, {"eta_y", eta_y}};
    c.T = T;
    c.initial_point = {{1.0}, {0.01}};
    return c;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome out;
    Stopwatch clock;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0.0;
    for (const ProblemPtr& p : {quadratic_problem(2.0), mccormick_problem()}) {
        for (int i = 0; i < 100; ++i) {
            Iterate it{Vector(p->dim_x()), Vector(p->dim_y())};
            for (double& v : it.x) v = u(rng);
            for (double& v : it.y) v = u(rng);
            const GradientPair g = gradient(*p, it);
            const GradientPair fd = finite_difference_gradient(*p, it, kFdStep);
            double err = 0.0;
            for (std::size_t k = 0; k < g.gx.size(); ++k) err += std::pow(g.gx[k] - fd.gx[k], 2);
            for (std::size_t k = 0; k < g.gy.size(); ++k) err += std::pow(g.gy[k] - fd.gy[k], 2);
            const double rel = std::sqrt(err) / std::max(1.0, std::hypot(norm(g.gx), norm(g.gy)));
            worst = std::max(worst, rel);
        }
    }
    out.require(worst < kFdRelTol, "max relative error " + fmt(worst));
    out.require(clock.seconds() < kFastLimitSeconds, "runtime " + fmt(clock.seconds()) + " s");
    out.note("max rel err " + fmt(worst) + ", " + fmt(clock.seconds()) + " s");
    return out;
}

Outcome criterion2() {
    Outcome out;
    const auto q = quadratic_problem(2.0);
    {
        Stopwatch clock;
        const RunResult r = run_experiment(quadratic_config("tiada", 1.0, 0.2, 2000));
        const TrajectoryRecord& t = r.trajectories[0];
        const double final_sum = t.summary.final_det_grad_x_norm + t.summary.final_det_grad_y_norm;
        const StageTransition st = detect_stage_transition(t, q->constants().kappa);
        out.require(final_sum < kFig1GradTol, "TiAda final |gx|+|gy| = " + fmt(final_sum));
        out.require(st.t_star.has_value() && st.stays_below, "TiAda has no persistent Stage II");
        out.require(clock.seconds() < kFastLimitSeconds, "TiAda runtime " + fmt(clock.seconds()));
        out.note("TiAda final " + fmt(final_sum) + " t*=" +
                 (st.t_star ? std::to_string(*st.t_star) : std::string("none")));
    }
    {
        Stopwatch clock;
        const RunResult r = run_experiment(quadratic_config("adagrad-gda", 1.0, 0.2, 2000));
        const TrajectoryRecord& t = r.trajectories[0];
        auto norm_at = [](const StepDiagnostics& d) { return std::hypot(d.det_grad_x_norm, d.det_grad_y_norm); };
        const bool aborted = t.termination == Termination::NonFinite;
        const double at10 = norm_at(t.steps.at(10));
        const double last = norm_at(t.steps.back());
        out.require(aborted || last > at10, "AdaGrad-GDA did not diverge");
        out.require(clock.seconds() < kFastLimitSeconds, "AdaGrad runtime " + fmt(clock.seconds()));
        out.note("AdaGrad |g| step10 " + fmt(at10) + " -> last " + fmt(last) +
                 (aborted ? " (aborted)" : ""));
    }
    return out;
}

Outcome criterion3() {
    Outcome out;
    struct Case {
        std::string problem;
        double eta_x, eta_y, alpha, beta;
    };
    std::vector<Case> cases;
    for (double r : {5.0, 1.0, 0.5, 0.25, 0.125, 20.0}) cases.push_back({"quadratic", 0.2 * r, 0.2, 0.6, 0.4});
    for (double a : {0.59, 0.62, 0.75}) cases.push_back({"quadratic", 4.0, 0.2, a, 1.0 - a});
    for (double r : {1.0 / 0.01, 1.0 / 0.03, 1.0 / 0.05}) cases.push_back({"mccormick", r * 0.01, 0.01, 0.6, 0.4});

    std::uint64_t violations = 0, steps = 0;
    for (const Case& c : cases) {
        ExperimentConfig cfg;
        cfg.problem_id = c.problem;
        cfg.optimizer_id = "tiada";
        cfg.optimizer_params = {{"eta_x", c.eta_x}, {"eta_y", c.eta_y}, {"alpha", c.alpha}, {"beta", c.beta}};
        cfg.T = 2000;
        cfg.initial_point = c.problem == "quadratic" ? Iterate{{1.0}, {0.01}} : Iterate{{0.0, 0.0}, {0.0, 0.0}};
        const TrajectoryRecord t = run_experiment(cfg).trajectories[0];
        double prev = INFINITY;
        for (const auto& d : t.steps) {
            const double bound = c.eta_x / (c.eta_y * std::pow(d.v_y, c.alpha - c.beta));
            if (d.ratio > bound * (1.0 + kBoundRelSlack)) ++violations;
            if (bound > prev) ++violations;
            prev = bound;
            ++steps;
        }
    }
    out.require(cases.size() >= 10 && steps >= 10 * 2000, "too few steps checked");
    out.require(violations == 0, std::to_string(violations) + " violations");
    out.note(std::to_string(cases.size()) + " configs, " + std::to_string(steps) + " steps, " +
             std::to_string(violations) + " violations");
    return out;
}

Outcome criterion4() {
    Outcome out;
    std::uint64_t violations = 0;
    double widest = 0.0;
    for (double r : {1.0, 0.5, 0.25, 0.125, 5.0}) {
        const TrajectoryRecord t = run_experiment(quadratic_config("adagrad-gda", 0.2 * r, 0.2, 1001)).trajectories[0];
        if (t.steps.size() < 1001) {
            ++violations;
            continue;
        }
        double lo = INFINITY, hi = 0.0;
        for (std::size_t i = 10; i <= 1000; ++i) {
            lo = std::min(lo, t.steps[i].ratio);
            hi = std::max(hi, t.steps[i].ratio);
        }
        const double spread = hi / lo - 1.0;
        widest = std::max(widest, spread);
        if (!(spread < kAdaGradRatioBand)) ++violations;
    }
    out.require(violations == 0, std::to_string(violations) + " ratios outside the band");
    out.note("widest relative spread " + fmt(widest));
    return out;
}

Outcome criterion5() {
    Outcome out;
    Stopwatch clock;
    const TrajectoryRecord t = run_experiment(quadratic_config("tiada", 1.0, 0.2, 4000)).trajectories[0];
    const double rate = rate_check(t, 2000, 4000);
    out.require(rate >= kRateLo && rate <= kRateHi, "rate " + fmt(rate));
    out.require(clock.seconds() < kFastLimitSeconds, "runtime " + fmt(clock.seconds()));
    out.note("A(4000)/A(2000) = " + fmt(rate));
    return out;
}

Outcome criterion6() {
    Outcome out;
    AblationSpec spec;
    spec.base = quadratic_config("tiada", 4.0, 0.2, 20000);
    spec.alphas = {0.59, 0.60, 0.61, 0.62};
    const AblationResult res = run_ablation(spec);
    std::string stars;
    std::optional<std::uint64_t> prev;
    for (const auto& row : res.rows) {
        const StageTransition st = detect_stage_transition(row.run.trajectories[0], res.kappa);
        stars += (stars.empty() ? "" : ",") + (st.t_star ? std::to_string(*st.t_star) : std::string("none"));
        out.require(st.t_star.has_value(), "alpha " + fmt(row.alpha) + " never enters Stage II");
        if (st.t_star && prev) out.require(*st.t_star <= *prev, "t* increases at alpha " + fmt(row.alpha));
        if (st.t_star) prev = st.t_star;
    }
    out.note("t* = " + stars + " (kappa " + fmt(res.kappa) + ")");
    return out;
}

Outcome criterion7() {
    Outcome out;
    Stopwatch clock;
    SweepSpec spec;
    spec.base.problem_id = "mccormick";
    spec.base.optimizer_params = {{"eta_x", 1.0}, {"eta_y", 0.01}, {"alpha", 0.6}, {"beta", 0.4}};
    spec.base.T = 10000;
    spec.base.initial_point = {{0.0, 0.0}, {0.0, 0.0}};
    spec.base.noise_stddev = 0.1;
    spec.base.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const std::vector<double> ratios{1.0 / 0.01, 1.0 / 0.03, 1.0 / 0.05};
    spec.axes = {{"ratio", {ratios[0], ratios[1], ratios[2]}},
                 {"optimizer", {"tiada", "adagrad-gda", "tiada-nomax"}}};
    const SweepResult res = run_sweep(spec);

    // Medians recomputed here from the per-seed final iterates.
    const ProblemPtr m = mccormick_problem();
    auto median_gx = [&](std::size_t cell) {
        std::vector<double> v;
        for (const auto& t : res.cells[cell].trajectories) {
            const double g = norm(gradient_or_nan(*m, t.final_iterate).gx);
            v.push_back(std::isnan(g) ? INFINITY : g);
        }
        return median(v);
    };
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        const double ti = median_gx(3 * r), ada = median_gx(3 * r + 1), nomax = median_gx(3 * r + 2);
        out.require(ti <= ada, "r=" + fmt(ratios[r]) + ": TiAda " + fmt(ti) + " > AdaGrad " + fmt(ada));
        out.require(ti <= nomax, "r=" + fmt(ratios[r]) + ": TiAda " + fmt(ti) + " > no-max " + fmt(nomax));
        out.note("r=" + fmt(ratios[r]) + " " + fmt(ti) + "/" + fmt(ada) + "/" + fmt(nomax));
    }
    out.require(clock.seconds() < kStochasticLimitSeconds, "runtime " + fmt(clock.seconds()));
    out.note(fmt(clock.seconds()) + " s");
    return out;
}

Outcome criterion8() {
    Outcome out;
    const auto q = quadratic_problem(2.0);
    const Iterate start{{1.0}, {0.01}};
    const TiAdaParams p{1.0, 0.2, 0.6, 0.4, 1.0, 1.0};
    DeterministicOracle o1(q), o2(q), o3(q), o4(q), o5(q);
    TiAdaState ref = TiAdaState::initial(start, p);
    MomentState gen = MomentState::initial(start, MomentScheme::adagrad(), p);
    CoordState coord = CoordState::initial(start, p);
    const TiAdaParams gp{0.05, 0.2, 0.5, 0.5, 1.0, 1.0};
    MomentState one = MomentState::initial(start, MomentScheme::gda(), gp);
    GdaState plain{start, 0};
    int gen_diff = 0, coord_diff = 0, gda_diff = 0;
    for (int t = 0; t < 1000; ++t) {
        ref = tiada_step(ref, p, o1, {}).state;
        gen = generalized_tiada_step(gen, MomentScheme::adagrad(), p, o2, {}).state;
        coord = coordwise_tiada_step(coord, p, o3, {}).state;
        one = adaptive_gda_step(one, MomentScheme::gda(), gp, o4, {}).state;
        plain = gda_step(plain, gp.eta_x, gp.eta_y, o5, {}).state;
        gen_diff += !(gen.iterate == ref.iterate);
        coord_diff += !(coord.iterate == ref.iterate);
        gda_diff += !(one.iterate == plain.iterate);
    }
    out.require(gen_diff == 0, "generalized differs at " + std::to_string(gen_diff) + " steps");
    out.require(coord_diff == 0, "coordinate-wise differs at " + std::to_string(coord_diff) + " steps");
    out.require(gda_diff == 0, "constant-one differs at " + std::to_string(gda_diff) + " steps");
    out.note("1000 steps compared bitwise");
    return out;
}

Outcome criterion9() {
    Outcome out;
    std::mt19937_64 rng(99);
    std::lognormal_distribution<double> stream(0.0, 2.0);
    int violations = 0;
    SecondMoment ams(MomentScheme::amsgrad(0.9, 0.999), 1.0);
    double prev = ams.value();
    for (int i = 0; i < 10000; ++i) {
        const double v = ams.update(stream(rng));
        violations += v < prev;
        prev = v;
    }
    out.require(violations == 0, std::to_string(violations) + " AMSGrad decreases");

    const double c = 2.5;
    SecondMoment adam(MomentScheme::adam(0.9, 0.999), 1.0);
    for (int i = 0; i < 100000; ++i) adam.update(c);
    const double err = std::abs(adam.value() - c);
    out.require(err <= kAdamTol, "Adam error " + fmt(err));
    out.note("AMSGrad violations " + std::to_string(violations) + ", Adam |psi-c| " + fmt(err));
    return out;
}

Outcome criterion10() {
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / ("tiada_acceptance_" + std::to_string(std::random_device{}()));
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };

    ExperimentConfig c;
    c.name = "det";
    c.problem_id = "mccormick";
    c.optimizer_params = {{"eta_x", 0.5}, {"eta_y", 0.01}};
    c.T = 500;
    c.initial_point = {{0.0, 0.0}, {0.0, 0.0}};
    c.noise_stddev = 0.1;
    c.seeds = {3, 4};
    write_run(run_experiment(c), dir / "a", c.name, OutputFormat::Csv);
    write_run(run_experiment(c), dir / "b", c.name, OutputFormat::Csv);
    for (auto s : c.seeds) {
        const std::string f = "det.seed" + std::to_string(s) + ".csv";
        out.require(slurp(dir / "a" / f) == slurp(dir / "b" / f), f + " differs between reruns");
    }
    const auto summary = nlohmann::json::parse(slurp(dir / "a" / "det.summary.json"));
    out.require(config_from_json(summary.at("config")) == c, "config echo does not round-trip");

    SweepSpec spec;
    spec.name = "agg";
    spec.base = c;
    spec.base.seeds = {0, 1, 2, 3, 4};
    spec.axes = {{"optimizer", {"tiada", "adagrad-gda", "tiada-adam"}}};
    spec.keep_trajectories = true;
    const SweepResult res = run_sweep(spec);
    write_sweep(res, dir / "sweep", OutputFormat::Csv);
    // Recompute each median from the written per-seed summaries.
    double worst = 0.0;
    for (std::size_t i = 0; i < res.table.size(); ++i) {
        const auto s = nlohmann::json::parse(slurp(dir / "sweep" / ("agg.cell" + std::to_string(i) + ".summary.json")));
        std::vector<double> gx, gy;
        for (const auto& t : s.at("trajectories")) {
            gx.push_back(t.at("final_det_grad_x_norm").get<double>());
            gy.push_back(t.at("final_det_grad_y_norm").get<double>());
        }
        auto rel = [](double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
        worst = std::max({worst, rel(median(gx), res.table[i].final_det_grad_x_norm),
                          rel(median(gy), res.table[i].final_det_grad_y_norm)});
    }
    out.require(worst <= kAggRelTol, "aggregate mismatch " + fmt(worst));
    out.note("CSV byte-identical, config round-trips, aggregate rel err " + fmt(worst));
    fs::remove_all(dir);
    return out;
}

Outcome criterion11() {
    Outcome out;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    int idem = 0, expand = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t dim = 1 + i % 4;
        auto vec = [&] {
            Vector v(dim);
            for (double& e : v) e = u(rng);
            return v;
        };
        DomainSpec d;
        if (i % 3 == 1) {
            Vector lo(dim), hi(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                const double a = u(rng), b = u(rng);
                lo[k] = std::min(a, b);
                hi[k] = std::max(a, b);
            }
            d = DomainSpec::box(lo, hi);
        } else if (i % 3 == 2) {
            d = DomainSpec::ball(vec(), 0.1 + std::abs(u(rng)));
        }
        const Vector a = vec(), b = vec();
        const Vector pa = project(d, a), pb = project(d, b);
        idem += !(project(d, pa) == pa) + !(project(d, pb) == pb);
        expand += distance(pa, pb) > distance(a, b) + kNonexpansiveSlack;
    }
    out.require(idem == 0, std::to_string(idem) + " idempotence failures");
    out.require(expand == 0, std::to_string(expand) + " expansions");
    out.note("10000 pairs, " + std::to_string(idem) + " idempotence / " + std::to_string(expand) + " expansion failures");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{
        criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11};

    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::cerr << "no criterion " << only << '\n';
        return 2;
    }

    int failed = 0;
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) {
        if (only != 0 && n != only) continue;
        Outcome o;
        try {
            o = criteria[n - 1]();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << n << ": " << (o.passed ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
        failed += !o.passed;
    }
    return failed == 0 ? 0 : 1;
}
