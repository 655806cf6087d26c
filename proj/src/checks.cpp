#include "tiada/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tiada/harness.hpp"

namespace tiada {

namespace {

CheckResult pass(std::string name, std::string detail) {
    return {std::move(name), true, std::move(detail)};
}

CheckResult fail(std::string name, std::string detail) {
    return {std::move(name), false, std::move(detail)};
}

Vector uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (double& e : v) e = u(rng);
    return v;
}

bool same_iterate(const Iterate& a, const Iterate& b) { return a.x == b.x && a.y == b.y; }

}  // namespace

CheckResult check_gradients(std::uint64_t seed, int points) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (const ProblemPtr& problem : {quadratic_problem(2.0), mccormick_problem()}) {
        for (int i = 0; i < points; ++i) {
            const Iterate p{uniform_vector(rng, problem->dim_x(), -5.0, 5.0),
                            uniform_vector(rng, problem->dim_y(), -5.0, 5.0)};
            const GradientPair g = gradient(*problem, p);
            const GradientPair fd = finite_difference_gradient(*problem, p, 1e-6);
            double err = 0.0;
            for (std::size_t k = 0; k < g.gx.size(); ++k) err += std::pow(g.gx[k] - fd.gx[k], 2);
            for (std::size_t k = 0; k < g.gy.size(); ++k) err += std::pow(g.gy[k] - fd.gy[k], 2);
            const double scale = std::max(1.0, std::hypot(norm(g.gx), norm(g.gy)));
            const double rel = std::sqrt(err) / scale;
            worst = std::max(worst, rel);
            if (!(rel < 1e-6))
                return fail("gradients", std::string(problem->id()) + ": relative error " +
                                             format_double(rel));
        }
    }
    return pass("gradients", "max relative error " + format_double(worst));
}

CheckResult check_projections(std::uint64_t seed, int pairs) {
    std::mt19937_64 rng(seed);
    int violations = 0;
    double worst_excess = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const std::size_t dim = 1 + i % 3;
        DomainSpec domain;
        switch (i % 3) {
            case 0: domain = DomainSpec::unconstrained(); break;
            case 1: {
                Vector lo = uniform_vector(rng, dim, -2.0, 0.0);
                Vector hi = uniform_vector(rng, dim, 0.0, 2.0);
                domain = DomainSpec::box(lo, hi);
                break;
            }
            default:
                domain = DomainSpec::ball(uniform_vector(rng, dim, -1.0, 1.0),
                                          std::uniform_real_distribution<double>(0.1, 3.0)(rng));
        }
        const Vector a = uniform_vector(rng, dim, -10.0, 10.0);
        const Vector b = uniform_vector(rng, dim, -10.0, 10.0);
        const Vector pa = project(domain, a);
        const Vector pb = project(domain, b);
        if (project(domain, pa) != pa) ++violations;
        const double lhs = distance(pa, pb);
        const double rhs = distance(a, b);
        if (lhs > rhs + 1e-12) {
            ++violations;
            worst_excess = std::max(worst_excess, lhs - rhs);
        }
    }
    if (violations > 0)
        return fail("projections", std::to_string(violations) + " violations, worst excess " +
                                       format_double(worst_excess));
    return pass("projections", std::to_string(pairs) + " pairs, idempotent and nonexpansive");
}

CheckResult check_ratio_bound(std::uint64_t steps) {
    struct Case {
        ProblemPtr problem;
        Iterate start;
        TiAdaParams params;
    };
    std::vector<Case> cases;
    const Iterate qstart{{1.0}, {0.01}};
    for (double r : {1.0, 0.5, 0.25, 0.125, 5.0})
        cases.push_back({quadratic_problem(2.0), qstart, {r * 0.2, 0.2, 0.6, 0.4, 1.0, 1.0}});
    for (double a : {0.55, 0.7, 0.9})
        cases.push_back({quadratic_problem(2.0), qstart, {1.0, 0.2, a, 1.0 - a, 1.0, 1.0}});
    const Iterate mstart{{0.0, 0.0}, {0.0, 0.0}};
    for (double r : {1.0 / 0.01, 1.0 / 0.05})
        cases.push_back({mccormick_problem(), mstart, {r * 0.01, 0.01, 0.6, 0.4, 1.0, 1.0}});

    std::uint64_t violations = 0, checked = 0;
    for (const Case& c : cases) {
        DeterministicOracle oracle(c.problem);
        TiAdaState state = TiAdaState::initial(c.start, c.params);
        double previous_bound = INFINITY;
        for (std::uint64_t t = 0; t < steps; ++t) {
            auto r = tiada_step(state, c.params, oracle, DomainSpec::unconstrained());
            state = std::move(r.state);
            const double bound =
                ratio_envelope(c.params.eta_x, c.params.eta_y, c.params.alpha, c.params.beta,
                               r.diag.v_y);
            if (r.diag.ratio > bound * (1.0 + 1e-12)) ++violations;
            if (bound > previous_bound) ++violations;
            previous_bound = bound;
            ++checked;
        }
    }
    if (violations > 0)
        return fail("ratio-bound", std::to_string(violations) + " violations in " +
                                       std::to_string(checked) + " steps");
    return pass("ratio-bound", std::to_string(cases.size()) + " trajectories, " +
                                   std::to_string(checked) + " steps");
}

CheckResult check_reductions(std::uint64_t steps) {
    const ProblemPtr problem = quadratic_problem(2.0);
    const Iterate start{{1.0}, {0.01}};
    const DomainSpec domain;
    const TiAdaParams params{1.0, 0.2, 0.6, 0.4, 1.0, 1.0};

    DeterministicOracle o1(problem), o2(problem), o3(problem), o4(problem), o5(problem);
    TiAdaState ref = TiAdaState::initial(start, params);
    MomentState gen = MomentState::initial(start, MomentScheme::adagrad(), params);
    CoordState coord = CoordState::initial(start, params);

    const TiAdaParams gda_params{0.05, 0.2, 0.5, 0.5, 1.0, 1.0};
    MomentState const_one = MomentState::initial(start, MomentScheme::gda(), gda_params);
    GdaState plain{start, 0};

    for (std::uint64_t t = 0; t < steps; ++t) {
        auto a = tiada_step(ref, params, o1, domain);
        auto b = generalized_tiada_step(gen, MomentScheme::adagrad(), params, o2, domain);
        auto c = coordwise_tiada_step(coord, params, o3, domain);
        ref = std::move(a.state);
        gen = std::move(b.state);
        coord = std::move(c.state);
        if (!same_iterate(ref.iterate, gen.iterate))
            return fail("reductions", "generalized TiAda diverged from TiAda at t=" +
                                          std::to_string(t));
        if (!same_iterate(ref.iterate, coord.iterate))
            return fail("reductions", "coordinate-wise TiAda diverged from TiAda at t=" +
                                          std::to_string(t));

        auto d = adaptive_gda_step(const_one, MomentScheme::gda(), gda_params, o4, domain);
        auto e = gda_step(plain, gda_params.eta_x, gda_params.eta_y, o5, domain);
        const_one = std::move(d.state);
        plain = std::move(e.state);
        if (!same_iterate(const_one.iterate, plain.iterate))
            return fail("reductions", "constant-one GDA diverged from fixed-step GDA at t=" +
                                          std::to_string(t));
    }
    return pass("reductions", std::to_string(steps) + " steps bit-identical");
}

CheckResult check_moment_schemes(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> heavy(0.5);
    SecondMoment ams(MomentScheme::amsgrad(), 1.0);
    double prev = ams.value();
    for (int i = 0; i < 10000; ++i) {
        const double v = ams.update(heavy(rng));
        if (v < prev) return fail("moment-schemes", "AMSGrad psi decreased at step " +
                                                        std::to_string(i));
        prev = v;
    }
    const double c = 3.7;
    SecondMoment adam(MomentScheme::adam(0.9, 0.999), 1.0);
    for (int i = 0; i < 100000; ++i) adam.update(c);
    if (!(std::abs(adam.value() - c) <= 1e-6))
        return fail("moment-schemes", "Adam psi " + format_double(adam.value()) +
                                          " did not converge to " + format_double(c));
    return pass("moment-schemes", "AMSGrad monotone, Adam converges on constant stream");
}

CheckResult check_determinism(std::uint64_t seed) {
    ExperimentConfig c;
    c.problem_id = "mccormick";
    c.optimizer_id = "tiada";
    c.optimizer_params = {{"eta_x", 1.0}, {"eta_y", 0.01}};
    c.T = 300;
    c.initial_point = {{0.0, 0.0}, {0.0, 0.0}};
    c.noise_stddev = 0.1;
    c.seeds = {seed, seed + 1};

    const auto csv = [](const RunResult& r) {
        std::ostringstream os;
        for (const auto& t : r.trajectories) write_trajectory_csv(os, t);
        return os.str();
    };
    if (csv(run_experiment(c)) != csv(run_experiment(c)))
        return fail("determinism", "repeated run produced different CSV");
    if (config_from_json(to_json(c)) != c)
        return fail("determinism", "config echo does not round-trip");
    return pass("determinism", "repeat runs byte-identical, config round-trips");
}

CheckResult check_summaries(std::uint64_t seed) {
    SweepSpec spec;
    spec.base.problem_id = "mccormick";
    spec.base.optimizer_params = {{"eta_x", 1.0}, {"eta_y", 0.01}};
    spec.base.T = 300;
    spec.base.initial_point = {{0.0, 0.0}, {0.0, 0.0}};
    spec.base.noise_stddev = 0.1;
    spec.base.seeds = {seed, seed + 1, seed + 2};
    spec.axes.push_back({"optimizer", {"tiada", "adagrad-gda"}});
    const SweepResult result = run_sweep(spec);

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const RunResult& cell = result.cells[i];
        const ProblemPtr problem = make_problem(cell.config.problem_id, cell.config.problem_params);
        std::vector<double> gx;
        for (const auto& t : cell.trajectories) {
            try {
                verify_record(t, *problem);
            } catch (const std::exception& e) {
                return fail("summaries", e.what());
            }
            gx.push_back(norm(gradient(*problem, t.final_iterate).gx));
        }
        const double expect = median(gx);
        const double got = result.table[i].final_det_grad_x_norm;
        if (!(std::abs(expect - got) <= 1e-12 * std::max(std::abs(expect), std::abs(got))))
            return fail("summaries", "cell " + std::to_string(i) + " median mismatch");
    }
    return pass("summaries", "per-step summaries and sweep medians recomputed");
}

std::vector<CheckResult> run_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto guarded = [&](const char* name, auto fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back(fail(name, std::string("exception: ") + e.what()));
        }
    };
    guarded("gradients", [&] { return check_gradients(seed); });
    guarded("projections", [&] { return check_projections(seed + 1); });
    guarded("ratio-bound", [] { return check_ratio_bound(); });
    guarded("reductions", [] { return check_reductions(); });
    guarded("moment-schemes", [&] { return check_moment_schemes(seed + 2); });
    guarded("determinism", [&] { return check_determinism(seed + 3); });
    guarded("summaries", [&] { return check_summaries(seed + 4); });
    return out;
}

}  // namespace tiada
