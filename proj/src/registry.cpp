#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "tiada/optimizers.hpp"

namespace tiada {

namespace {

enum class Family { TiAda, TiAdaNoMax, Coupled, Uncoupled, Coord, NeAda };

struct OptimizerInfo {
    std::string id;
    Family family;
    SecondMomentKind second = SecondMomentKind::CumulativeSum;
    bool has_first_moment = false;
};

const std::vector<OptimizerInfo>& registry() {
    static const std::vector<OptimizerInfo> r = {
        {"tiada", Family::TiAda},
        {"tiada-nomax", Family::TiAdaNoMax},
        {"tiada-adam", Family::Coupled, SecondMomentKind::Ema, true},
        {"tiada-amsgrad", Family::Coupled, SecondMomentKind::MaxEma, true},
        {"adagrad-gda", Family::Uncoupled, SecondMomentKind::CumulativeSum},
        {"adam-gda", Family::Uncoupled, SecondMomentKind::Ema, true},
        {"amsgrad-gda", Family::Uncoupled, SecondMomentKind::MaxEma, true},
        {"gda", Family::Uncoupled, SecondMomentKind::ConstantOne},
        {"neada-adagrad", Family::NeAda},
        {"tiada-coord", Family::Coord},
    };
    return r;
}

const OptimizerInfo& lookup(std::string_view id) {
    for (const auto& info : registry())
        if (info.id == id) return info;
    throw std::invalid_argument("unknown optimizer id '" + std::string(id) + "'");
}

bool time_scale_adaptive(Family f) {
    return f == Family::TiAda || f == Family::TiAdaNoMax || f == Family::Coupled ||
           f == Family::Coord;
}

ParamMap resolve(const OptimizerInfo& info, const ParamMap& params, bool stochastic_oracle) {
    std::set<std::string> allowed = {"eta_x", "eta_y", "alpha", "beta", "v0_x", "v0_y"};
    if (info.has_first_moment) allowed.insert({"beta1", "gamma"});
    if (info.family == Family::NeAda) allowed.insert({"inner_cap", "inner_mode"});
    for (const auto& [k, v] : params) {
        if (!allowed.count(k))
            throw std::invalid_argument("optimizer '" + info.id + "': unknown parameter '" + k +
                                        "'");
        if (!std::isfinite(v))
            throw std::invalid_argument("optimizer '" + info.id + "': parameter '" + k +
                                        "' is not finite");
    }
    for (const char* key : {"eta_x", "eta_y"})
        if (!params.count(key))
            throw std::invalid_argument("optimizer '" + info.id + "': missing required '" + key +
                                        "'");

    ParamMap out;
    const bool adaptive = time_scale_adaptive(info.family);
    out["alpha"] = adaptive ? 0.6 : 0.5;
    out["beta"] = adaptive ? 0.4 : 0.5;
    out["v0_x"] = 1.0;
    out["v0_y"] = 1.0;
    if (info.has_first_moment) {
        out["beta1"] = 0.9;
        out["gamma"] = 0.999;
    }
    if (info.family == Family::NeAda) {
        out["inner_cap"] = 100;
        out["inner_mode"] = stochastic_oracle ? 1 : 0;
    }
    for (const auto& [k, v] : params) out[k] = v;
    return out;
}

TiAdaParams step_params(const ParamMap& p) {
    return {p.at("eta_x"), p.at("eta_y"), p.at("alpha"), p.at("beta"), p.at("v0_x"), p.at("v0_y")};
}

class TiAdaOptimizer final : public Optimizer {
public:
    TiAdaOptimizer(std::string id, const TiAdaParams& params, Iterate start, bool use_max)
        : id_(std::move(id)), params_(params), state_(TiAdaState::initial(std::move(start), params)),
          use_max_(use_max) {
        params_.validate();
    }
    std::string_view id() const override { return id_; }
    const Iterate& iterate() const override { return state_.iterate; }
    StepDiagnostics step(GradientSource& oracle, const DomainSpec& domain) override {
        auto r = use_max_ ? tiada_step(state_, params_, oracle, domain)
                          : tiada_nomax_step(state_, params_, oracle, domain);
        state_ = std::move(r.state);
        return r.diag;
    }

private:
    std::string id_;
    TiAdaParams params_;
    TiAdaState state_;
    bool use_max_;
};

class MomentOptimizer final : public Optimizer {
public:
    MomentOptimizer(std::string id, const MomentScheme& scheme, const TiAdaParams& params,
                    Iterate start, bool coupled)
        : id_(std::move(id)), scheme_(scheme), params_(params),
          state_(MomentState::initial(std::move(start), scheme, params)), coupled_(coupled) {
        scheme_.validate();
        if (coupled_)
            params_.validate();
        else
            params_.validate_positive();
    }
    std::string_view id() const override { return id_; }
    const Iterate& iterate() const override { return state_.iterate; }
    StepDiagnostics step(GradientSource& oracle, const DomainSpec& domain) override {
        auto r = coupled_ ? generalized_tiada_step(state_, scheme_, params_, oracle, domain)
                          : adaptive_gda_step(state_, scheme_, params_, oracle, domain);
        state_ = std::move(r.state);
        return r.diag;
    }

private:
    std::string id_;
    MomentScheme scheme_;
    TiAdaParams params_;
    MomentState state_;
    bool coupled_;
};

class CoordOptimizer final : public Optimizer {
public:
    CoordOptimizer(const TiAdaParams& params, Iterate start)
        : params_(params), state_(CoordState::initial(std::move(start), params)) {
        params_.validate();
    }
    std::string_view id() const override { return "tiada-coord"; }
    const Iterate& iterate() const override { return state_.iterate; }
    StepDiagnostics step(GradientSource& oracle, const DomainSpec& domain) override {
        auto r = coordwise_tiada_step(state_, params_, oracle, domain);
        state_ = std::move(r.state);
        return r.diag;
    }

private:
    TiAdaParams params_;
    CoordState state_;
};

class NeAdaOptimizer final : public Optimizer {
public:
    NeAdaOptimizer(const NeAdaParams& params, Iterate start) : params_(params) {
        params_.step.validate_positive();
        if (params_.inner_cap < 1) throw std::invalid_argument("NeAda inner_cap must be >= 1");
        state_.iterate = std::move(start);
        state_.vx = params.step.v0_x;
        state_.vy = params.step.v0_y;
    }
    std::string_view id() const override { return "neada-adagrad"; }
    const Iterate& iterate() const override { return state_.iterate; }
    StepDiagnostics step(GradientSource& oracle, const DomainSpec& domain) override {
        auto r = neada_outer_step(state_, params_, oracle, domain);
        state_ = std::move(r.state);
        return r.diag;
    }

private:
    NeAdaParams params_;
    NeAdaState state_;
};

std::uint64_t as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v))
        throw std::invalid_argument(std::string(what) + " must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

const std::vector<std::string>& optimizer_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& info : registry()) v.push_back(info.id);
        return v;
    }();
    return ids;
}

ParamMap resolved_params(std::string_view id, const ParamMap& params, bool stochastic_oracle) {
    return resolve(lookup(id), params, stochastic_oracle);
}

std::unique_ptr<Optimizer> make_optimizer(std::string_view id, const ParamMap& params,
                                          Iterate start, bool stochastic_oracle) {
    const OptimizerInfo& info = lookup(id);
    const ParamMap p = resolve(info, params, stochastic_oracle);
    const TiAdaParams sp = step_params(p);
    MomentScheme scheme{0.0, info.second, 0.999};
    if (info.has_first_moment) {
        scheme.first_moment = p.at("beta1");
        scheme.gamma = p.at("gamma");
    }

    switch (info.family) {
        case Family::TiAda:
            return std::make_unique<TiAdaOptimizer>(info.id, sp, std::move(start), true);
        case Family::TiAdaNoMax:
            return std::make_unique<TiAdaOptimizer>(info.id, sp, std::move(start), false);
        case Family::Coupled:
            return std::make_unique<MomentOptimizer>(info.id, scheme, sp, std::move(start), true);
        case Family::Uncoupled:
            return std::make_unique<MomentOptimizer>(info.id, scheme, sp, std::move(start), false);
        case Family::Coord:
            return std::make_unique<CoordOptimizer>(sp, std::move(start));
        case Family::NeAda: {
            NeAdaParams np;
            np.step = sp;
            np.inner_cap = as_count(p.at("inner_cap"), "inner_cap");
            const double mode = p.at("inner_mode");
            if (mode != 0.0 && mode != 1.0)
                throw std::invalid_argument("inner_mode must be 0 (criterion) or 1 (fixed)");
            np.mode = mode == 0.0 ? InnerMode::Criterion : InnerMode::Fixed;
            return std::make_unique<NeAdaOptimizer>(np, std::move(start));
        }
    }
    throw std::invalid_argument("unknown optimizer id '" + std::string(id) + "'");
}

TrajectoryRecord run_optimizer(Optimizer& opt, GradientSource& oracle, const DomainSpec& domain,
                               const RunOptions& options) {
    if (options.T < 1) throw std::invalid_argument("iteration budget T must be >= 1");
    if (options.record_every < 1) throw std::invalid_argument("record_every must be >= 1");

    const MinimaxProblem& problem = oracle.problem();
    check_dimensions(problem, opt.iterate());

    TrajectoryRecord rec;
    rec.problem_id = std::string(problem.id());
    rec.optimizer_id = std::string(opt.id());
    rec.kappa = problem.constants().kappa;
    rec.record_every = options.record_every;

    SummaryBuilder summary;
    bool last_recorded = true;
    StepDiagnostics last;
    for (std::uint64_t t = 0; t < options.T; ++t) {
        const Iterate before = opt.iterate();
        StepDiagnostics d;
        try {
            d = opt.step(oracle, domain);
        } catch (const NonFiniteGradient& e) {
            rec.termination = Termination::NonFinite;
            rec.abort_message = e.what();
            break;
        }
        annotate(d, problem, before);
        summary.add(d);
        last_recorded = (t % options.record_every == 0) || (t + 1 == options.T);
        if (last_recorded) rec.steps.push_back(d);
        last = d;

        if (options.stationarity_tol > 0.0) {
            const GradientPair g = gradient(problem, opt.iterate());
            if (std::hypot(norm(g.gx), norm(g.gy)) <= options.stationarity_tol) {
                rec.termination = Termination::Stationary;
                break;
            }
        }
    }
    if (!last_recorded) rec.steps.push_back(last);

    rec.final_iterate = opt.iterate();
    rec.summary = summary.finish(gradient_or_nan(problem, rec.final_iterate));
    return rec;
}

TrajectoryRecord neada_run(const NeAdaParams& params, Iterate start, GradientSource& oracle,
                           const DomainSpec& domain, std::uint64_t T) {
    NeAdaOptimizer opt(params, std::move(start));
    RunOptions o;
    o.T = T;
    TrajectoryRecord rec = run_optimizer(opt, oracle, domain, o);
    rec.optimizer_params = {{"eta_x", params.step.eta_x},
                            {"eta_y", params.step.eta_y},
                            {"alpha", params.step.alpha},
                            {"beta", params.step.beta},
                            {"v0_x", params.step.v0_x},
                            {"v0_y", params.step.v0_y},
                            {"inner_cap", static_cast<double>(params.inner_cap)},
                            {"inner_mode", params.mode == InnerMode::Criterion ? 0.0 : 1.0}};
    return rec;
}

}  // namespace tiada
