#include "tiada/optimizers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace tiada {

void TiAdaParams::validate_positive() const {
    if (!(eta_x > 0.0) || !(eta_y > 0.0))
        throw std::invalid_argument("initial stepsizes eta_x and eta_y must be positive");
    if (!(v0_x > 0.0) || !(v0_y > 0.0))
        throw std::invalid_argument("initial second moments v0_x and v0_y must be positive");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("exponents alpha and beta must be positive");
}

void TiAdaParams::validate() const {
    validate_positive();
    if (!(beta < alpha) || !(alpha < 1.0))
        throw std::invalid_argument("TiAda requires 0 < beta < alpha < 1 (got alpha=" +
                                    std::to_string(alpha) + ", beta=" + std::to_string(beta) +
                                    ")");
}

TiAdaState TiAdaState::initial(Iterate start, const TiAdaParams& params) {
    return {std::move(start), params.v0_x, params.v0_y, 0};
}

CoordState CoordState::initial(Iterate start, const TiAdaParams& params) {
    CoordState s;
    s.vx.assign(start.x.size(), params.v0_x);
    s.vy.assign(start.y.size(), params.v0_y);
    for (double v : s.vx) s.vx_sum += v;
    for (double v : s.vy) s.vy_sum += v;
    s.iterate = std::move(start);
    return s;
}

MomentState MomentState::initial(Iterate start, const MomentScheme& scheme,
                                 const TiAdaParams& params) {
    MomentState s;
    s.mx.assign(start.x.size(), 0.0);
    s.my.assign(start.y.size(), 0.0);
    s.psi_x = SecondMoment(scheme, params.v0_x);
    s.psi_y = SecondMoment(scheme, params.v0_y);
    s.iterate = std::move(start);
    return s;
}

double max_factor(double vx, double vy, double alpha) {
    return std::pow(vx, alpha) / std::pow(std::max(vx, vy), alpha);
}

namespace {

void descend(Vector& x, double step, std::span<const double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] - step * g[i];
}

Vector ascend(std::span<const double> y, double step, std::span<const double> g,
              const DomainSpec& domain) {
    Vector z(y.begin(), y.end());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] + step * g[i];
    return project(domain, z);
}

StepDiagnostics base_diag(std::uint64_t t, const GradientSource& oracle, const GradientPair& g,
                          double eff_x, double eff_y, double vx, double vy) {
    StepDiagnostics d;
    d.t = t;
    d.grad_calls = oracle.calls();
    d.grad_x_norm = norm(g.gx);
    d.grad_y_norm = norm(g.gy);
    d.eff_step_x = eff_x;
    d.eff_step_y = eff_y;
    d.ratio = eff_x / eff_y;
    d.v_x = vx;
    d.v_y = vy;
    return d;
}

StepResult<TiAdaState> tiada_like_step(const TiAdaState& state, const TiAdaParams& params,
                                       GradientSource& oracle, const DomainSpec& domain,
                                       bool use_max) {
    params.validate();
    domain.check_dimension(state.iterate.y.size());
    const GradientPair g = oracle.query(state.iterate);

    TiAdaState next = state;
    next.vx = state.vx + squared_norm(g.gx);
    next.vy = state.vy + squared_norm(g.gy);
    assert(next.vx > 0.0 && next.vy > 0.0);

    const double primal_v = use_max ? std::max(next.vx, next.vy) : next.vx;
    const double eff_x = params.eta_x / std::pow(primal_v, params.alpha);
    const double eff_y = params.eta_y / std::pow(next.vy, params.beta);

    descend(next.iterate.x, eff_x, g.gx);
    next.iterate.y = ascend(state.iterate.y, eff_y, g.gy, domain);
    ++next.t;

    StepDiagnostics d = base_diag(state.t, oracle, g, eff_x, eff_y, next.vx, next.vy);
    d.damping = use_max ? max_factor(next.vx, next.vy, params.alpha) : 1.0;
    return {std::move(next), d};
}

StepResult<MomentState> moment_step(const MomentState& state, const MomentScheme& scheme,
                                    const TiAdaParams& params, GradientSource& oracle,
                                    const DomainSpec& domain, bool coupled) {
    scheme.validate();
    domain.check_dimension(state.iterate.y.size());
    const GradientPair g = oracle.query(state.iterate);

    MomentState next = state;
    // psi is fed the raw gradient norms, the first moment the raw gradients.
    const double px = next.psi_x.update(squared_norm(g.gx));
    const double py = next.psi_y.update(squared_norm(g.gy));
    update_first_moment(next.mx, g.gx, scheme.first_moment);
    update_first_moment(next.my, g.gy, scheme.first_moment);
    assert(px > 0.0 && py > 0.0);

    const double primal_v = coupled ? std::max(px, py) : px;
    const double eff_x = params.eta_x / std::pow(primal_v, params.alpha);
    const double eff_y = params.eta_y / std::pow(py, params.beta);

    descend(next.iterate.x, eff_x, next.mx);
    next.iterate.y = ascend(state.iterate.y, eff_y, next.my, domain);
    ++next.t;

    StepDiagnostics d = base_diag(state.t, oracle, g, eff_x, eff_y, px, py);
    d.damping = coupled ? max_factor(px, py, params.alpha) : 1.0;
    return {std::move(next), d};
}

}  // namespace

StepResult<TiAdaState> tiada_step(const TiAdaState& state, const TiAdaParams& params,
                                  GradientSource& oracle, const DomainSpec& domain) {
    return tiada_like_step(state, params, oracle, domain, true);
}

StepResult<TiAdaState> tiada_nomax_step(const TiAdaState& state, const TiAdaParams& params,
                                        GradientSource& oracle, const DomainSpec& domain) {
    return tiada_like_step(state, params, oracle, domain, false);
}

StepResult<MomentState> adaptive_gda_step(const MomentState& state, const MomentScheme& scheme,
                                          const TiAdaParams& params, GradientSource& oracle,
                                          const DomainSpec& domain) {
    params.validate_positive();
    return moment_step(state, scheme, params, oracle, domain, false);
}

StepResult<MomentState> generalized_tiada_step(const MomentState& state,
                                               const MomentScheme& scheme,
                                               const TiAdaParams& params,
                                               GradientSource& oracle,
                                               const DomainSpec& domain) {
    params.validate();
    return moment_step(state, scheme, params, oracle, domain, true);
}

StepResult<CoordState> coordwise_tiada_step(const CoordState& state, const TiAdaParams& params,
                                            GradientSource& oracle, const DomainSpec& domain) {
    params.validate();
    domain.check_dimension(state.iterate.y.size());
    const GradientPair g = oracle.query(state.iterate);
    if (state.vx.size() != g.gx.size() || state.vy.size() != g.gy.size())
        throw std::invalid_argument("coordinate-wise state does not match problem dimensions");

    CoordState next = state;
    for (std::size_t i = 0; i < g.gx.size(); ++i) next.vx[i] = state.vx[i] + g.gx[i] * g.gx[i];
    for (std::size_t i = 0; i < g.gy.size(); ++i) next.vy[i] = state.vy[i] + g.gy[i] * g.gy[i];
    next.vx_sum = 0.0;
    next.vy_sum = 0.0;
    for (double v : next.vx) next.vx_sum += v;
    for (double v : next.vy) next.vy_sum += v;

    // eta^x (v^x)^a / (max^a (v^x_i)^a) written as eta^x / (max^a (v^x_i / v^x)^a):
    // with a single coordinate the second factor is exactly 1.
    const double max_pow = std::pow(std::max(next.vx_sum, next.vy_sum), params.alpha);
    for (std::size_t i = 0; i < next.iterate.x.size(); ++i) {
        const double share = std::pow(next.vx[i] / next.vx_sum, params.alpha);
        const double step = params.eta_x / (max_pow * share);
        next.iterate.x[i] = next.iterate.x[i] - step * g.gx[i];
    }
    Vector z = state.iterate.y;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double step = params.eta_y / std::pow(next.vy[i], params.beta);
        z[i] = z[i] + step * g.gy[i];
    }
    next.iterate.y = project(domain, z);
    ++next.t;

    // Reported stepsizes are the global (norm-based) equivalents.
    const double eff_x = params.eta_x / max_pow;
    const double eff_y = params.eta_y / std::pow(next.vy_sum, params.beta);
    StepDiagnostics d = base_diag(state.t, oracle, g, eff_x, eff_y, next.vx_sum, next.vy_sum);
    d.damping = max_factor(next.vx_sum, next.vy_sum, params.alpha);
    return {std::move(next), d};
}

StepResult<GdaState> gda_step(const GdaState& state, double eta_x, double eta_y,
                              GradientSource& oracle, const DomainSpec& domain) {
    if (!(eta_x > 0.0) || !(eta_y > 0.0))
        throw std::invalid_argument("GDA stepsizes must be positive");
    domain.check_dimension(state.iterate.y.size());
    const GradientPair g = oracle.query(state.iterate);
    GdaState next = state;
    descend(next.iterate.x, eta_x, g.gx);
    next.iterate.y = ascend(state.iterate.y, eta_y, g.gy, domain);
    ++next.t;
    return {std::move(next), base_diag(state.t, oracle, g, eta_x, eta_y, 1.0, 1.0)};
}

StepResult<NeAdaState> neada_outer_step(const NeAdaState& state, const NeAdaParams& params,
                                        GradientSource& oracle, const DomainSpec& domain) {
    params.step.validate_positive();
    if (params.inner_cap < 1) throw std::invalid_argument("NeAda inner_cap must be >= 1");
    domain.check_dimension(state.iterate.y.size());
    const TiAdaParams& p = params.step;

    NeAdaState next = state;
    next.last_inner_steps = 0;
    GradientPair g;
    if (params.mode == InnerMode::Criterion) {
        const double tol = 1.0 / static_cast<double>(state.k + 1);
        for (;;) {
            g = oracle.query(next.iterate);
            if (norm(g.gy) <= tol || next.last_inner_steps == params.inner_cap) break;
            next.vy = next.vy + squared_norm(g.gy);
            next.iterate.y =
                ascend(next.iterate.y, p.eta_y / std::pow(next.vy, p.beta), g.gy, domain);
            ++next.last_inner_steps;
        }
    } else {
        const std::uint64_t inner = std::min(state.k, params.inner_cap);
        for (std::uint64_t i = 0; i < inner; ++i) {
            g = oracle.query(next.iterate);
            next.vy = next.vy + squared_norm(g.gy);
            next.iterate.y =
                ascend(next.iterate.y, p.eta_y / std::pow(next.vy, p.beta), g.gy, domain);
            ++next.last_inner_steps;
        }
        g = oracle.query(next.iterate);
    }

    next.vx = next.vx + squared_norm(g.gx);
    const double eff_x = p.eta_x / std::pow(next.vx, p.alpha);
    const double eff_y = p.eta_y / std::pow(next.vy, p.beta);
    descend(next.iterate.x, eff_x, g.gx);
    ++next.k;

    return {std::move(next), base_diag(state.k - 1, oracle, g, eff_x, eff_y, next.vx, next.vy)};
}

}  // namespace tiada
