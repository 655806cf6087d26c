#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tiada/diagnostics.hpp"
#include "tiada/domain.hpp"
#include "tiada/moments.hpp"
#include "tiada/oracle.hpp"

namespace tiada {

/// Initial stepsizes, exponents and initial second moments.
struct TiAdaParams {
    double eta_x = 1.0;
    double eta_y = 0.2;
    double alpha = 0.6;
    double beta = 0.4;
    double v0_x = 1.0;
    double v0_y = 1.0;

    /// 0 < beta < alpha < 1 and positive stepsizes / initial moments.
    void validate() const;
    /// Positivity only; the single-variable baselines allow alpha == beta.
    void validate_positive() const;
};

struct TiAdaState {
    Iterate iterate;
    double vx = 1.0;
    double vy = 1.0;
    std::uint64_t t = 0;

    static TiAdaState initial(Iterate start, const TiAdaParams& params);
};

/// Per-coordinate second moments with their global sums.
struct CoordState {
    Iterate iterate;
    Vector vx;
    Vector vy;
    double vx_sum = 0.0;
    double vy_sum = 0.0;
    std::uint64_t t = 0;

    /// Every coordinate starts at v0, so the global sums start at d * v0.
    static CoordState initial(Iterate start, const TiAdaParams& params);
};

/// State of the generalized (first moment, psi) update.
struct MomentState {
    Iterate iterate;
    Vector mx;
    Vector my;
    SecondMoment psi_x;
    SecondMoment psi_y;
    std::uint64_t t = 0;

    static MomentState initial(Iterate start, const MomentScheme& scheme,
                               const TiAdaParams& params);
};

struct GdaState {
    Iterate iterate;
    std::uint64_t t = 0;
};

template <class State>
struct StepResult {
    State state;
    StepDiagnostics diag;
};

// One step each. All of them query the oracle exactly once, accumulate the
// second moments with g_t, and only then form the step-t stepsizes. The
// objective-side fields of the returned diagnostics are left for annotate().

StepResult<TiAdaState> tiada_step(const TiAdaState& state, const TiAdaParams& params,
                                  GradientSource& oracle, const DomainSpec& domain);

/// TiAda with the primal denominator (v^x)^alpha instead of max{v^x, v^y}^alpha.
StepResult<TiAdaState> tiada_nomax_step(const TiAdaState& state, const TiAdaParams& params,
                                        GradientSource& oracle, const DomainSpec& domain);

/// GDA where x and y each use their own moments (no coupling).
StepResult<MomentState> adaptive_gda_step(const MomentState& state, const MomentScheme& scheme,
                                          const TiAdaParams& params, GradientSource& oracle,
                                          const DomainSpec& domain);

/// TiAda's max-coupling on top of an arbitrary moment scheme.
StepResult<MomentState> generalized_tiada_step(const MomentState& state,
                                               const MomentScheme& scheme,
                                               const TiAdaParams& params,
                                               GradientSource& oracle, const DomainSpec& domain);

/// Per-coordinate denominators for x, damped by the global factor
/// (v^x)^alpha / max{v^x, v^y}^alpha; per-coordinate denominators for y.
StepResult<CoordState> coordwise_tiada_step(const CoordState& state, const TiAdaParams& params,
                                            GradientSource& oracle, const DomainSpec& domain);

/// Fixed-stepsize simultaneous GDA.
StepResult<GdaState> gda_step(const GdaState& state, double eta_x, double eta_y,
                              GradientSource& oracle, const DomainSpec& domain);

/// (v^x)^alpha / max{v^x, v^y}^alpha, in (0, 1].
double max_factor(double vx, double vy, double alpha);

// ---------------------------------------------------------------------------
// Uniform stepping interface used by the runner and the harness.

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual std::string_view id() const = 0;
    virtual const Iterate& iterate() const = 0;
    /// Advances one (outer) iteration. Throws NonFiniteGradient, leaving the
    /// optimizer at its previous state.
    virtual StepDiagnostics step(GradientSource& oracle, const DomainSpec& domain) = 0;
};

/// Ids accepted by make_optimizer.
const std::vector<std::string>& optimizer_ids();

/// Builds an optimizer from an id and a flat parameter map. Recognized keys:
/// eta_x, eta_y (required), alpha, beta, v0_x, v0_y, beta1, gamma, inner_cap,
/// inner_mode (0 = stopping criterion, 1 = min(k, cap) steps; default picks by
/// oracle stochasticity at construction). Throws std::invalid_argument for
/// unknown ids, unknown keys or invalid values.
std::unique_ptr<Optimizer> make_optimizer(std::string_view id, const ParamMap& params,
                                          Iterate start, bool stochastic_oracle);

/// Parameters after defaults are applied, as recorded in outputs.
ParamMap resolved_params(std::string_view id, const ParamMap& params, bool stochastic_oracle);

struct RunOptions {
    std::uint64_t T = 1;
    std::uint64_t record_every = 1;
    double stationarity_tol = 0.0;  // stop once the noise-free gradient norm falls below; 0 = off
};

/// Steps `opt` for up to T iterations. Rows at t % record_every == 0 and at the
/// last executed step are kept; the summary covers every step.
TrajectoryRecord run_optimizer(Optimizer& opt, GradientSource& oracle, const DomainSpec& domain,
                               const RunOptions& options);

// ---------------------------------------------------------------------------
// Two-loop NeAda-style baseline with AdaGrad stepsizes.

enum class InnerMode { Criterion, Fixed };

struct NeAdaParams {
    TiAdaParams step;  // alpha/beta are the AdaGrad exponents, 1/2 by default
    std::uint64_t inner_cap = 100;
    InnerMode mode = InnerMode::Criterion;
};

struct NeAdaState {
    Iterate iterate;
    double vx = 1.0;
    double vy = 1.0;  // dual accumulator persists across outer iterations
    std::uint64_t k = 1;
    std::uint64_t last_inner_steps = 0;
};

/// One outer iteration: inner AdaGrad ascent on y (until ||g^y|| <= 1/(k+1) or
/// inner_cap steps in Criterion mode; exactly min(k, inner_cap) steps in Fixed
/// mode), then one AdaGrad descent step on x.
StepResult<NeAdaState> neada_outer_step(const NeAdaState& state, const NeAdaParams& params,
                                        GradientSource& oracle, const DomainSpec& domain);

TrajectoryRecord neada_run(const NeAdaParams& params, Iterate start, GradientSource& oracle,
                           const DomainSpec& domain, std::uint64_t T);

}  // namespace tiada
