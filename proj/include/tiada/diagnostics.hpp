#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tiada/problems.hpp"

namespace tiada {

enum class Stage { I, II };

/// Stage II iff the effective stepsize ratio is strictly below 1/kappa.
inline Stage stage_of(double ratio, double kappa) {
    return ratio < 1.0 / kappa ? Stage::II : Stage::I;
}

std::string to_string(Stage s);

/// Per-step record. Objective and noise-free gradient norms are evaluated at
/// the iterate the step started from, (x_t, y_t).
struct StepDiagnostics {
    std::uint64_t t = 0;
    std::uint64_t grad_calls = 0;  // cumulative oracle calls after this step
    double grad_x_norm = 0.0;      // norms of the gradients the update used
    double grad_y_norm = 0.0;
    double det_grad_x_norm = 0.0;
    double det_grad_y_norm = 0.0;
    double eff_step_x = 0.0;
    double eff_step_y = 0.0;
    double ratio = 0.0;
    double damping = 1.0;  // (v^x)^a / max{v^x, v^y}^a for max-coupled schemes
    double v_x = 0.0;      // second moments in the step-t denominators
    double v_y = 0.0;
    double f_value = 0.0;
    std::optional<double> phi_value;
    std::optional<Stage> stage;

    friend bool operator==(const StepDiagnostics&, const StepDiagnostics&) = default;
};

/// Fills f_value, phi_value, det_* norms and stage from the problem at p.
void annotate(StepDiagnostics& d, const MinimaxProblem& problem, const Iterate& p);

enum class Termination { Completed, NonFinite, Stationary };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct Summary {
    std::uint64_t steps = 0;
    std::uint64_t grad_calls = 0;
    std::optional<std::uint64_t> t_star;  // first step in Stage II
    bool stays_in_stage_ii = false;       // ratio < 1/kappa for every step after t_star
    double initial_det_grad_norm = 0.0;
    double min_det_grad_norm = 0.0;
    double final_det_grad_x_norm = 0.0;  // at the iterate after the last step
    double final_det_grad_y_norm = 0.0;
    double avg_sq_grad_x = 0.0;  // (1/T) sum_t ||grad_x f(x_t, y_t)||^2
    double avg_sq_grad_y = 0.0;

    double final_det_grad_norm() const;
};

/// Online summary over every executed step, independent of the record stride.
class SummaryBuilder {
public:
    void add(const StepDiagnostics& d);
    Summary finish(const GradientPair& final_det_grad) const;

private:
    Summary s_;
    double sum_sq_x_ = 0.0;
    double sum_sq_y_ = 0.0;
};

struct TrajectoryRecord {
    std::string problem_id;
    std::string optimizer_id;
    ParamMap optimizer_params;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t record_every = 1;
    std::vector<StepDiagnostics> steps;
    Termination termination = Termination::Completed;
    std::string abort_message;
    Iterate final_iterate;
    Summary summary;
};

/// Exact gradient at p, or NaNs when p itself is not finite.
GradientPair gradient_or_nan(const MinimaxProblem& problem, const Iterate& p);

/// Recomputes the summary from the stored rows and the final iterate. Exact
/// only when every step was recorded (record_every == 1).
Summary summarize(const TrajectoryRecord& traj, const MinimaxProblem& problem);

/// Throws std::runtime_error describing the first broken record invariant:
/// contiguous t from 0 (stride 1), stage labels matching stage_of, and the
/// stored summary matching a recomputation to `rel_tol`.
void verify_record(const TrajectoryRecord& traj, const MinimaxProblem& problem,
                   double rel_tol = 1e-12);

struct StageTransition {
    std::optional<std::uint64_t> t_star;
    bool stays_below = false;
};

/// Smallest recorded t with ratio_t < 1/kappa, and whether every later
/// recorded ratio stays below the threshold.
StageTransition detect_stage_transition(const TrajectoryRecord& traj, double kappa);

/// Central differences of f in every coordinate of x and y. Throws for h <= 0.
GradientPair finite_difference_gradient(const MinimaxProblem& problem, const Iterate& p,
                                        double h);

/// A(T2) / A(T1) where A(T) = (1/T) sum_{t<T} (||grad_x f||^2 + ||grad_y f||^2),
/// using the noise-free norms. Requires a stride-1 record with at least T2 rows.
double rate_check(const TrajectoryRecord& traj, std::uint64_t T1, std::uint64_t T2);

/// eta^x / (eta^y (v^y)^(alpha - beta)): the decreasing envelope of the TiAda
/// stepsize ratio.
double ratio_envelope(double eta_x, double eta_y, double alpha, double beta, double v_y);

}  // namespace tiada
