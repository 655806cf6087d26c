#include "tiada/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tiada {

std::string to_string(Stage s) { return s == Stage::II ? "II" : "I"; }

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::NonFinite: return "non-finite";
        case Termination::Stationary: return "stationary";
    }
    return "completed";
}

Termination termination_from_string(const std::string& s) {
    if (s == "completed") return Termination::Completed;
    if (s == "non-finite") return Termination::NonFinite;
    if (s == "stationary") return Termination::Stationary;
    throw std::invalid_argument("unknown termination reason '" + s + "'");
}

void annotate(StepDiagnostics& d, const MinimaxProblem& problem, const Iterate& p) {
    d.f_value = evaluate(problem, p);
    d.phi_value = problem.primal_value(p.x);
    const GradientPair g = gradient(problem, p);
    d.det_grad_x_norm = norm(g.gx);
    d.det_grad_y_norm = norm(g.gy);
    d.stage = stage_of(d.ratio, problem.constants().kappa);
}

double Summary::final_det_grad_norm() const {
    return std::hypot(final_det_grad_x_norm, final_det_grad_y_norm);
}

void SummaryBuilder::add(const StepDiagnostics& d) {
    const double gn = std::hypot(d.det_grad_x_norm, d.det_grad_y_norm);
    if (s_.steps == 0) {
        s_.initial_det_grad_norm = gn;
        s_.min_det_grad_norm = gn;
    } else {
        s_.min_det_grad_norm = std::min(s_.min_det_grad_norm, gn);
    }
    sum_sq_x_ += d.det_grad_x_norm * d.det_grad_x_norm;
    sum_sq_y_ += d.det_grad_y_norm * d.det_grad_y_norm;

    if (d.stage == Stage::II) {
        if (!s_.t_star) {
            s_.t_star = d.t;
            s_.stays_in_stage_ii = true;
        }
    } else if (s_.t_star) {
        s_.stays_in_stage_ii = false;
    }
    ++s_.steps;
    s_.grad_calls = d.grad_calls;
}

Summary SummaryBuilder::finish(const GradientPair& final_det_grad) const {
    Summary s = s_;
    s.final_det_grad_x_norm = norm(final_det_grad.gx);
    s.final_det_grad_y_norm = norm(final_det_grad.gy);
    if (s.steps > 0) {
        s.avg_sq_grad_x = sum_sq_x_ / static_cast<double>(s.steps);
        s.avg_sq_grad_y = sum_sq_y_ / static_cast<double>(s.steps);
    }
    return s;
}

GradientPair gradient_or_nan(const MinimaxProblem& problem, const Iterate& p) {
    check_dimensions(problem, p);
    GradientPair g{Vector(problem.dim_x()), Vector(problem.dim_y())};
    if (all_finite(p.x) && all_finite(p.y)) {
        problem.gradient(p.x, p.y, g.gx, g.gy);
    } else {
        std::fill(g.gx.begin(), g.gx.end(), std::numeric_limits<double>::quiet_NaN());
        std::fill(g.gy.begin(), g.gy.end(), std::numeric_limits<double>::quiet_NaN());
    }
    return g;
}

namespace {

bool close(double a, double b, double rel_tol) {
    if (std::isnan(a) && std::isnan(b)) return true;
    if (a == b) return true;
    return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

Summary summarize(const TrajectoryRecord& traj, const MinimaxProblem& problem) {
    SummaryBuilder b;
    for (const auto& d : traj.steps) b.add(d);
    return b.finish(gradient_or_nan(problem, traj.final_iterate));
}

void verify_record(const TrajectoryRecord& traj, const MinimaxProblem& problem, double rel_tol) {
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const auto& d = traj.steps[i];
        if (traj.record_every == 1 && d.t != i)
            throw std::runtime_error("diagnostics not contiguous at row " + std::to_string(i));
        if (d.stage != stage_of(d.ratio, traj.kappa))
            throw std::runtime_error("stage label mismatch at t=" + std::to_string(d.t));
    }
    if (traj.record_every != 1) return;

    const Summary re = summarize(traj, problem);
    const Summary& s = traj.summary;
    auto fail = [](const char* what) {
        throw std::runtime_error(std::string("summary mismatch: ") + what);
    };
    if (re.steps != s.steps) fail("steps");
    if (re.grad_calls != s.grad_calls) fail("grad_calls");
    if (re.t_star != s.t_star) fail("t_star");
    if (re.stays_in_stage_ii != s.stays_in_stage_ii) fail("stays_in_stage_ii");
    if (!close(re.initial_det_grad_norm, s.initial_det_grad_norm, rel_tol)) fail("initial norm");
    if (!close(re.min_det_grad_norm, s.min_det_grad_norm, rel_tol)) fail("min norm");
    if (!close(re.final_det_grad_x_norm, s.final_det_grad_x_norm, rel_tol)) fail("final x norm");
    if (!close(re.final_det_grad_y_norm, s.final_det_grad_y_norm, rel_tol)) fail("final y norm");
    if (!close(re.avg_sq_grad_x, s.avg_sq_grad_x, rel_tol)) fail("avg_sq_grad_x");
    if (!close(re.avg_sq_grad_y, s.avg_sq_grad_y, rel_tol)) fail("avg_sq_grad_y");
}

StageTransition detect_stage_transition(const TrajectoryRecord& traj, double kappa) {
    StageTransition out;
    const double threshold = 1.0 / kappa;
    for (const auto& d : traj.steps) {
        if (d.ratio < threshold) {
            if (!out.t_star) {
                out.t_star = d.t;
                out.stays_below = true;
            }
        } else if (out.t_star) {
            out.stays_below = false;
        }
    }
    return out;
}

GradientPair finite_difference_gradient(const MinimaxProblem& problem, const Iterate& p,
                                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
    check_dimensions(problem, p);
    Iterate q = p;
    auto central = [&](double& coord) {
        const double saved = coord;
        coord = saved + h;
        const double fp = problem.value(q.x, q.y);
        coord = saved - h;
        const double fm = problem.value(q.x, q.y);
        coord = saved;
        return (fp - fm) / (2.0 * h);
    };
    GradientPair g{Vector(p.x.size()), Vector(p.y.size())};
    for (std::size_t i = 0; i < q.x.size(); ++i) g.gx[i] = central(q.x[i]);
    for (std::size_t i = 0; i < q.y.size(); ++i) g.gy[i] = central(q.y[i]);
    return g;
}

double rate_check(const TrajectoryRecord& traj, std::uint64_t T1, std::uint64_t T2) {
    if (T1 == 0 || T1 >= T2) throw std::invalid_argument("rate_check: need 0 < T1 < T2");
    if (traj.record_every != 1)
        throw std::invalid_argument("rate_check: needs every step recorded");
    if (traj.steps.size() < T2)
        throw std::invalid_argument("rate_check: insufficient trajectory length (" +
                                    std::to_string(traj.steps.size()) + " < " +
                                    std::to_string(T2) + ")");
    double sum = 0.0, sum_at_T1 = 0.0;
    for (std::uint64_t t = 0; t < T2; ++t) {
        const auto& d = traj.steps[t];
        sum += d.det_grad_x_norm * d.det_grad_x_norm + d.det_grad_y_norm * d.det_grad_y_norm;
        if (t + 1 == T1) sum_at_T1 = sum;
    }
    const double a1 = sum_at_T1 / static_cast<double>(T1);
    const double a2 = sum / static_cast<double>(T2);
    return a2 / a1;
}

double ratio_envelope(double eta_x, double eta_y, double alpha, double beta, double v_y) {
    return eta_x / (eta_y * std::pow(v_y, alpha - beta));
}

}  // namespace tiada
