#include "tiada/problems.hpp"

#include <algorithm>
#include <cmath>

namespace tiada {

ProblemConstants ProblemConstants::make(double l, double mu) {
    if (!(l > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("problem constants: l and mu must be positive");
    ProblemConstants c;
    c.l = l;
    c.mu = mu;
    c.kappa = l / mu;
    if (!(c.kappa >= 1.0)) throw std::invalid_argument("problem constants: kappa = l/mu < 1");
    return c;
}

namespace {

class QuadraticProblem final : public MinimaxProblem {
public:
    explicit QuadraticProblem(double L) : L_(L) {
        // Hessian blocks: xx = -L^2, xy = yx = L, yy = -1.
        constants_ = ProblemConstants::make(std::max({L * L, L, 1.0}), 1.0);
        constants_.quad_L = L;
        constants_.Lhat = 0.0;
        // Eigenvalues of [[-L^2, L], [L, -1]] are 0 and -(L^2 + 1).
        constants_.hessian_spectral_norm = L * L + 1.0;
        constants_.assumptions = {.smooth = true,
                                  .strongly_concave = true,
                                  .interior_optimum = true,
                                  .bounded_stochastic_grad = false,
                                  .bounded_primal = true,
                                  .second_order_smooth = true};
    }

    std::string_view id() const override { return "quadratic"; }
    ParamMap params() const override { return {{"L", L_}}; }
    std::size_t dim_x() const override { return 1; }
    std::size_t dim_y() const override { return 1; }

    double value(std::span<const double> x, std::span<const double> y) const override {
        const double a = x[0], b = y[0];
        return -0.5 * b * b + L_ * a * b - 0.5 * L_ * L_ * a * a;
    }

    void gradient(std::span<const double> x, std::span<const double> y, std::span<double> gx,
                  std::span<double> gy) const override {
        gx[0] = L_ * y[0] - L_ * L_ * x[0];
        gy[0] = -y[0] + L_ * x[0];
    }

    std::optional<Vector> inner_solution(std::span<const double> x) const override {
        return Vector{L_ * x[0]};
    }

    std::optional<double> primal_value(std::span<const double>) const override { return 0.0; }

private:
    double L_;
};

class McCormickProblem final : public MinimaxProblem {
public:
    McCormickProblem() {
        // xx block: -sin(x1+x2) 11^T + 2 [[1,-1],[-1,1]], eigenvalues -2 sin(.) and 4;
        // xy = I, yy = -I. The blockwise constant is therefore 4 everywhere.
        constants_ = ProblemConstants::make(4.0, 1.0);
        constants_.Lhat = 0.0;
        // The full Hessian splits into [[a, 1], [1, -1]] blocks with a in {4} and [-2, 2].
        constants_.hessian_spectral_norm = (3.0 + std::sqrt(29.0)) / 2.0;
        constants_.assumptions = {.smooth = true,
                                  .strongly_concave = true,
                                  .interior_optimum = true,
                                  .bounded_stochastic_grad = false,
                                  .bounded_primal = false,
                                  .second_order_smooth = true};
    }

    std::string_view id() const override { return "mccormick"; }
    ParamMap params() const override { return {}; }
    std::size_t dim_x() const override { return 2; }
    std::size_t dim_y() const override { return 2; }

    double value(std::span<const double> x, std::span<const double> y) const override {
        const double d = x[0] - x[1];
        return std::sin(x[0] + x[1]) + d * d - 1.5 * x[0] + 2.5 * x[1] + 1.0 + x[0] * y[0] +
               x[1] * y[1] - 0.5 * (y[0] * y[0] + y[1] * y[1]);
    }

    void gradient(std::span<const double> x, std::span<const double> y, std::span<double> gx,
                  std::span<double> gy) const override {
        const double c = std::cos(x[0] + x[1]);
        const double d = x[0] - x[1];
        gx[0] = c + 2.0 * d - 1.5 + y[0];
        gx[1] = c - 2.0 * d + 2.5 + y[1];
        gy[0] = x[0] - y[0];
        gy[1] = x[1] - y[1];
    }

    std::optional<Vector> inner_solution(std::span<const double> x) const override {
        return Vector{x[0], x[1]};
    }

    std::optional<double> primal_value(std::span<const double> x) const override {
        const double d = x[0] - x[1];
        return std::sin(x[0] + x[1]) + d * d - 1.5 * x[0] + 2.5 * x[1] + 1.0 +
               0.5 * (x[0] * x[0] + x[1] * x[1]);
    }
};

}  // namespace

ProblemPtr quadratic_problem(double L) {
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("quadratic problem: L must be positive and finite");
    return std::make_shared<QuadraticProblem>(L);
}

ProblemPtr mccormick_problem() { return std::make_shared<McCormickProblem>(); }

ProblemPtr make_problem(std::string_view id, const ParamMap& params) {
    if (id == "quadratic") {
        double L = 2.0;
        for (const auto& [k, v] : params) {
            if (k == "L")
                L = v;
            else
                throw std::invalid_argument("quadratic problem: unknown parameter '" + k + "'");
        }
        return quadratic_problem(L);
    }
    if (id == "mccormick") {
        if (!params.empty())
            throw std::invalid_argument("mccormick problem takes no parameters");
        return mccormick_problem();
    }
    throw std::invalid_argument("unknown problem id '" + std::string(id) + "'");
}

void check_dimensions(const MinimaxProblem& problem, const Iterate& p) {
    if (p.x.size() != problem.dim_x() || p.y.size() != problem.dim_y())
        throw std::invalid_argument("iterate dimensions (" + std::to_string(p.x.size()) + ", " +
                                    std::to_string(p.y.size()) + ") do not match problem '" +
                                    std::string(problem.id()) + "' (" +
                                    std::to_string(problem.dim_x()) + ", " +
                                    std::to_string(problem.dim_y()) + ")");
}

double evaluate(const MinimaxProblem& problem, const Iterate& p) {
    check_dimensions(problem, p);
    return problem.value(p.x, p.y);
}

GradientPair gradient(const MinimaxProblem& problem, const Iterate& p) {
    check_dimensions(problem, p);
    GradientPair g{Vector(problem.dim_x()), Vector(problem.dim_y())};
    problem.gradient(p.x, p.y, g.gx, g.gy);
    return g;
}

Vector inner_solution(const MinimaxProblem& problem, std::span<const double> x) {
    if (x.size() != problem.dim_x())
        throw std::invalid_argument("inner_solution: x dimension mismatch");
    auto y = problem.inner_solution(x);
    if (!y)
        throw UnsupportedOperation("problem '" + std::string(problem.id()) +
                                   "' has no closed-form inner solution");
    return *std::move(y);
}

}  // namespace tiada
