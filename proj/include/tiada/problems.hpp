#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tiada/domain.hpp"
#include "tiada/vec.hpp"

namespace tiada {

using ParamMap = std::map<std::string, double>;

/// A primal/dual point (x, y).
struct Iterate {
    Vector x;
    Vector y;

    friend bool operator==(const Iterate&, const Iterate&) = default;
};

struct GradientPair {
    Vector gx;
    Vector gy;

    friend bool operator==(const GradientPair&, const GradientPair&) = default;
};

/// Which of the standing assumptions of the NC-SC analysis a problem satisfies.
struct AssumptionFlags {
    bool smooth = false;                   // l-smooth jointly in (x, y)
    bool strongly_concave = false;         // mu-strongly concave in y
    bool interior_optimum = false;         // y*(x) in the interior of the domain
    bool bounded_stochastic_grad = false;  // ||grad F|| <= G almost surely
    bool bounded_primal = false;           // Phi(x) <= Phi_max
    bool second_order_smooth = false;      // Lipschitz grad_xy and grad_yy
};

struct ProblemConstants {
    double l = 1.0;
    double mu = 1.0;
    double kappa = 1.0;
    std::optional<double> quad_L;
    std::optional<double> G;
    std::optional<double> Lhat;
    /// Spectral norm of the full Hessian (sup over the domain). Reported only;
    /// `l` uses the blockwise constant of the smoothness assumption.
    double hessian_spectral_norm = 0.0;
    AssumptionFlags assumptions;

    /// Throws std::invalid_argument unless l > 0, mu > 0 and kappa == l / mu >= 1.
    static ProblemConstants make(double l, double mu);
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Analytic minimax objective f(x, y) with exact gradients. Immutable.
class MinimaxProblem {
public:
    virtual ~MinimaxProblem() = default;

    virtual std::string_view id() const = 0;
    virtual ParamMap params() const = 0;
    virtual std::size_t dim_x() const = 0;
    virtual std::size_t dim_y() const = 0;

    virtual double value(std::span<const double> x, std::span<const double> y) const = 0;
    virtual void gradient(std::span<const double> x, std::span<const double> y,
                          std::span<double> gx, std::span<double> gy) const = 0;

    /// Closed-form argmax_y f(x, y), when one exists.
    virtual std::optional<Vector> inner_solution(std::span<const double> x) const = 0;
    /// Closed-form Phi(x) = max_y f(x, y), when one exists.
    virtual std::optional<double> primal_value(std::span<const double> x) const = 0;

    const ProblemConstants& constants() const { return constants_; }
    const DomainSpec& domain() const { return domain_; }

protected:
    ProblemConstants constants_;
    DomainSpec domain_;
};

using ProblemPtr = std::shared_ptr<const MinimaxProblem>;

/// f(x, y) = -y^2/2 + L x y - L^2 x^2 / 2 with x, y scalars.
ProblemPtr quadratic_problem(double L);

/// sin(x1+x2) + (x1-x2)^2 - 1.5 x1 + 2.5 x2 + 1 + <x, y> - |y|^2/2.
ProblemPtr mccormick_problem();

/// Looks a problem up by id ("quadratic" with param "L", or "mccormick").
/// Throws std::invalid_argument for unknown ids or parameters.
ProblemPtr make_problem(std::string_view id, const ParamMap& params);

/// Throws std::invalid_argument when p's dimensions do not match the problem.
void check_dimensions(const MinimaxProblem& problem, const Iterate& p);

double evaluate(const MinimaxProblem& problem, const Iterate& p);
GradientPair gradient(const MinimaxProblem& problem, const Iterate& p);
/// Throws UnsupportedOperation if the problem has no closed-form inner solution.
Vector inner_solution(const MinimaxProblem& problem, std::span<const double> x);

}  // namespace tiada
