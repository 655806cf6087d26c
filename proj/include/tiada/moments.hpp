#pragma once

#include <string>

#include "tiada/vec.hpp"

namespace tiada {

enum class SecondMomentKind {
    CumulativeSum,  // v0 + sum_i u_i^2 (AdaGrad / TiAda)
    ConstantOne,    // 1 (plain GDA)
    Ema,            // gamma^{t+1} v0 + (1-gamma) sum_i gamma^{t-i} u_i^2 (Adam, no bias correction)
    MaxEma,         // running max of v0 and the Ema sequence (AMSGrad)
};

std::string to_string(SecondMomentKind k);

/// First-moment parameter beta_t (constant) and second-moment function psi.
struct MomentScheme {
    double first_moment = 0.0;
    SecondMomentKind second = SecondMomentKind::CumulativeSum;
    double gamma = 0.999;

    static MomentScheme adagrad() { return {}; }
    static MomentScheme gda() { return {0.0, SecondMomentKind::ConstantOne, 0.999}; }
    static MomentScheme adam(double beta1 = 0.9, double gamma = 0.999) {
        return {beta1, SecondMomentKind::Ema, gamma};
    }
    static MomentScheme amsgrad(double beta1 = 0.9, double gamma = 0.999) {
        return {beta1, SecondMomentKind::MaxEma, gamma};
    }

    /// Throws std::invalid_argument unless first_moment in [0, 1) and, for the
    /// EMA kinds, gamma in (0, 1).
    void validate() const;
};

/// Incremental evaluation of psi(v0, {u_i^2}) over a stream of squared norms.
class SecondMoment {
public:
    SecondMoment() = default;
    SecondMoment(const MomentScheme& scheme, double v0);

    /// Feeds u_t^2 and returns psi after it.
    double update(double u2);
    double value() const { return value_; }

private:
    SecondMomentKind kind_ = SecondMomentKind::CumulativeSum;
    double gamma_ = 0.999;
    double ema_ = 0.0;
    double value_ = 0.0;
};

/// m <- beta m + (1 - beta) g. With beta == 0 the gradient is copied verbatim.
void update_first_moment(Vector& m, std::span<const double> g, double beta);

}  // namespace tiada
