#include "tiada/moments.hpp"

#include <algorithm>
#include <stdexcept>

namespace tiada {

std::string to_string(SecondMomentKind k) {
    switch (k) {
        case SecondMomentKind::CumulativeSum: return "cumulative-sum";
        case SecondMomentKind::ConstantOne: return "constant-one";
        case SecondMomentKind::Ema: return "ema";
        case SecondMomentKind::MaxEma: return "max-ema";
    }
    return "cumulative-sum";
}

void MomentScheme::validate() const {
    if (!(first_moment >= 0.0 && first_moment < 1.0))
        throw std::invalid_argument("first-moment parameter must lie in [0, 1)");
    if ((second == SecondMomentKind::Ema || second == SecondMomentKind::MaxEma) &&
        !(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("second-moment gamma must lie in (0, 1)");
}

SecondMoment::SecondMoment(const MomentScheme& scheme, double v0)
    : kind_(scheme.second), gamma_(scheme.gamma), ema_(v0), value_(v0) {
    if (kind_ == SecondMomentKind::ConstantOne) value_ = 1.0;
}

double SecondMoment::update(double u2) {
    switch (kind_) {
        case SecondMomentKind::CumulativeSum:
            value_ = value_ + u2;
            break;
        case SecondMomentKind::ConstantOne:
            break;
        case SecondMomentKind::Ema:
            ema_ = gamma_ * ema_ + (1.0 - gamma_) * u2;
            value_ = ema_;
            break;
        case SecondMomentKind::MaxEma:
            ema_ = gamma_ * ema_ + (1.0 - gamma_) * u2;
            value_ = std::max(value_, ema_);
            break;
    }
    return value_;
}

void update_first_moment(Vector& m, std::span<const double> g, double beta) {
    if (beta == 0.0) {
        m.assign(g.begin(), g.end());
        return;
    }
    if (m.size() != g.size()) m.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = beta * m[i] + (1.0 - beta) * g[i];
}

}  // namespace tiada
