#include "tiada/domain.hpp"

#include <algorithm>
#include <stdexcept>

namespace tiada {

DomainSpec DomainSpec::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("box domain: lower/upper must be nonempty and equal length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= upper[i]))
            throw std::invalid_argument("box domain: lower must be <= upper componentwise");
    }
    DomainSpec d;
    d.kind_ = Box{std::move(lower), std::move(upper)};
    return d;
}

DomainSpec DomainSpec::ball(Vector center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("ball domain: radius must be positive and finite");
    if (center.empty()) throw std::invalid_argument("ball domain: center must be nonempty");
    DomainSpec d;
    d.kind_ = Ball{std::move(center), radius};
    return d;
}

std::string DomainSpec::name() const {
    if (std::holds_alternative<Box>(kind_)) return "box";
    if (std::holds_alternative<Ball>(kind_)) return "ball";
    return "unconstrained";
}

void DomainSpec::check_dimension(std::size_t dim) const {
    std::size_t expected = dim;
    if (const auto* b = std::get_if<Box>(&kind_)) expected = b->lower.size();
    if (const auto* b = std::get_if<Ball>(&kind_)) expected = b->center.size();
    if (expected != dim)
        throw std::invalid_argument("domain dimension " + std::to_string(expected) +
                                    " does not match dual dimension " + std::to_string(dim));
}

bool operator==(const Unconstrained&, const Unconstrained&) { return true; }
bool operator==(const Box& a, const Box& b) { return a.lower == b.lower && a.upper == b.upper; }
bool operator==(const Ball& a, const Ball& b) {
    return a.center == b.center && a.radius == b.radius;
}
bool operator==(const DomainSpec& a, const DomainSpec& b) { return a.kind_ == b.kind_; }

namespace {

Vector project_ball(const Ball& ball, std::span<const double> y) {
    const double dist = distance(y, ball.center);
    if (dist <= ball.radius) return Vector(y.begin(), y.end());

    double scale = ball.radius / dist;
    Vector z(y.size());
    for (;;) {
        for (std::size_t i = 0; i < y.size(); ++i)
            z[i] = ball.center[i] + (y[i] - ball.center[i]) * scale;
        if (distance(z, ball.center) <= ball.radius) return z;
        scale *= 1.0 - 0x1p-52;
    }
}

}  // namespace

Vector project(const DomainSpec& domain, std::span<const double> y) {
    domain.check_dimension(y.size());
    return std::visit(
        [&](const auto& k) -> Vector {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Unconstrained>) {
                return Vector(y.begin(), y.end());
            } else if constexpr (std::is_same_v<K, Box>) {
                Vector z(y.size());
                for (std::size_t i = 0; i < y.size(); ++i)
                    z[i] = std::clamp(y[i], k.lower[i], k.upper[i]);
                return z;
            } else {
                return project_ball(k, y);
            }
        },
        domain.kind());
}

}  // namespace tiada
