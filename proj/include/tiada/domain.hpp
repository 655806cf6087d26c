#pragma once

#include <string>
#include <variant>

#include "tiada/vec.hpp"

namespace tiada {

struct Unconstrained {};

struct Box {
    Vector lower;
    Vector upper;
};

struct Ball {
    Vector center;
    double radius = 1.0;
};

/// Closed convex feasible set for the dual variable.
class DomainSpec {
public:
    DomainSpec() = default;
    static DomainSpec unconstrained() { return DomainSpec{}; }
    /// Throws std::invalid_argument unless lower <= upper componentwise.
    static DomainSpec box(Vector lower, Vector upper);
    /// Throws std::invalid_argument unless radius > 0.
    static DomainSpec ball(Vector center, double radius);

    bool is_unconstrained() const { return std::holds_alternative<Unconstrained>(kind_); }
    const std::variant<Unconstrained, Box, Ball>& kind() const { return kind_; }
    std::string name() const;

    /// Throws std::invalid_argument if the domain's dimension disagrees with `dim`.
    void check_dimension(std::size_t dim) const;

    friend bool operator==(const DomainSpec& a, const DomainSpec& b);

private:
    std::variant<Unconstrained, Box, Ball> kind_;
};

bool operator==(const Unconstrained&, const Unconstrained&);
bool operator==(const Box& a, const Box& b);
bool operator==(const Ball& a, const Ball& b);

/// Euclidean projection onto the domain.
///
/// The ball projection shrinks the scaled point until its computed distance
/// from the center is <= radius, so a projected point is a fixed point of the
/// projection bit for bit.
Vector project(const DomainSpec& domain, std::span<const double> y);

}  // namespace tiada
