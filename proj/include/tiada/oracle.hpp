#pragma once

#include <cstdint>
#include <random>

#include "tiada/problems.hpp"

namespace tiada {

/// Thrown when an oracle produces a NaN or Inf gradient component.
class NonFiniteGradient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Source of (possibly stochastic) gradient pairs. Counts queries.
class GradientSource {
public:
    virtual ~GradientSource() = default;

    /// One oracle call: gx and gy at p. Stochastic sources draw independent
    /// noise for the two blocks.
    GradientPair query(const Iterate& p);

    virtual const MinimaxProblem& problem() const = 0;
    virtual bool stochastic() const = 0;
    std::uint64_t calls() const { return calls_; }

protected:
    virtual void fill(const Iterate& p, GradientPair& out) = 0;

private:
    std::uint64_t calls_ = 0;
};

/// Exact gradients of the wrapped problem.
class DeterministicOracle final : public GradientSource {
public:
    explicit DeterministicOracle(ProblemPtr problem);
    const MinimaxProblem& problem() const override { return *problem_; }
    bool stochastic() const override { return false; }

protected:
    void fill(const Iterate& p, GradientPair& out) override;

private:
    ProblemPtr problem_;
};

/// Exact gradient plus i.i.d. N(0, stddev^2) noise on every component.
/// Carries RNG state: one oracle per run.
class StochasticOracle final : public GradientSource {
public:
    /// Throws std::invalid_argument for negative or non-finite stddev.
    StochasticOracle(ProblemPtr problem, double noise_stddev, std::uint64_t seed);
    const MinimaxProblem& problem() const override { return *problem_; }
    bool stochastic() const override { return noise_stddev_ > 0.0; }
    double noise_stddev() const { return noise_stddev_; }

protected:
    void fill(const Iterate& p, GradientPair& out) override;

private:
    ProblemPtr problem_;
    double noise_stddev_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::unique_ptr<GradientSource> make_stochastic(ProblemPtr problem, double noise_stddev,
                                                std::uint64_t seed);

}  // namespace tiada
