#include "tiada/oracle.hpp"

#include <cmath>

namespace tiada {

GradientPair GradientSource::query(const Iterate& p) {
    check_dimensions(problem(), p);
    GradientPair g{Vector(problem().dim_x()), Vector(problem().dim_y())};
    fill(p, g);
    ++calls_;
    if (!all_finite(g.gx) || !all_finite(g.gy))
        throw NonFiniteGradient("non-finite gradient at oracle call " + std::to_string(calls_));
    return g;
}

DeterministicOracle::DeterministicOracle(ProblemPtr problem) : problem_(std::move(problem)) {}

void DeterministicOracle::fill(const Iterate& p, GradientPair& out) {
    problem_->gradient(p.x, p.y, out.gx, out.gy);
}

StochasticOracle::StochasticOracle(ProblemPtr problem, double noise_stddev, std::uint64_t seed)
    : problem_(std::move(problem)), noise_stddev_(noise_stddev), rng_(seed) {
    if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev))
        throw std::invalid_argument("noise_stddev must be a finite nonnegative number");
}

void StochasticOracle::fill(const Iterate& p, GradientPair& out) {
    problem_->gradient(p.x, p.y, out.gx, out.gy);
    if (noise_stddev_ == 0.0) return;
    // xi^x first, then xi^y: two independent draws per call.
    for (double& c : out.gx) c += noise_stddev_ * normal_(rng_);
    for (double& c : out.gy) c += noise_stddev_ * normal_(rng_);
}

std::unique_ptr<GradientSource> make_stochastic(ProblemPtr problem, double noise_stddev,
                                                std::uint64_t seed) {
    return std::make_unique<StochasticOracle>(std::move(problem), noise_stddev, seed);
}

}  // namespace tiada
