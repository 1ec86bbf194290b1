#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steamflex/common.hpp"

namespace steamflex {

struct DeParams {
    int population = 32;
    double weight = 0.7;          // differential weight F
    double crossover = 0.9;       // crossover rate CR
    int max_generations = 150;
    double tolerance = 0.0;       // stop when population spread falls below
    std::uint64_t seed = 0;
    unsigned jobs = 1;

    void validate() const {
        if (population < 4)
            throw std::invalid_argument("DeParams: rand/1 mutation needs population >= 4");
        if (!(weight > 0.0 && weight < 2.0))
            throw std::invalid_argument("DeParams: weight must be in (0,2)");
        if (!(crossover >= 0.0 && crossover <= 1.0))
            throw std::invalid_argument("DeParams: crossover must be in [0,1]");
        if (max_generations < 1)
            throw std::invalid_argument("DeParams: need at least one generation");
    }
};

struct DeResult {
    std::vector<double> best_point;
    double best_value = 0;
    std::vector<double> trace;  // best-so-far per generation, non-increasing
    int generations = 0;
};

/// DE/rand/1/bin with box bounds by clipping: mutation v = a + F*(b - c)
/// over three distinct members, binomial crossover with one guaranteed
/// mutated coordinate, greedy selection. Deterministic for a fixed seed;
/// candidate evaluations within a generation may run in parallel without
/// affecting the result.
inline DeResult differential_evolution(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<std::pair<double, double>>& bounds, const DeParams& params,
    const std::vector<std::vector<double>>& seed_points = {}) {
    params.validate();
    const std::size_t dim = bounds.size();
    if (dim == 0) throw std::invalid_argument("differential_evolution: empty bounds");
    for (const auto& [lo, hi] : bounds)
        if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("differential_evolution: bounds must be finite");

    const auto np = static_cast<std::size_t>(params.population);
    std::mt19937_64 rng(params.seed);
    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    std::vector<double> value(np);
    for (auto& member : pop)
        for (std::size_t d = 0; d < dim; ++d)
            member[d] = bounds[d].first +
                        (bounds[d].second - bounds[d].first) * uniform01(rng);
    // known-good starting points (e.g. the grid-search winner) replace the
    // head of the random population; greedy selection then guarantees the
    // result never falls behind them
    for (std::size_t s = 0; s < seed_points.size() && s < np; ++s) {
        if (seed_points[s].size() != dim)
            throw std::invalid_argument("differential_evolution: seed point dimension");
        for (std::size_t d = 0; d < dim; ++d)
            pop[s][d] = std::clamp(seed_points[s][d], bounds[d].first, bounds[d].second);
    }
    parallel_for(np, params.jobs, [&](std::size_t i) { value[i] = objective(pop[i]); });

    DeResult res;
    std::size_t best = 0;
    for (std::size_t i = 1; i < np; ++i)
        if (value[i] < value[best]) best = i;
    res.best_point = pop[best];
    res.best_value = value[best];

    std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
    std::vector<double> trial_value(np);
    for (int gen = 0; gen < params.max_generations; ++gen) {
        for (std::size_t i = 0; i < np; ++i) {
            // three distinct members, none equal to i
            std::size_t a, b, c;
            do a = static_cast<std::size_t>(uniform_below(rng, np)); while (a == i);
            do b = static_cast<std::size_t>(uniform_below(rng, np)); while (b == i || b == a);
            do c = static_cast<std::size_t>(uniform_below(rng, np)); while (c == i || c == a || c == b);
            const auto forced = static_cast<std::size_t>(uniform_below(rng, dim));
            for (std::size_t d = 0; d < dim; ++d) {
                if (d == forced || uniform01(rng) < params.crossover) {
                    double v = pop[a][d] + params.weight * (pop[b][d] - pop[c][d]);
                    trial[i][d] = std::clamp(v, bounds[d].first, bounds[d].second);
                } else {
                    trial[i][d] = pop[i][d];
                }
            }
        }
        parallel_for(np, params.jobs,
                     [&](std::size_t i) { trial_value[i] = objective(trial[i]); });
        for (std::size_t i = 0; i < np; ++i)
            if (trial_value[i] <= value[i]) {
                pop[i] = trial[i];
                value[i] = trial_value[i];
                if (value[i] < res.best_value) {
                    res.best_value = value[i];
                    res.best_point = pop[i];
                }
            }
        res.trace.push_back(res.best_value);
        res.generations = gen + 1;
        if (params.tolerance > 0) {
            double lo = value[0], hi = value[0];
            for (double v : value) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo <= params.tolerance * (1.0 + std::abs(hi))) break;
        }
    }
    return res;
}

}  // namespace steamflex
