#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../errors.hpp"
#include "../models.hpp"
#include "../parallel.hpp"

namespace gtfk::oracles {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
    double dt = 0.0;
    unsigned long long seed = 0;
};

namespace detail {

constexpr int kMcChunks = 64;

struct ChunkSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;
};

}  // namespace detail

/// E[exp(-lambda Int_0^T r dt)] by Euler-Maruyama on the transformed process (constant
/// volatility), trapezoid accumulation of the rate integral and antithetic pairs.
///
/// Paths are split into a fixed number of chunks, each with its own generator seeded from
/// (seed, chunk), so the estimate does not depend on the thread count.
inline McEstimate monte_carlo_bond(const TransformedModel& model, double lambda, double y0, double T, long n_paths,
                                   double dt, unsigned long long seed, int threads = 0) {
    if (!(T > 0.0)) throw InputError("monte_carlo_bond: T must be > 0");
    if (!(dt > 0.0) || dt > T) throw InputError("monte_carlo_bond: dt must be in (0, T]");
    if (n_paths < 100) throw InputError("monte_carlo_bond: n_paths must be >= 100");

    const int n_steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    const double step = T / n_steps;
    const double sq = model.sigma * std::sqrt(step);
    const double x0 = lamperti_transform(model, y0);
    const long n_pairs = (n_paths + 1) / 2;

    McEstimate est;
    est.n_paths = 2 * n_pairs;
    est.dt = step;
    est.seed = seed;
    if (lambda == 0.0) {
        est.value = 1.0;
        return est;
    }

    std::vector<detail::ChunkSums> sums(detail::kMcChunks);
    parallel_for(detail::kMcChunks, resolve_thread_count(threads), [&](std::size_t chunk) {
        const long begin = n_pairs * static_cast<long>(chunk) / detail::kMcChunks;
        const long end = n_pairs * static_cast<long>(chunk + 1) / detail::kMcChunks;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(chunk)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        detail::ChunkSums acc;
        for (long p = begin; p < end; ++p) {
            double xa = x0, xb = x0;
            double ra = model.rate_x(x0), rb = ra;
            double ia = 0.0, ib = 0.0;
            for (int k = 0; k < n_steps; ++k) {
                const double z = normal(rng);
                xa += model.drift(xa) * step + sq * z;
                xb += model.drift(xb) * step - sq * z;
                const double ra_next = model.rate_x(xa);
                const double rb_next = model.rate_x(xb);
                ia += 0.5 * (ra + ra_next) * step;
                ib += 0.5 * (rb + rb_next) * step;
                ra = ra_next;
                rb = rb_next;
            }
            const double v = 0.5 * (std::exp(-lambda * ia) + std::exp(-lambda * ib));
            acc.sum += v;
            acc.sum_sq += v * v;
            ++acc.count;
        }
        sums[chunk] = acc;
    });

    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (const auto& s : sums) {
        sum += s.sum;
        sum_sq += s.sum_sq;
        count += s.count;
    }
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1));
    est.value = mean;
    // antithetic pairs are the independent samples
    est.std_error = std::sqrt(var / count);
    return est;
}

}  // namespace gtfk::oracles
