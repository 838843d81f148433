#ifndef HAMEPI_SAMPLING_HPP
#define HAMEPI_SAMPLING_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hamepi/errors.hpp"

namespace hamepi {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Uniform points in the open box (lo, hi)^dim.
inline std::vector<std::vector<double>> box_points(int dim, int count,
                                                   std::mt19937_64& rng,
                                                   double lo = 0.01, double hi = 0.99) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(count));
    for (auto& p : pts) {
        p.resize(static_cast<std::size_t>(dim));
        for (double& x : p) x = u(rng);
    }
    return pts;
}

/// Points on the unit-sum simplex with every coordinate > min_coord. The last
/// coordinate is fixed by the constraint; candidates violating the bound are
/// resampled.
inline std::vector<std::vector<double>> simplex_points(int dim, int count,
                                                       std::mt19937_64& rng,
                                                       double min_coord = 0.01) {
    std::uniform_real_distribution<double> u(min_coord, 1.0 - min_coord);
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(pts.size()) < count) {
        std::vector<double> p(static_cast<std::size_t>(dim));
        double sum = 0.0;
        for (int i = 0; i + 1 < dim; ++i) {
            p[static_cast<std::size_t>(i)] = u(rng);
            sum += p[static_cast<std::size_t>(i)];
        }
        p[static_cast<std::size_t>(dim - 1)] = 1.0 - sum;
        if (p[static_cast<std::size_t>(dim - 1)] <= min_coord) continue;
        pts.push_back(std::move(p));
    }
    return pts;
}

/// Box points filtered through a domain predicate (resampled on rejection).
/// The predicate typically tries to evaluate the expressions of interest and
/// reports false on a domain error.
inline std::vector<std::vector<double>> filtered_box_points(
    int dim, int count, std::mt19937_64& rng,
    const std::function<bool(const std::vector<double>&)>& in_domain,
    double lo = 0.01, double hi = 0.99) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(count));
    int attempts = 0;
    const int max_attempts = count * 1000 + 1000;
    while (static_cast<int>(pts.size()) < count) {
        if (++attempts > max_attempts)
            throw DomainError("could not sample enough in-domain points");
        std::vector<double> p(static_cast<std::size_t>(dim));
        for (double& x : p) x = u(rng);
        if (!in_domain(p)) continue;
        pts.push_back(std::move(p));
    }
    return pts;
}

} // namespace hamepi

#endif
