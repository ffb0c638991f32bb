/**
 * @file rng.hpp
 * @brief Counter-based random numbers keyed by (seed, stream, draw index), and
 *        an integer-threshold categorical sampler.
 *
 * Every draw is a pure function of its key, so results do not depend on the
 * order in which streams are consumed or on the platform's <random> details.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wslrr/error.hpp"

namespace wslrr {

/** @brief SplitMix64 finalizer: a bijective 64-bit mixing function. */
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/** @brief The 64-bit value at key (seed, stream, counter). */
inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

/** @brief Sequential view of one stream of the keyed generator. */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return keyed_u64(seed_, stream_, counter_++); }
    /// 53-bit integer in [0, 2^53).
    std::uint64_t next_u53() { return next_u64() >> 11; }
    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u53()) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_, stream_, counter_ = 0;
};

/**
 * @brief Cumulative inversion over 53-bit integer thresholds.
 *
 * Weights are accumulated left to right and converted once to integer
 * thresholds; each draw is an integer comparison, so sampling is exactly
 * reproducible for a given weight vector.
 */
class CategoricalSampler {
public:
    explicit CategoricalSampler(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidParams, "categorical weights must be finite and nonnegative");
            total += w;
        }
        if (total <= 0.0) throw Error(ErrorCode::ZeroChannelMass, "categorical distribution has zero mass");
        thresholds_.reserve(weights.size());
        double cum = 0.0;
        for (double w : weights) {
            cum += w;
            thresholds_.push_back(static_cast<std::uint64_t>(std::llround(std::min(1.0, cum / total) * 0x1.0p53)));
        }
        // Guard against a short last threshold from rounding of the running sum.
        for (std::size_t t = weights.size(); t-- > 0;) {
            if (weights[t] > 0.0) {
                for (std::size_t u = t; u < thresholds_.size(); ++u) thresholds_[u] = std::uint64_t{1} << 53;
                break;
            }
        }
    }

    /// Category whose threshold interval contains @p u53 in [0, 2^53).
    std::size_t draw(std::uint64_t u53) const {
        return static_cast<std::size_t>(std::upper_bound(thresholds_.begin(), thresholds_.end(), u53) - thresholds_.begin());
    }

    std::size_t size() const { return thresholds_.size(); }

private:
    std::vector<std::uint64_t> thresholds_;
};

} // namespace wslrr
