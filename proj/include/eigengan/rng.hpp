#pragma once

#include "eigengan/matrix.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eigengan {

/// Seedable generator with platform-independent output.
///
/// std::mt19937_64 is bit-exact across standard libraries, but the
/// std::*_distribution adaptors are not, so the variates are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent stream addressed by position, e.g. (master, cell, trial, purpose).
    static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    Matrix normal_matrix(std::size_t rows, std::size_t cols);
    Matrix uniform_matrix(std::size_t rows, std::size_t cols);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// SplitMix64 finalizer, used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace eigengan
