#pragma once

#include "eigengan/matrix.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace eigengan {

enum class LatentDist { Normal, Uniform };

std::string to_string(LatentDist d);
LatentDist parse_latent_dist(std::string_view name);

/// Samples y_i = A·x_i + b with x_i ~ N(0, I_r) or U(0, 1)^r.
struct ToyDataset {
    Matrix samples;  // n × D
    Matrix transform;    // A, D × r
    Matrix translation;  // b, 1 × D
    LatentDist dist = LatentDist::Normal;
    std::size_t rank = 0;
    std::size_t ambient = 0;
};

/// A and b have standard-normal entries; A is redrawn while its smallest
/// singular value is below 1e-6. Same arguments give identical bytes.
ToyDataset make_dataset(std::size_t ambient, std::size_t rank, std::size_t n, LatentDist dist, std::uint64_t seed);

}  // namespace eigengan
