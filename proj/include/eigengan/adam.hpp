#pragma once

#include "eigengan/matrix.hpp"

#include <cstdint>

namespace eigengan {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter Adam moments. Shaped like the parameter it tracks.
struct AdamState {
    AdamState() = default;
    AdamState(std::size_t rows, std::size_t cols, AdamConfig cfg = {})
        : first_moment(rows, cols), second_moment(rows, cols), config(cfg) {}
    explicit AdamState(const Matrix& like, AdamConfig cfg = {}) : AdamState(like.rows(), like.cols(), cfg) {}

    Matrix first_moment;
    Matrix second_moment;
    std::uint64_t step = 0;
    AdamConfig config;
};

/// Bias-corrected Adam update of `param` in place.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state);

}  // namespace eigengan
