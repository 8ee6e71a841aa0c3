#pragma once

#include "eigengan/autodiff.hpp"
#include "eigengan/matrix.hpp"
#include "eigengan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace eigengan::testing {

/// Central differences of a scalar function, one entry at a time.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    Matrix probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = f(probe);
        probe[i] = saved - h;
        const double down = f(probe);
        probe[i] = saved;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a − b|| / max(||a||, ||b||, 1e-6). The floor keeps round-off in an
/// exactly-zero gradient from counting as total disagreement.
inline double relative_error(const Matrix& a, const Matrix& b) {
    const double scale = std::max({frobenius_norm(a), frobenius_norm(b), 1e-6});
    return frobenius_norm(a - b) / scale;
}

/// Standard-normal entries pushed at least `margin` away from zero.
inline Matrix away_from_zero(std::size_t rows, std::size_t cols, Rng& rng, double margin = 0.05) {
    Matrix m = rng.normal_matrix(rows, cols);
    for (double& v : m.data()) v = v >= 0.0 ? v + margin : v - margin;
    return m;
}

/// Checks d f / d x_k for every input of a graph-building function against
/// central differences. `build` receives one bound variable per input.
using GraphFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

inline double graph_value(const GraphFn& build, const std::vector<Matrix>& inputs) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Matrix& m : inputs) vars.push_back(g.constant(m));
    return build(g, vars).value().item();
}

inline std::vector<Matrix> analytic_gradients(const GraphFn& build, const std::vector<Matrix>& inputs) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Matrix& m : inputs) vars.push_back(g.parameter(m));
    g.backward(build(g, vars));
    std::vector<Matrix> out;
    for (const ad::Var& v : vars) out.push_back(g.grad(v));
    return out;
}

/// Largest relative error over all inputs.
inline double worst_gradient_error(const GraphFn& build, const std::vector<Matrix>& inputs, double h = 1e-5) {
    const auto analytic = analytic_gradients(build, inputs);
    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto f = [&](const Matrix& xk) {
            std::vector<Matrix> probe = inputs;
            probe[k] = xk;
            return graph_value(build, probe);
        };
        worst = std::max(worst, relative_error(analytic[k], numeric_gradient(f, inputs[k], h)));
    }
    return worst;
}

/// Smallest distance of any kinked node's argument from its kink, over the
/// whole graph built at `inputs` (including nodes recorded by double backprop).
/// Central differences are only meaningful when this exceeds the step size.
inline double kink_distance(const GraphFn& build, const std::vector<Matrix>& inputs) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Matrix& m : inputs) vars.push_back(g.parameter(m));
    build(g, vars);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::uint32_t id = 0; id < g.size(); ++id) {
        const ad::Var v = g.node(id);
        const ad::Op op = g.op(v);
        if (op != ad::Op::LeakyRelu && op != ad::Op::Relu && op != ad::Op::ClampMax && op != ad::Op::Sqrt) continue;
        const double at = op == ad::Op::ClampMax ? g.param(v) : 0.0;
        for (double x : g.operand(v, 0).value().data()) nearest = std::min(nearest, std::abs(x - at));
    }
    return nearest;
}

}  // namespace eigengan::testing
