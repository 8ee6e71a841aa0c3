#pragma once

// Gradient-check cases shared by the unit tests and the acceptance binary.

#include "eigengan/generators.hpp"
#include "eigengan/losses.hpp"
#include "eigengan/subspace.hpp"
#include "test_support.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace eigengan::testing {

// Weighting by a fixed random matrix keeps every output entry's gradient distinct.
inline GraphFn weighted(std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)> op, Matrix weights) {
    return [op, weights](ad::Graph& g, const std::vector<ad::Var>& v) {
        return ad::sum(ad::hadamard(op(g, v), g.constant(weights)));
    };
}

struct OpCase {
    std::string name;
    std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)> op;
    std::function<std::vector<Matrix>(Rng&)> inputs;
};

inline std::vector<OpCase> op_cases() {
    auto normal = [](std::size_t r, std::size_t c) { return [=](Rng& rng) { return std::vector{rng.normal_matrix(r, c)}; }; };
    auto pair = [](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
        return [=](Rng& rng) { return std::vector{rng.normal_matrix(r1, c1), rng.normal_matrix(r2, c2)}; };
    };
    auto kinked = [](std::size_t r, std::size_t c) {
        return [=](Rng& rng) { return std::vector{away_from_zero(r, c, rng)}; };
    };
    auto positive = [](std::size_t r, std::size_t c) {
        return [=](Rng& rng) {
            Matrix m = rng.uniform_matrix(r, c);
            for (double& v : m.data()) v = 0.5 + 2.0 * v;
            return std::vector{m};
        };
    };
    using V = const std::vector<ad::Var>&;
    return {
        {"matmul", [](ad::Graph&, V v) { return ad::matmul(v[0], v[1]); }, pair(3, 4, 4, 2)},
        {"transpose", [](ad::Graph&, V v) { return ad::transpose(v[0]); }, normal(3, 2)},
        {"add", [](ad::Graph&, V v) { return ad::add(v[0], v[1]); }, pair(3, 4, 3, 4)},
        {"add_row_broadcast", [](ad::Graph&, V v) { return ad::add(v[0], v[1]); }, pair(3, 4, 1, 4)},
        {"add_column_broadcast", [](ad::Graph&, V v) { return ad::add(v[1], v[0]); }, pair(3, 4, 3, 1)},
        {"add_scalar_broadcast", [](ad::Graph&, V v) { return ad::add(v[0], v[1]); }, pair(3, 4, 1, 1)},
        {"sub", [](ad::Graph&, V v) { return ad::sub(v[0], v[1]); }, pair(2, 5, 2, 5)},
        {"sub_row_broadcast", [](ad::Graph&, V v) { return ad::sub(v[1], v[0]); }, pair(3, 4, 1, 4)},
        {"hadamard", [](ad::Graph&, V v) { return ad::hadamard(v[0], v[1]); }, pair(3, 3, 3, 3)},
        {"hadamard_row_broadcast", [](ad::Graph&, V v) { return ad::hadamard(v[0], v[1]); }, pair(4, 3, 1, 3)},
        {"hadamard_column_broadcast", [](ad::Graph&, V v) { return ad::hadamard(v[0], v[1]); }, pair(4, 3, 4, 1)},
        {"scale", [](ad::Graph&, V v) { return ad::scale(v[0], -1.7); }, normal(2, 3)},
        {"add_scalar", [](ad::Graph&, V v) { return ad::add_scalar(v[0], 0.3); }, normal(2, 3)},
        {"leaky_relu", [](ad::Graph&, V v) { return ad::leaky_relu(v[0], 0.2); }, kinked(4, 3)},
        {"relu", [](ad::Graph&, V v) { return ad::relu(v[0]); }, kinked(4, 3)},
        {"exp", [](ad::Graph&, V v) { return ad::exp(v[0]); }, normal(3, 3)},
        {"softplus", [](ad::Graph&, V v) { return ad::softplus(v[0]); }, normal(3, 3)},
        {"sigmoid", [](ad::Graph&, V v) { return ad::sigmoid(v[0]); }, normal(3, 3)},
        {"square", [](ad::Graph&, V v) { return ad::square(v[0]); }, normal(3, 3)},
        {"sqrt", [](ad::Graph&, V v) { return ad::sqrt(v[0]); }, positive(3, 3)},
        {"reciprocal", [](ad::Graph&, V v) { return ad::reciprocal(v[0]); }, positive(3, 3)},
        {"clamp_max", [](ad::Graph&, V v) { return ad::clamp_max(v[0], 0.0); }, kinked(4, 3)},
        {"sum", [](ad::Graph&, V v) { return ad::sum(v[0]); }, normal(3, 4)},
        {"mean", [](ad::Graph&, V v) { return ad::mean(v[0]); }, normal(3, 4)},
        {"frobenius_squared", [](ad::Graph&, V v) { return ad::frobenius_squared(v[0]); }, normal(3, 4)},
        {"row_sum", [](ad::Graph&, V v) { return ad::row_sum(v[0]); }, normal(3, 4)},
        {"col_sum", [](ad::Graph&, V v) { return ad::col_sum(v[0]); }, normal(3, 4)},
        {"expand_row", [](ad::Graph&, V v) { return ad::expand(v[0], 4, 3); }, normal(1, 3)},
        {"expand_column", [](ad::Graph&, V v) { return ad::expand(v[0], 4, 3); }, normal(4, 1)},
        {"expand_scalar", [](ad::Graph&, V v) { return ad::expand(v[0], 2, 3); }, normal(1, 1)},
    };
}

// Full discriminator and generator objectives, with every G and D parameter as an input.
template <class G>
struct Objectives {
    G model;
    Discriminator disc;
    LatentBatch latents;
    Matrix real;
    Matrix u;
    std::size_t n_g;

    std::vector<Matrix> inputs() const {
        std::vector<Matrix> in;
        for (const Matrix* p : model.parameters()) in.push_back(*p);
        for (const Matrix* p : disc.parameters()) in.push_back(*p);
        return in;
    }
    GraphFn disc_objective(LossKind k) const {
        return [this, k](ad::Graph& g, const std::vector<ad::Var>& v) {
            const std::span<const ad::Var> gp(v.data(), n_g), dp(v.data() + n_g, v.size() - n_g);
            const ad::Var fake = model.forward(g, gp, latents);
            const ad::Var x = g.parameter(real);
            const ad::Var rs = disc.forward(dp, x);
            ad::Var loss = disc_loss(k, rs, disc.forward(dp, fake)) + r1_from_scores(x, rs, 10.0);
            if (k == LossKind::WGANGP) loss = loss + wgan_gp(g, disc, dp, real, fake.value(), u, 10.0);
            return loss;
        };
    }
    bool clear_of_kinks(LossKind k, double margin) const {
        const auto in = inputs();
        return kink_distance(disc_objective(k), in) > margin && kink_distance(gen_objective(k), in) > margin;
    }
    GraphFn gen_objective(LossKind k) const {
        return [this, k](ad::Graph&, const std::vector<ad::Var>& v) {
            const std::span<const ad::Var> gp(v.data(), n_g), dp(v.data() + n_g, v.size() - n_g);
            ad::Var loss = gen_loss(k, disc.forward(dp, model.forward(gp[0].graph(), gp, latents)));
            for (std::size_t i : basis_parameter_indices(model)) loss = loss + ortho_penalty(gp[i]);
            return loss;
        };
    }
};

template <class G>
Objectives<G> make_objectives(G model, std::size_t dim, Rng& rng) {
    Objectives<G> o{std::move(model), Discriminator::create(dim, {6, 5}, rng), {}, rng.normal_matrix(4, dim),
                    interpolation_weights(4, rng), 0};
    Rng z(rng.next()), e(rng.next());
    o.latents = o.model.latent_shape().sample(4, z, e);
    o.n_g = o.model.parameters().size();
    for (Matrix* p : o.model.parameters())
        for (double& v : p->data()) v += 0.2 * rng.normal();
    return o;
}

/// Redraws until no kinked node of either objective lies within 1e-3 of its kink.
template <class Make>
auto draw_clear_of_kinks(Make make, LossKind k, Rng& rng) {
    for (;;) {
        auto o = make(rng);
        if (o.clear_of_kinks(k, 1e-3)) return o;
    }
}

/// Worst finite-difference error of one operation over `trials` random inputs.
inline double op_case_error(const OpCase& c, int trials) {
    Rng rng = Rng::stream(11, {std::hash<std::string>{}(c.name)});
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::vector<Matrix> inputs = c.inputs(rng);
        ad::Graph probe;
        std::vector<ad::Var> vars;
        for (const Matrix& m : inputs) vars.push_back(probe.constant(m));
        const ad::Var out = c.op(probe, vars);
        const Matrix w = rng.normal_matrix(out.rows(), out.cols());
        worst = std::max(worst, worst_gradient_error(weighted(c.op, w), inputs));
    }
    return worst;
}

}  // namespace eigengan::testing
