#pragma once

#include "eigengan/autodiff.hpp"
#include "eigengan/generators.hpp"
#include "eigengan/matrix.hpp"
#include "eigengan/rng.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eigengan {

enum class LossKind { Vanilla, LSGAN, WGANGP, Hinge, KLfGAN };

/// "vanilla" | "lsgan" | "wgan-gp" | "hinge" | "kl-f-gan"
std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);
/// Canonical order used for report rows.
std::vector<LossKind> all_loss_kinds();

/// Fake scores are clamped here before exponentiation in the KL f-GAN losses.
inline constexpr double kKlExponentClamp = 20.0;

/// Multilayer perceptron producing one unbounded score per input row.
struct Discriminator {
    struct Layer {
        Matrix weight;  // out × in
        Matrix bias;    // 1 × out
    };
    std::vector<Layer> layers;
    double leaky_slope = 0.2;

    static Discriminator create(std::size_t input_dim, std::vector<std::size_t> hidden, Rng& rng);
    /// Toy-benchmark default: two hidden layers of width 64.
    static Discriminator create_default(std::size_t input_dim, Rng& rng) { return create(input_dim, {64, 64}, rng); }

    std::size_t input_dim() const { return layers.front().weight.cols(); }
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    std::vector<ad::Var> bind(ad::Graph& g, bool trainable) const;

    ad::Var forward(std::span<const ad::Var> params, ad::Var x) const;
    Matrix scores(const Matrix& x) const;
};

ad::Var disc_loss(LossKind kind, ad::Var real_scores, ad::Var fake_scores);
ad::Var gen_loss(LossKind kind, ad::Var fake_scores);

/// (gamma/2)·mean_i ||d score_i / d x_i||² given scores computed from a
/// gradient-tracking input node. Differentiable in the discriminator weights.
ad::Var r1_from_scores(ad::Var inputs, ad::Var scores, double gamma);

ad::Var r1_penalty(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                   double gamma);
double r1_penalty(const Discriminator& d, const Matrix& real, double gamma);

/// Per-sample interpolation weights u ~ U(0,1), one per row, drawn in row order.
Matrix interpolation_weights(std::size_t batch, Rng& rng);

/// lambda·mean_i (||grad D(x̂_i)|| − 1)² with x̂ = u·real + (1 − u)·fake.
ad::Var wgan_gp(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                const Matrix& fake, const Matrix& u, double lambda);
ad::Var wgan_gp(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                const Matrix& fake, Rng& rng, double lambda);

}  // namespace eigengan
