#pragma once

// Linear and layered EigenGAN generators.
//
// Both generators read their latents from a LatentBatch: one z block per
// layer (B×q_i) plus the bottom noise eps (B×noise_dim). The linear model
// has a single layer and its noise lives directly in observation space.

#include "eigengan/autodiff.hpp"
#include "eigengan/matrix.hpp"
#include "eigengan/rng.hpp"
#include "eigengan/subspace.hpp"

#include <concepts>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace eigengan {

struct LatentBatch {
    std::vector<Matrix> z;
    Matrix eps;

    std::size_t batch() const { return eps.rows(); }
    /// Row `r` of every block, as a batch of one.
    LatentBatch row(std::size_t r) const;
    /// The same single-row latents tiled `n` times.
    LatentBatch tiled(std::size_t n) const;
};

struct LatentShape {
    std::vector<std::size_t> z_dims;
    std::size_t noise_dim = 0;

    /// z from `z_rng` and eps from `eps_rng`, both standard normal.
    LatentBatch sample(std::size_t batch, Rng& z_rng, Rng& eps_rng) const;
    void check(const LatentBatch& latents) const;
};

enum class Activation { Identity, LeakyRelu };

/// x = U·diag(L)·z + mu + sigma·eps, with sigma = exp(log_sigma).
struct LinearEigenModel {
    SubspaceModel subspace;
    Matrix log_sigma = Matrix::scalar(0.0);

    static LinearEigenModel create(std::size_t ambient, std::size_t q, Rng& rng);

    double sigma() const;
    std::size_t output_dim() const { return subspace.ambient(); }
    LatentShape latent_shape() const { return {{subspace.dim()}, subspace.ambient()}; }
    std::size_t layer_count() const { return 1; }

    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    /// The subspaces whose bases carry the orthogonality penalty.
    std::vector<const SubspaceModel*> subspaces() const { return {&subspace}; }

    ad::Var forward(ad::Graph& g, std::span<const ad::Var> params, const LatentBatch& latents) const;
    Matrix forward(const LatentBatch& latents) const;
};

/// Single-sample convenience form of the linear forward pass.
std::vector<double> linear_forward(const LinearEigenModel& m, std::span<const double> z,
                                   std::span<const double> eps);

/// Expanding affine map plus nonlinearity, with the square transform applied to
/// the subspace sample before it is added to the features.
struct LayerMap {
    Matrix weight;       // d_out × d_in
    Matrix bias;         // 1 × d_out
    Activation activation = Activation::LeakyRelu;
    Matrix f_transform;  // d_in × d_in; empty when the layer has no subspace

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }
};

struct EigenLayer {
    /// Absent in the ablated variant, where z is added to the features directly.
    std::optional<SubspaceModel> subspace;
    LayerMap map;
    std::size_t latent_dim = 0;
};

struct LayeredConfig {
    std::size_t noise_dim = 4;
    /// Feature widths h_1..h_t; the last layer maps to data_dim.
    std::vector<std::size_t> widths{4, 8, 16};
    std::size_t q = 2;
    std::size_t data_dim = 32;
    double leaky_slope = 0.2;
};

struct LayeredEigenModel {
    std::vector<EigenLayer> layers;
    Matrix bottom_weight;  // h_1 dim × noise_dim
    Matrix bottom_bias;    // 1 × h_1 dim
    double leaky_slope = 0.2;

    static LayeredEigenModel create(const LayeredConfig& cfg, Rng& rng);

    std::size_t noise_dim() const { return bottom_weight.cols(); }
    std::size_t output_dim() const { return layers.back().map.out_dim(); }
    std::size_t layer_count() const { return layers.size(); }
    LatentShape latent_shape() const;
    bool has_subspaces() const;
    void validate() const;

    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    std::vector<const SubspaceModel*> subspaces() const;

    ad::Var forward(ad::Graph& g, std::span<const ad::Var> params, const LatentBatch& latents) const;
    Matrix forward(const LatentBatch& latents) const;
};

/// Copy of `m` with every subspace removed: z_i is zero-padded to the feature
/// width and added to h_i directly. f_transform goes with the subspace.
LayeredEigenModel ablate_subspaces(const LayeredEigenModel& m);

template <class G>
concept GeneratorModel = requires(G m, const G cm, ad::Graph& g, std::span<const ad::Var> p,
                                  const LatentBatch& lb) {
    { cm.output_dim() } -> std::convertible_to<std::size_t>;
    { cm.latent_shape() } -> std::same_as<LatentShape>;
    { m.parameters() } -> std::same_as<std::vector<Matrix*>>;
    { cm.parameters() } -> std::same_as<std::vector<const Matrix*>>;
    { cm.subspaces() } -> std::same_as<std::vector<const SubspaceModel*>>;
    { cm.forward(g, p, lb) } -> std::same_as<ad::Var>;
    { cm.forward(lb) } -> std::same_as<Matrix>;
};

using AnyGenerator = std::variant<LinearEigenModel, LayeredEigenModel>;

/// Binds every parameter of a model into `g`, as trainable leaves or constants.
template <GeneratorModel G>
std::vector<ad::Var> bind_parameters(ad::Graph& g, const G& model, bool trainable) {
    std::vector<ad::Var> vars;
    for (const Matrix* p : model.parameters()) vars.push_back(trainable ? g.parameter(*p) : g.constant(*p));
    return vars;
}

/// Sweeps z_{layer,dim} over `grid` with every other latent taken from the
/// single-row `frozen` batch. Row k of the result is the output at grid[k].
template <GeneratorModel G>
Matrix traverse(const G& model, std::size_t layer, std::size_t dim, std::span<const double> grid,
                const LatentBatch& frozen);

/// `count` equally spaced values on [-range, range]; a single point is 0.
std::vector<double> traversal_grid(std::size_t count, double range);

std::size_t parameter_count(const std::vector<const Matrix*>& params);

}  // namespace eigengan
