#include "eigengan/generators.hpp"

#include <cmath>

namespace eigengan {

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
    return m;
}

// q×width matrix [I 0] that zero-pads a q-vector to the feature width.
Matrix padding(std::size_t q, std::size_t width) {
    Matrix p(q, width);
    for (std::size_t i = 0; i < q; ++i) p(i, i) = 1.0;
    return p;
}

ad::Var activate(ad::Var x, Activation a, double slope) {
    return a == Activation::LeakyRelu ? ad::leaky_relu(x, slope) : x;
}

template <GeneratorModel G>
Matrix evaluate(const G& model, const LatentBatch& latents) {
    ad::Graph g;
    const auto params = bind_parameters(g, model, false);
    return model.forward(g, params, latents).value();
}

}  // namespace

// --- latents ----------------------------------------------------------------

LatentBatch LatentBatch::row(std::size_t r) const {
    LatentBatch out;
    for (const Matrix& zi : z) out.z.push_back(Matrix::row(zi.row_span(r)));
    out.eps = Matrix::row(eps.row_span(r));
    return out;
}

LatentBatch LatentBatch::tiled(std::size_t n) const {
    if (batch() != 1) throw ContractError("LatentBatch::tiled: expected a single row");
    auto tile = [n](const Matrix& m) {
        Matrix out(n, m.cols());
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m[c];
        return out;
    };
    LatentBatch out;
    for (const Matrix& zi : z) out.z.push_back(tile(zi));
    out.eps = tile(eps);
    return out;
}

LatentBatch LatentShape::sample(std::size_t batch, Rng& z_rng, Rng& eps_rng) const {
    LatentBatch out;
    for (std::size_t q : z_dims) out.z.push_back(z_rng.normal_matrix(batch, q));
    out.eps = eps_rng.normal_matrix(batch, noise_dim);
    return out;
}

void LatentShape::check(const LatentBatch& latents) const {
    if (latents.z.size() != z_dims.size())
        throw ShapeError("latents: expected " + std::to_string(z_dims.size()) + " z blocks, got " +
                         std::to_string(latents.z.size()));
    const std::size_t b = latents.batch();
    if (latents.eps.cols() != noise_dim)
        throw ShapeError("latents: eps has width " + std::to_string(latents.eps.cols()) + ", expected " +
                         std::to_string(noise_dim));
    for (std::size_t i = 0; i < z_dims.size(); ++i) {
        if (latents.z[i].cols() != z_dims[i] || latents.z[i].rows() != b)
            throw ShapeError("latents: z[" + std::to_string(i) + "] is " + latents.z[i].shape_string() +
                             ", expected " + std::to_string(b) + "x" + std::to_string(z_dims[i]));
    }
}

// --- linear -----------------------------------------------------------------

LinearEigenModel LinearEigenModel::create(std::size_t ambient, std::size_t q, Rng& rng) {
    return {SubspaceModel::initialize(ambient, q, rng), Matrix::scalar(0.0)};
}

double LinearEigenModel::sigma() const { return std::exp(log_sigma.item()); }

std::vector<Matrix*> LinearEigenModel::parameters() {
    return {&subspace.basis, &subspace.importance, &subspace.origin, &log_sigma};
}

std::vector<const Matrix*> LinearEigenModel::parameters() const {
    return {&subspace.basis, &subspace.importance, &subspace.origin, &log_sigma};
}

ad::Var LinearEigenModel::forward(ad::Graph& g, std::span<const ad::Var> params,
                                  const LatentBatch& latents) const {
    latent_shape().check(latents);
    if (params.size() != 4) throw ContractError("LinearEigenModel: expected 4 bound parameters");
    const SubspaceVars s{params[0], params[1], params[2]};
    const ad::Var phi = sample_points(s, g.constant(latents.z[0]));
    return ad::add(phi, ad::hadamard(g.constant(latents.eps), ad::exp(params[3])));
}

Matrix LinearEigenModel::forward(const LatentBatch& latents) const { return evaluate(*this, latents); }

std::vector<double> linear_forward(const LinearEigenModel& m, std::span<const double> z,
                                   std::span<const double> eps) {
    if (eps.size() != m.output_dim())
        throw ShapeError("linear_forward: eps has length " + std::to_string(eps.size()) + ", expected " +
                         std::to_string(m.output_dim()));
    std::vector<double> x = sample_point(m.subspace, z);
    const double sigma = m.sigma();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += sigma * eps[i];
    return x;
}

// --- layered ----------------------------------------------------------------

LayeredEigenModel LayeredEigenModel::create(const LayeredConfig& cfg, Rng& rng) {
    if (cfg.widths.empty()) throw ContractError("LayeredConfig: need at least one layer");
    LayeredEigenModel m;
    m.leaky_slope = cfg.leaky_slope;
    m.bottom_weight = uniform_init(cfg.widths[0], cfg.noise_dim, cfg.noise_dim, rng);
    m.bottom_bias = uniform_init(1, cfg.widths[0], cfg.noise_dim, rng);
    for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
        const std::size_t in = cfg.widths[i];
        const bool last = i + 1 == cfg.widths.size();
        const std::size_t out = last ? cfg.data_dim : cfg.widths[i + 1];
        EigenLayer layer;
        layer.subspace = SubspaceModel::initialize(in, cfg.q, rng);
        layer.latent_dim = cfg.q;
        layer.map.weight = uniform_init(out, in, in, rng);
        layer.map.bias = uniform_init(1, out, in, rng);
        layer.map.activation = last ? Activation::Identity : Activation::LeakyRelu;
        layer.map.f_transform = Matrix::identity(in);
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

LatentShape LayeredEigenModel::latent_shape() const {
    LatentShape s;
    for (const EigenLayer& l : layers) s.z_dims.push_back(l.latent_dim);
    s.noise_dim = noise_dim();
    return s;
}

bool LayeredEigenModel::has_subspaces() const {
    for (const EigenLayer& l : layers)
        if (l.subspace) return true;
    return false;
}

void LayeredEigenModel::validate() const {
    if (layers.empty()) throw ShapeError("LayeredEigenModel: no layers");
    if (bottom_bias.rows() != 1 || bottom_bias.cols() != bottom_weight.rows())
        throw ShapeError("LayeredEigenModel: bottom bias does not match bottom weight");
    std::size_t width = bottom_weight.rows();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const EigenLayer& l = layers[i];
        const std::string where = "layer " + std::to_string(i) + ": ";
        if (l.map.in_dim() != width) throw ShapeError(where + "input width mismatch");
        if (l.map.out_dim() < l.map.in_dim()) throw ShapeError(where + "layer maps must not shrink");
        if (l.map.bias.rows() != 1 || l.map.bias.cols() != l.map.out_dim())
            throw ShapeError(where + "bias shape");
        if (l.subspace) {
            l.subspace->validate();
            if (l.subspace->ambient() != width) throw ShapeError(where + "subspace ambient != feature width");
            if (l.subspace->dim() != l.latent_dim) throw ShapeError(where + "latent_dim != subspace dim");
            if (l.map.f_transform.rows() != width || l.map.f_transform.cols() != width)
                throw ShapeError(where + "f_transform must be square over the feature width");
        } else if (l.latent_dim > width) {
            throw ShapeError(where + "latent wider than features");
        }
        width = l.map.out_dim();
    }
}

std::vector<Matrix*> LayeredEigenModel::parameters() {
    std::vector<Matrix*> p{&bottom_weight, &bottom_bias};
    for (EigenLayer& l : layers) {
        if (l.subspace) {
            p.push_back(&l.subspace->basis);
            p.push_back(&l.subspace->importance);
            p.push_back(&l.subspace->origin);
            p.push_back(&l.map.f_transform);
        }
        p.push_back(&l.map.weight);
        p.push_back(&l.map.bias);
    }
    return p;
}

std::vector<const Matrix*> LayeredEigenModel::parameters() const {
    std::vector<const Matrix*> p;
    for (Matrix* m : const_cast<LayeredEigenModel*>(this)->parameters()) p.push_back(m);
    return p;
}

std::vector<const SubspaceModel*> LayeredEigenModel::subspaces() const {
    std::vector<const SubspaceModel*> out;
    for (const EigenLayer& l : layers)
        if (l.subspace) out.push_back(&*l.subspace);
    return out;
}

ad::Var LayeredEigenModel::forward(ad::Graph& g, std::span<const ad::Var> params,
                                   const LatentBatch& latents) const {
    latent_shape().check(latents);
    if (params.size() != this->parameters().size())
        throw ContractError("LayeredEigenModel: wrong number of bound parameters");
    std::size_t k = 0;
    const ad::Var bw = params[k++];
    const ad::Var bb = params[k++];
    ad::Var h = ad::add(ad::matmul(g.constant(latents.eps), ad::transpose(bw)), bb);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const EigenLayer& l = layers[i];
        const ad::Var z = g.constant(latents.z[i]);
        ad::Var injected;
        if (l.subspace) {
            const SubspaceVars s{params[k], params[k + 1], params[k + 2]};
            const ad::Var f = params[k + 3];
            k += 4;
            injected = ad::matmul(sample_points(s, z), ad::transpose(f));
        } else {
            injected = ad::matmul(z, g.constant(padding(l.latent_dim, l.map.in_dim())));
        }
        const ad::Var w = params[k++];
        const ad::Var b = params[k++];
        const ad::Var pre = ad::add(ad::matmul(ad::add(h, injected), ad::transpose(w)), b);
        h = activate(pre, l.map.activation, leaky_slope);
    }
    return h;
}

Matrix LayeredEigenModel::forward(const LatentBatch& latents) const { return evaluate(*this, latents); }

LayeredEigenModel ablate_subspaces(const LayeredEigenModel& m) {
    LayeredEigenModel out = m;
    for (EigenLayer& l : out.layers) {
        if (l.latent_dim > l.map.in_dim())
            throw ContractError("ablate_subspaces: latent wider than feature width");
        l.subspace.reset();
        l.map.f_transform = Matrix();
    }
    return out;
}

// --- traversal --------------------------------------------------------------

template <GeneratorModel G>
Matrix traverse(const G& model, std::size_t layer, std::size_t dim, std::span<const double> grid,
                const LatentBatch& frozen) {
    const LatentShape shape = model.latent_shape();
    shape.check(frozen);
    if (frozen.batch() != 1) throw ContractError("traverse: frozen latents must be a single row");
    if (layer >= shape.z_dims.size())
        throw std::out_of_range("traverse: layer " + std::to_string(layer) + " out of range");
    if (dim >= shape.z_dims[layer])
        throw std::out_of_range("traverse: dim " + std::to_string(dim) + " out of range");
    for (double v : grid)
        if (!std::isfinite(v)) throw ContractError("traverse: grid values must be finite");
    LatentBatch sweep = frozen.tiled(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) sweep.z[layer](k, dim) = grid[k];
    return model.forward(sweep);
}

template Matrix traverse(const LinearEigenModel&, std::size_t, std::size_t, std::span<const double>,
                         const LatentBatch&);
template Matrix traverse(const LayeredEigenModel&, std::size_t, std::size_t, std::span<const double>,
                         const LatentBatch&);

std::vector<double> traversal_grid(std::size_t count, double range) {
    if (count == 0) return {};
    if (count == 1) return {0.0};
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k)
        grid[k] = -range + 2.0 * range * static_cast<double>(k) / static_cast<double>(count - 1);
    return grid;
}

std::size_t parameter_count(const std::vector<const Matrix*>& params) {
    std::size_t n = 0;
    for (const Matrix* p : params) n += p->size();
    return n;
}

}  // namespace eigengan
