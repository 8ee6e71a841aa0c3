#include "eigengan/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace eigengan {

namespace {

void require_nonempty(ad::Var scores, const char* what) {
    if (scores.value().empty()) throw ContractError(std::string(what) + ": empty batch");
    if (scores.cols() != 1) throw ShapeError(std::string(what) + ": scores must be B×1");
}

ad::Var kl_exp_term(ad::Var fake) { return ad::exp(ad::add_scalar(ad::clamp_max(fake, kKlExponentClamp), -1.0)); }

}  // namespace

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Vanilla: return "vanilla";
        case LossKind::LSGAN: return "lsgan";
        case LossKind::WGANGP: return "wgan-gp";
        case LossKind::Hinge: return "hinge";
        case LossKind::KLfGAN: return "kl-f-gan";
    }
    return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
    for (LossKind k : all_loss_kinds())
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown loss kind '" + std::string(name) +
                                "' (expected vanilla|lsgan|wgan-gp|hinge|kl-f-gan)");
}

std::vector<LossKind> all_loss_kinds() {
    return {LossKind::KLfGAN, LossKind::Vanilla, LossKind::WGANGP, LossKind::LSGAN, LossKind::Hinge};
}

// --- discriminator ----------------------------------------------------------

Discriminator Discriminator::create(std::size_t input_dim, std::vector<std::size_t> hidden, Rng& rng) {
    Discriminator d;
    hidden.push_back(1);
    std::size_t in = input_dim;
    for (std::size_t out : hidden) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Layer l{Matrix(out, in), Matrix(1, out)};
        for (double& v : l.weight.data()) v = rng.uniform(-bound, bound);
        for (double& v : l.bias.data()) v = rng.uniform(-bound, bound);
        d.layers.push_back(std::move(l));
        in = out;
    }
    return d;
}

std::vector<Matrix*> Discriminator::parameters() {
    std::vector<Matrix*> p;
    for (Layer& l : layers) {
        p.push_back(&l.weight);
        p.push_back(&l.bias);
    }
    return p;
}

std::vector<const Matrix*> Discriminator::parameters() const {
    std::vector<const Matrix*> p;
    for (const Layer& l : layers) {
        p.push_back(&l.weight);
        p.push_back(&l.bias);
    }
    return p;
}

std::vector<ad::Var> Discriminator::bind(ad::Graph& g, bool trainable) const {
    std::vector<ad::Var> vars;
    for (const Matrix* p : parameters()) vars.push_back(trainable ? g.parameter(*p) : g.constant(*p));
    return vars;
}

ad::Var Discriminator::forward(std::span<const ad::Var> params, ad::Var x) const {
    if (params.size() != 2 * layers.size()) throw ContractError("Discriminator: wrong number of bound parameters");
    if (x.cols() != input_dim())
        throw ShapeError("Discriminator: input width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(input_dim()));
    ad::Var h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = ad::add(ad::matmul(h, ad::transpose(params[2 * i])), params[2 * i + 1]);
        if (i + 1 < layers.size()) h = ad::leaky_relu(h, leaky_slope);
    }
    return h;
}

Matrix Discriminator::scores(const Matrix& x) const {
    ad::Graph g;
    const auto params = bind(g, false);
    return forward(params, g.constant(x)).value();
}

// --- losses -----------------------------------------------------------------

ad::Var disc_loss(LossKind kind, ad::Var real, ad::Var fake) {
    require_nonempty(real, "disc_loss");
    require_nonempty(fake, "disc_loss");
    using namespace ad;
    switch (kind) {
        case LossKind::Vanilla: return mean(softplus(scale(real, -1.0))) + mean(softplus(fake));
        case LossKind::LSGAN:
            return scale(mean(square(add_scalar(real, -1.0))), 0.5) + scale(mean(square(fake)), 0.5);
        case LossKind::WGANGP: return mean(fake) - mean(real);
        case LossKind::Hinge:
            return mean(relu(add_scalar(scale(real, -1.0), 1.0))) + mean(relu(add_scalar(fake, 1.0)));
        case LossKind::KLfGAN: return mean(kl_exp_term(fake)) - mean(real);
    }
    throw std::logic_error("disc_loss: unhandled loss kind");
}

ad::Var gen_loss(LossKind kind, ad::Var fake) {
    require_nonempty(fake, "gen_loss");
    using namespace ad;
    switch (kind) {
        case LossKind::Vanilla: return mean(softplus(scale(fake, -1.0)));
        case LossKind::LSGAN: return scale(mean(square(add_scalar(fake, -1.0))), 0.5);
        case LossKind::WGANGP:
        case LossKind::Hinge: return scale(mean(fake), -1.0);
        case LossKind::KLfGAN: return scale(mean(kl_exp_term(fake)), -1.0);
    }
    throw std::logic_error("gen_loss: unhandled loss kind");
}

// --- penalties --------------------------------------------------------------

ad::Var r1_from_scores(ad::Var inputs, ad::Var scores, double gamma) {
    ad::Graph& g = inputs.graph();
    const ad::Var wrt[] = {inputs};
    const ad::Var grad = g.gradients(ad::sum(scores), wrt, true).front();
    const double batch = static_cast<double>(inputs.rows());
    return ad::scale(ad::sum(ad::square(grad)), 0.5 * gamma / batch);
}

ad::Var r1_penalty(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                   double gamma) {
    if (real.rows() == 0) throw ContractError("r1_penalty: empty batch");
    const ad::Var x = g.parameter(real);
    return r1_from_scores(x, d.forward(dparams, x), gamma);
}

double r1_penalty(const Discriminator& d, const Matrix& real, double gamma) {
    ad::Graph g;
    const auto params = d.bind(g, false);
    return r1_penalty(g, d, params, real, gamma).value().item();
}

Matrix interpolation_weights(std::size_t batch, Rng& rng) { return rng.uniform_matrix(batch, 1); }

ad::Var wgan_gp(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                const Matrix& fake, const Matrix& u, double lambda) {
    if (!real.same_shape(fake)) throw ShapeError("wgan_gp: real and fake batches differ in shape");
    if (u.rows() != real.rows() || u.cols() != 1) throw ShapeError("wgan_gp: need one weight per row");
    Matrix mixed(real.rows(), real.cols());
    for (std::size_t r = 0; r < real.rows(); ++r)
        for (std::size_t c = 0; c < real.cols(); ++c) mixed(r, c) = u[r] * real(r, c) + (1.0 - u[r]) * fake(r, c);
    const ad::Var x = g.parameter(std::move(mixed));
    const ad::Var scores = d.forward(dparams, x);
    const ad::Var wrt[] = {x};
    const ad::Var grad = g.gradients(ad::sum(scores), wrt, true).front();
    const ad::Var norms = ad::sqrt(ad::row_sum(ad::square(grad)));
    return ad::scale(ad::mean(ad::square(ad::add_scalar(norms, -1.0))), lambda);
}

ad::Var wgan_gp(ad::Graph& g, const Discriminator& d, std::span<const ad::Var> dparams, const Matrix& real,
                const Matrix& fake, Rng& rng, double lambda) {
    return wgan_gp(g, d, dparams, real, fake, interpolation_weights(real.rows(), rng), lambda);
}

}  // namespace eigengan
