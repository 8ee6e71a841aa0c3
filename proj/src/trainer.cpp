#include "eigengan/trainer.hpp"

#include "eigengan/adam.hpp"

#include <cmath>
#include <utility>

namespace eigengan {

namespace {

Matrix sample_rows(const Matrix& data, std::size_t batch, Rng& rng) {
    Matrix out(batch, data.cols());
    for (std::size_t r = 0; r < batch; ++r) {
        const auto src = data.row_span(rng.index(data.rows()));
        std::copy(src.begin(), src.end(), out.row_span(r).begin());
    }
    return out;
}

std::vector<AdamState> make_states(const std::vector<const Matrix*>& params, double lr, const TrainConfig& cfg) {
    std::vector<AdamState> states;
    for (const Matrix* p : params) states.emplace_back(*p, AdamConfig{lr, cfg.beta1, cfg.beta2, 1e-8});
    return states;
}

void apply(ad::Graph& g, const std::vector<ad::Var>& vars, const std::vector<Matrix*>& params,
           std::vector<AdamState>& states, std::size_t step, const char* who) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        adam_step(*params[i], g.grad(vars[i]), states[i]);
        if (!params[i]->all_finite()) throw TrainingDiverged(step, std::string(who) + " parameter became non-finite");
    }
}

void require_finite(double v, std::size_t step, const char* what) {
    if (!std::isfinite(v)) throw TrainingDiverged(step, std::string(what) + " is non-finite");
}

}  // namespace

void TrainConfig::validate() const {
    if (steps < 1) throw ContractError("TrainConfig: steps must be >= 1");
    if (batch < 2) throw ContractError("TrainConfig: batch must be >= 2");
    if (!(ema_decay >= 0.0 && ema_decay <= 1.0)) throw ContractError("TrainConfig: ema_decay must lie in [0, 1]");
    if (d_steps_per_g < 1) throw ContractError("TrainConfig: d_steps_per_g must be >= 1");
    if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ContractError("TrainConfig: learning rates must be positive");
    if (ortho_weight < 0.0 || r1_gamma < 0.0 || gp_lambda < 0.0)
        throw ContractError("TrainConfig: penalty weights must be non-negative");
}

Rng stream_for(std::uint64_t seed, Stream s) { return Rng::stream(seed, {static_cast<std::uint64_t>(s)}); }

void ema_update(const std::vector<Matrix*>& ema, const std::vector<const Matrix*>& params, double decay) {
    if (ema.size() != params.size()) throw ShapeError("ema_update: parameter lists differ in length");
    for (std::size_t i = 0; i < ema.size(); ++i) {
        if (!ema[i]->same_shape(*params[i]))
            throw ShapeError("ema_update: shape mismatch at parameter " + std::to_string(i));
        Matrix& e = *ema[i];
        const Matrix& p = *params[i];
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = decay * e[k] + (1.0 - decay) * p[k];
    }
}

std::vector<std::size_t> basis_parameter_indices(const LinearEigenModel&) { return {0}; }

std::vector<std::size_t> basis_parameter_indices(const LayeredEigenModel& m) {
    std::vector<std::size_t> idx;
    std::size_t k = 2;
    for (const EigenLayer& l : m.layers) {
        if (l.subspace) {
            idx.push_back(k);
            k += 4;
        }
        k += 2;
    }
    return idx;
}

double sigma_of(const LinearEigenModel& m) { return m.sigma(); }
double sigma_of(const LayeredEigenModel&) { return 0.0; }

template <GeneratorModel G>
TrainResult<G> train(const G& initial, const Matrix& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.rows() == 0) throw ContractError("train: empty dataset");
    if (data.cols() != initial.output_dim())
        throw ShapeError("train: data dim " + std::to_string(data.cols()) + " != model output dim " +
                         std::to_string(initial.output_dim()));

    Rng data_rng = stream_for(cfg.seed, Stream::Data);
    Rng z_rng = stream_for(cfg.seed, Stream::Latent);
    Rng eps_rng = stream_for(cfg.seed, Stream::Noise);
    Rng gp_rng = stream_for(cfg.seed, Stream::Interpolation);
    Rng d_rng = stream_for(cfg.seed, Stream::Discriminator);

    TrainResult<G> out{initial, initial, Discriminator::create_default(data.cols(), d_rng), {}};
    G& model = out.model;
    Discriminator& disc = out.discriminator;
    const LatentShape shape = model.latent_shape();
    const std::vector<std::size_t> bases = basis_parameter_indices(model);

    auto d_states = make_states(std::as_const(disc).parameters(), cfg.lr_d, cfg);
    auto g_states = make_states(std::as_const(model).parameters(), cfg.lr_g, cfg);
    out.history.reserve(cfg.steps);

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        StepRecord rec;
        for (std::size_t k = 0; k < cfg.d_steps_per_g; ++k) {
            ad::Graph g;
            const auto dvars = disc.bind(g, true);
            const auto gvars = bind_parameters(g, model, false);
            const Matrix real = sample_rows(data, cfg.batch, data_rng);
            const LatentBatch latents = shape.sample(cfg.batch, z_rng, eps_rng);
            const ad::Var fake = model.forward(g, gvars, latents);

            const ad::Var x_real = cfg.r1_gamma > 0.0 ? g.parameter(real) : g.constant(real);
            const ad::Var real_scores = disc.forward(dvars, x_real);
            const ad::Var fake_scores = disc.forward(dvars, fake);
            ad::Var loss = disc_loss(cfg.loss, real_scores, fake_scores);
            rec.disc_loss = loss.value().item();
            if (cfg.r1_gamma > 0.0) loss = loss + r1_from_scores(x_real, real_scores, cfg.r1_gamma);
            if (cfg.loss == LossKind::WGANGP)
                loss = loss + wgan_gp(g, disc, dvars, real, fake.value(), gp_rng, cfg.gp_lambda);
            require_finite(loss.value().item(), step, "discriminator loss");

            g.backward(loss);
            apply(g, dvars, disc.parameters(), d_states, step, "discriminator");
        }

        {
            ad::Graph g;
            const auto gvars = bind_parameters(g, model, true);
            const auto dvars = disc.bind(g, false);
            const LatentBatch latents = shape.sample(cfg.batch, z_rng, eps_rng);
            const ad::Var fake_scores = disc.forward(dvars, model.forward(g, gvars, latents));
            ad::Var loss = gen_loss(cfg.loss, fake_scores);
            rec.gen_loss = loss.value().item();
            if (!bases.empty()) {
                ad::Var ortho = ortho_penalty(gvars[bases[0]]);
                for (std::size_t i = 1; i < bases.size(); ++i) ortho = ortho + ortho_penalty(gvars[bases[i]]);
                rec.ortho_penalty = ortho.value().item();
                if (cfg.ortho_weight > 0.0) loss = loss + ad::scale(ortho, cfg.ortho_weight);
            }
            require_finite(loss.value().item(), step, "generator loss");

            g.backward(loss);
            apply(g, gvars, model.parameters(), g_states, step, "generator");
            ema_update(out.ema.parameters(), std::as_const(model).parameters(), cfg.ema_decay);
        }

        rec.sigma = sigma_of(model);
        out.history.push_back(rec);
    }
    return out;
}

template TrainResult<LinearEigenModel> train(const LinearEigenModel&, const Matrix&, const TrainConfig&);
template TrainResult<LayeredEigenModel> train(const LayeredEigenModel&, const Matrix&, const TrainConfig&);

}  // namespace eigengan
