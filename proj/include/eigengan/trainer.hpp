#pragma once

#include "eigengan/generators.hpp"
#include "eigengan/losses.hpp"
#include "eigengan/matrix.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eigengan {

struct TrainConfig {
    LossKind loss = LossKind::Hinge;
    std::size_t steps = 20000;
    std::size_t batch = 128;
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double ortho_weight = 1.0;
    double r1_gamma = 10.0;
    double gp_lambda = 10.0;
    double ema_decay = 0.999;
    std::size_t d_steps_per_g = 1;
    std::uint64_t seed = 0;

    /// Throws ContractError on steps < 1, batch < 2, decay outside [0, 1], etc.
    void validate() const;
};

struct StepRecord {
    double disc_loss = 0.0;
    double gen_loss = 0.0;
    /// Sum of ||UᵀU − I||²_F over all subspaces.
    double ortho_penalty = 0.0;
    /// Observation noise scale; 0 for generators without one.
    double sigma = 0.0;
};

using TrainHistory = std::vector<StepRecord>;

template <class G>
struct TrainResult {
    G model;
    G ema;
    Discriminator discriminator;
    TrainHistory history;
};

/// Raised when a loss or parameter becomes non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t step, const std::string& what)
        : std::runtime_error("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Independent random streams of one run, derived from the config seed.
enum class Stream : std::uint64_t { Data = 1, Latent = 2, Noise = 3, Interpolation = 4, Discriminator = 5, Model = 6, Dataset = 7 };
Rng stream_for(std::uint64_t seed, Stream s);

/// ema <- decay·ema + (1 − decay)·param, element-wise over matching lists.
void ema_update(const std::vector<Matrix*>& ema, const std::vector<const Matrix*>& params, double decay);

/// Alternating adversarial optimisation. Rows of `data` are real samples.
template <GeneratorModel G>
TrainResult<G> train(const G& initial, const Matrix& data, const TrainConfig& cfg);

/// Indices into parameters() of each subspace basis, in subspaces() order.
std::vector<std::size_t> basis_parameter_indices(const LinearEigenModel& m);
std::vector<std::size_t> basis_parameter_indices(const LayeredEigenModel& m);

double sigma_of(const LinearEigenModel& m);
double sigma_of(const LayeredEigenModel& m);

}  // namespace eigengan
