#pragma once

// The basis-similarity grid: (data rank → subspace rank) × loss × trials.

#include "eigengan/losses.hpp"
#include "eigengan/toy_data.hpp"
#include "eigengan/trainer.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace eigengan {

struct RankPair {
    std::size_t data_rank = 0;
    std::size_t subspace_rank = 0;

    auto operator<=>(const RankPair&) const = default;
    /// "5→1"
    std::string label() const;
};

/// The eight column pairs of the published tables, in their order.
const std::vector<RankPair>& table_grid();
/// Accepts "5:1", "5->1" or "5→1".
RankPair parse_rank_pair(std::string_view text);

/// Training budget used for the similarity tables: short, aggressive runs with
/// strong R1 on normal latents and none on uniform ones.
TrainConfig table_train_config(LatentDist dist);

struct BenchSpec {
    std::vector<RankPair> grid = table_grid();
    std::vector<LossKind> losses = all_loss_kinds();
    LatentDist dist = LatentDist::Normal;
    std::size_t trials = 20;
    /// Observation dimension D; 0 means D equals each cell's data rank.
    std::size_t ambient = 0;
    std::size_t samples = 2048;
    TrainConfig train = table_train_config(LatentDist::Normal);
    /// Discriminator steps per generator step for wgan-gp cells; 0 keeps train.d_steps_per_g.
    std::size_t wgan_critic_steps = 5;
    std::uint64_t master_seed = 0;
    /// 0 means one worker per available hardware thread.
    std::size_t workers = 0;

    void validate() const;
    std::size_t ambient_for(const RankPair& p) const { return ambient == 0 ? p.data_rank : ambient; }
};

struct TrialSeeds {
    std::uint64_t data = 0;
    std::uint64_t model = 0;
    std::uint64_t train = 0;
};

/// Derived from (master, cell, trial) only, so results do not depend on
/// scheduling. The loss is deliberately not part of the key: every loss sees
/// the same datasets and initial models.
TrialSeeds trial_seeds(std::uint64_t master, const RankPair& pair, std::size_t trial);

struct TrialResult {
    double similarity = 0.0;  // NaN when training diverged
    double ortho_per_dim = 0.0;
    bool failed = false;
    std::string error;
    double seconds = 0.0;
};

/// The training config of one cell: the template with the loss and, for wgan-gp, the critic steps applied.
TrainConfig cell_train_config(const BenchSpec& spec, LossKind loss);

TrialResult run_trial(const BenchSpec& spec, LossKind loss, const RankPair& pair, std::size_t trial);

struct CellResult {
    LossKind loss = LossKind::Hinge;
    RankPair pair;
    std::size_t ambient = 0;
    /// One entry per trial; NaN marks a diverged trial.
    std::vector<double> similarities;
    /// ||UᵀU − I||²_F / q of the EMA basis per trial; NaN on failure.
    std::vector<double> ortho_per_dim;
    std::size_t failures = 0;
    bool flagged = false;
    double mean = 0.0;
    /// Summed training time of the cell's trials. Not part of emitted tables.
    double wall_seconds = 0.0;
};

struct BenchReport {
    LatentDist dist = LatentDist::Normal;
    std::uint64_t master_seed = 0;
    std::vector<CellResult> cells;  // loss-major, in spec order

    const CellResult* find(LossKind loss, const RankPair& pair) const;
};

using BenchProgress = std::function<void(const CellResult&)>;

/// Trials run on spec.workers threads; the report is identical for any worker count.
BenchReport run_bench(const BenchSpec& spec, const BenchProgress& on_cell = {});

enum class TableFormat { Csv, Json };

std::string emit_table(const BenchReport& report, TableFormat format);
BenchReport parse_report_json(std::string_view json_text);

std::string bench_spec_to_json(const BenchSpec& spec);
BenchSpec bench_spec_from_json(std::string_view json_text);

}  // namespace eigengan
