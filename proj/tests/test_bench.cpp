#include "eigengan/bench.hpp"

#include "eigengan/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace eigengan;

namespace {

BenchSpec tiny_spec() {
    BenchSpec s;
    s.grid = {{5, 1}};
    s.losses = {LossKind::Hinge};
    s.trials = 1;
    s.samples = 256;
    s.train.steps = 40;
    s.workers = 1;
    s.master_seed = 11;
    return s;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Grid, TableOrderAndParsing) {
    std::vector<std::string> labels;
    for (const RankPair& p : table_grid()) labels.push_back(p.label());
    EXPECT_EQ(labels, (std::vector<std::string>{"5→1", "5→3", "10→1", "10→3", "10→5", "20→1", "20→5", "20→10"}));
    EXPECT_EQ(parse_rank_pair("10:3"), (RankPair{10, 3}));
    EXPECT_EQ(parse_rank_pair("20->10"), (RankPair{20, 10}));
    EXPECT_EQ(parse_rank_pair("5→1"), (RankPair{5, 1}));
    EXPECT_THROW(parse_rank_pair("5"), std::invalid_argument);
    EXPECT_THROW(parse_rank_pair("a:b"), std::invalid_argument);
}

TEST(BenchSpecCheck, Validation) {
    BenchSpec s = tiny_spec();
    EXPECT_NO_THROW(s.validate());
    s.trials = 0;
    EXPECT_THROW(s.validate(), ContractError);
    s = tiny_spec();
    s.grid = {{3, 5}};
    EXPECT_THROW(s.validate(), ContractError);
    s = tiny_spec();
    s.ambient = 4;
    EXPECT_THROW(s.validate(), ContractError);
    s.ambient = 0;
    EXPECT_EQ(s.ambient_for({5, 1}), 5u);
    s.ambient = 32;
    EXPECT_EQ(s.ambient_for({5, 1}), 32u);
}

TEST(TrialSeedsCheck, PositionDerived) {
    const TrialSeeds a = trial_seeds(1, {5, 1}, 0);
    const TrialSeeds b = trial_seeds(1, {5, 1}, 0);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(a.model, b.model);
    EXPECT_NE(a.data, trial_seeds(1, {5, 1}, 1).data);
    EXPECT_NE(a.data, trial_seeds(1, {5, 3}, 0).data);
    EXPECT_NE(a.data, trial_seeds(2, {5, 1}, 0).data);
    EXPECT_NE(a.data, a.model);
}

TEST(Bench, SingleCellReport) {
    const BenchReport r = run_bench(tiny_spec());
    ASSERT_EQ(r.cells.size(), 1u);
    const CellResult& c = r.cells[0];
    ASSERT_EQ(c.similarities.size(), 1u);
    EXPECT_EQ(c.failures, 0u);
    EXPECT_FALSE(c.flagged);
    EXPECT_GE(c.similarities[0], 0.0);
    EXPECT_LE(c.similarities[0], 1.0);
    EXPECT_EQ(c.mean, c.similarities[0]);
    EXPECT_EQ(c.ambient, 5u);
    EXPECT_EQ(r.find(LossKind::Hinge, {5, 1}), &r.cells[0]);
    EXPECT_EQ(r.find(LossKind::LSGAN, {5, 1}), nullptr);

    const std::string csv = emit_table(r, TableFormat::Csv);
    EXPECT_EQ(count_lines(csv), 2u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "loss,5→1");
}

TEST(Bench, RepeatableAndIndependentOfWorkerCount) {
    BenchSpec s = tiny_spec();
    s.grid = {{5, 1}, {5, 3}};
    s.losses = {LossKind::Hinge, LossKind::WGANGP};
    s.trials = 2;
    const BenchReport seq = run_bench(s);
    s.workers = 3;
    std::size_t seen = 0;
    const BenchReport par = run_bench(s, [&](const CellResult&) { ++seen; });
    EXPECT_EQ(seen, 4u);
    EXPECT_EQ(emit_table(seq, TableFormat::Json), emit_table(par, TableFormat::Json));
    EXPECT_EQ(emit_table(seq, TableFormat::Csv), emit_table(par, TableFormat::Csv));
    for (const CellResult& c : seq.cells)
        for (double v : c.similarities) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    // Every loss sees the same data and initial model for a given trial.
    EXPECT_EQ(trial_seeds(s.master_seed, {5, 1}, 1).data, trial_seeds(s.master_seed, {5, 1}, 1).data);
}

TEST(Bench, ColumnsFollowTableOrderWithExtrasLast) {
    BenchReport r;
    const auto add = [&](LossKind loss, RankPair p, double v) {
        CellResult c;
        c.loss = loss;
        c.pair = p;
        c.similarities = {v};
        c.ortho_per_dim = {0.0};
        c.mean = v;
        r.cells.push_back(c);
    };
    add(LossKind::Hinge, {7, 2}, 0.5);
    add(LossKind::Hinge, {20, 10}, 0.25);
    add(LossKind::Hinge, {5, 1}, 0.999);
    add(LossKind::Vanilla, {5, 1}, std::nan(""));
    const std::string csv = emit_table(r, TableFormat::Csv);
    std::istringstream in(csv);
    std::string header, hinge, vanilla;
    std::getline(in, header);
    std::getline(in, hinge);
    std::getline(in, vanilla);
    EXPECT_EQ(header, "loss,5→1,20→10,7→2");
    EXPECT_EQ(hinge, "hinge,1.00,0.25,0.50");
    EXPECT_EQ(vanilla, "vanilla,nan,,");
}

TEST(Bench, JsonRoundTripKeepsMeans) {
    BenchSpec s = tiny_spec();
    s.losses = {LossKind::Hinge, LossKind::LSGAN};
    const BenchReport r = run_bench(s);
    const BenchReport back = parse_report_json(emit_table(r, TableFormat::Json));
    ASSERT_EQ(back.cells.size(), r.cells.size());
    EXPECT_EQ(back.master_seed, r.master_seed);
    EXPECT_EQ(back.dist, r.dist);
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        EXPECT_EQ(back.cells[i].mean, r.cells[i].mean);
        EXPECT_EQ(back.cells[i].similarities, r.cells[i].similarities);
        EXPECT_EQ(back.cells[i].loss, r.cells[i].loss);
        EXPECT_EQ(back.cells[i].pair, r.cells[i].pair);
    }
    EXPECT_EQ(emit_table(back, TableFormat::Json), emit_table(r, TableFormat::Json));
    EXPECT_THROW(parse_report_json("{\"cells\": 3}"), FormatError);
}

TEST(Bench, WallClockIsNotEmitted) {
    BenchReport r = run_bench(tiny_spec());
    const std::string before = emit_table(r, TableFormat::Json);
    r.cells[0].wall_seconds += 100.0;
    EXPECT_EQ(emit_table(r, TableFormat::Json), before);
}

TEST(Bench, CellConfigAppliesCriticStepsOnlyToWgan) {
    BenchSpec s = tiny_spec();
    s.train.d_steps_per_g = 2;
    EXPECT_EQ(cell_train_config(s, LossKind::Hinge).d_steps_per_g, 2u);
    EXPECT_EQ(cell_train_config(s, LossKind::Hinge).loss, LossKind::Hinge);
    EXPECT_EQ(cell_train_config(s, LossKind::WGANGP).d_steps_per_g, s.wgan_critic_steps);
    s.wgan_critic_steps = 0;
    EXPECT_EQ(cell_train_config(s, LossKind::WGANGP).d_steps_per_g, 2u);
}

TEST(Bench, SpecJsonRoundTrip) {
    BenchSpec s = tiny_spec();
    s.dist = LatentDist::Uniform;
    s.grid = {{10, 3}, {20, 5}};
    s.train.lr_g = 1e-3;
    s.wgan_critic_steps = 3;
    const BenchSpec back = bench_spec_from_json(bench_spec_to_json(s));
    EXPECT_EQ(back.grid, s.grid);
    EXPECT_EQ(back.losses, s.losses);
    EXPECT_EQ(back.dist, s.dist);
    EXPECT_EQ(back.trials, s.trials);
    EXPECT_EQ(back.samples, s.samples);
    EXPECT_EQ(back.train.lr_g, 1e-3);
    EXPECT_EQ(back.train.steps, s.train.steps);
    EXPECT_EQ(back.master_seed, s.master_seed);
    EXPECT_EQ(back.wgan_critic_steps, 3u);
    EXPECT_THROW(bench_spec_from_json("{\"trails\": 3}"), FormatError);
    const BenchSpec partial = bench_spec_from_json("{\"trials\": 3, \"grid\": [\"5:1\"]}");
    EXPECT_EQ(partial.trials, 3u);
    EXPECT_EQ(partial.grid, (std::vector<RankPair>{{5, 1}}));
}

TEST(Bench, TableTemplateDependsOnDistribution) {
    EXPECT_GT(table_train_config(LatentDist::Normal).r1_gamma, 0.0);
    EXPECT_EQ(table_train_config(LatentDist::Uniform).r1_gamma, 0.0);
    EXPECT_NO_THROW(table_train_config(LatentDist::Uniform).validate());
}
