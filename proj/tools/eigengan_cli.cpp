// eigengan: train, benchmark, traverse and evaluate desk-scale EigenGAN models.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include "eigengan/bench.hpp"
#include "eigengan/metrics.hpp"
#include "eigengan/pca.hpp"
#include "eigengan/serialize.hpp"
#include "eigengan/toy_data.hpp"
#include "eigengan/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace eigengan;
using nlohmann::json;

namespace {

constexpr std::size_t kQuickSteps = 300;
constexpr std::size_t kQuickTrials = 2;

struct Options {
    bool quick = false;

    // train
    std::string kind = "linear";
    std::size_t rank = 0;
    std::size_t q = 1;
    std::size_t ambient = 32;
    std::size_t samples = 2048;
    std::string dist = "normal";
    std::string loss = "hinge";
    std::optional<std::size_t> steps;
    std::optional<std::size_t> batch;
    std::optional<double> lr_g, lr_d, r1_gamma, ema_decay, ortho_weight;
    std::uint64_t seed = 0;
    std::string out;
    std::string history;
    std::string config;

    // bench
    std::string spec;
    std::optional<std::string> bench_dist;
    std::optional<std::size_t> trials;
    std::vector<std::string> losses;
    std::vector<std::string> grid;
    std::optional<std::size_t> bench_ambient;
    std::optional<std::size_t> workers;
    bool full = false;
    std::string format = "csv";
    std::string timings;

    // traverse / entropy / variance / pca
    std::string model;
    std::size_t layer = 0;
    std::size_t dim = 0;
    std::size_t grid_steps = 11;
    double range = 4.5;
    std::string pred;
    std::optional<std::size_t> bins;
    std::optional<std::size_t> per_bin;
    std::size_t variance_samples = 2000;
    std::string data;
};

std::string stem_of(const std::string& path) {
    const std::filesystem::path p(path);
    return (p.parent_path() / p.stem()).string();
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") std::cout << content;
    else write_file(path, content);
}

TrainConfig train_config_from(const Options& o) {
    TrainConfig cfg = o.config.empty() ? TrainConfig{} : train_config_from_json(read_file(o.config));
    cfg.loss = parse_loss_kind(o.loss);
    if (o.steps) cfg.steps = *o.steps;
    if (o.batch) cfg.batch = *o.batch;
    if (o.lr_g) cfg.lr_g = *o.lr_g;
    if (o.lr_d) cfg.lr_d = *o.lr_d;
    if (o.r1_gamma) cfg.r1_gamma = *o.r1_gamma;
    if (o.ema_decay) cfg.ema_decay = *o.ema_decay;
    if (o.ortho_weight) cfg.ortho_weight = *o.ortho_weight;
    if (o.quick && !o.steps) cfg.steps = std::min(cfg.steps, kQuickSteps);
    cfg.seed = o.seed;
    cfg.validate();
    return cfg;
}

int cmd_train(const Options& o) {
    const TrainConfig cfg = train_config_from(o);
    if (o.rank == 0) throw std::invalid_argument("--rank must be >= 1");
    const ToyDataset data =
        make_dataset(o.ambient, o.rank, o.samples, parse_latent_dist(o.dist), Rng::stream(o.seed, {7}).next());
    Rng model_rng = stream_for(o.seed, Stream::Model);
    const ModelMeta meta{o.seed, cfg, kFormatVersion};
    const std::string stem = stem_of(o.out);
    const std::string history_path = o.history.empty() ? stem + ".history.csv" : o.history;

    json summary{{"model", o.out}, {"raw_model", stem + ".raw.json"}, {"history", history_path}};
    std::string ema_text, raw_text, hist_text;
    if (o.kind == "linear") {
        const auto result = train(LinearEigenModel::create(o.ambient, o.q, model_rng), data.samples, cfg);
        const SubspaceModel& s = result.ema.subspace;
        summary["similarity"] = basis_similarity(s.basis, s.importance, pca_basis(data.samples, o.q)).mean;
        summary["ortho_per_dim"] = ortho_penalty(s.basis) / static_cast<double>(o.q);
        summary["sigma"] = result.ema.sigma();
        ema_text = save_model(result.ema, meta);
        raw_text = save_model(result.model, meta);
        hist_text = history_csv(result.history);
    } else if (o.kind == "layered") {
        LayeredConfig lc;
        lc.q = o.q;
        lc.data_dim = o.ambient;
        const auto result = train(LayeredEigenModel::create(lc, model_rng), data.samples, cfg);
        const VarianceAttribution va = variance_attribution(result.ema, 2000, o.seed);
        summary["var_z"] = va.var_z;
        summary["var_eps"] = va.var_eps;
        ema_text = save_model(result.ema, meta);
        raw_text = save_model(result.model, meta);
        hist_text = history_csv(result.history);
    } else {
        throw std::invalid_argument("--kind must be linear or layered");
    }
    write_file(o.out, ema_text);
    write_file(stem + ".raw.json", raw_text);
    write_file(history_path, hist_text);
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_bench(const Options& o) {
    BenchSpec spec;
    if (!o.spec.empty()) {
        spec = bench_spec_from_json(read_file(o.spec));
    } else if (o.bench_dist) {
        spec.train = table_train_config(parse_latent_dist(*o.bench_dist));
    }
    if (o.bench_dist) spec.dist = parse_latent_dist(*o.bench_dist);
    if (!o.losses.empty()) {
        spec.losses.clear();
        for (const std::string& l : o.losses) spec.losses.push_back(parse_loss_kind(l));
    }
    if (!o.grid.empty()) {
        spec.grid.clear();
        for (const std::string& g : o.grid) spec.grid.push_back(parse_rank_pair(g));
    }
    if (o.full) spec.trials = 100;
    if (o.trials) spec.trials = *o.trials;
    if (o.bench_ambient) spec.ambient = *o.bench_ambient;
    if (o.workers) spec.workers = *o.workers;
    if (o.steps) spec.train.steps = *o.steps;
    if (o.r1_gamma) spec.train.r1_gamma = *o.r1_gamma;
    if (o.quick) {
        if (!o.trials) spec.trials = std::min(spec.trials, kQuickTrials);
        if (!o.steps) spec.train.steps = std::min(spec.train.steps, kQuickSteps);
    }
    spec.master_seed = o.seed;
    if (o.format != "csv" && o.format != "json") throw std::invalid_argument("--format must be csv or json");
    spec.validate();

    const BenchReport report = run_bench(spec, [](const CellResult& c) {
        std::fprintf(stderr, "%-9s %-6s mean %.4f failures %zu%s\n", to_string(c.loss).c_str(), c.pair.label().c_str(),
                     c.mean, c.failures, c.flagged ? " FLAGGED" : "");
    });
    emit(o.out, emit_table(report, o.format == "json" ? TableFormat::Json : TableFormat::Csv));
    if (!o.timings.empty()) {
        std::string t = "loss,pair,seconds\n";
        for (const CellResult& c : report.cells) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.3f\n", c.wall_seconds);
            t += to_string(c.loss) + "," + c.pair.label() + buf;
        }
        write_file(o.timings, t);
    }
    return 0;
}

template <class F>
auto with_model(const std::string& path, F&& f) {
    const ModelFile file = load_model(read_file(path));
    return std::visit([&](const auto& m) { return f(m); }, file.model);
}

void check_index(std::size_t one_based, std::size_t count, const char* what) {
    if (one_based < 1 || one_based > count)
        throw std::out_of_range(std::string("--") + what + " must lie in [1, " + std::to_string(count) + "]");
}

int cmd_traverse(const Options& o) {
    const std::string csv = with_model(o.model, [&](const auto& m) {
        const LatentShape shape = m.latent_shape();
        check_index(o.layer, shape.z_dims.size(), "layer");
        check_index(o.dim, shape.z_dims[o.layer - 1], "dim");
        Rng z_rng = Rng::stream(o.seed, {0});
        Rng eps_rng = Rng::stream(o.seed, {1});
        const LatentBatch frozen = shape.sample(1, z_rng, eps_rng);
        const std::vector<double> grid = traversal_grid(o.grid_steps, o.range);
        const Matrix out = traverse(m, o.layer - 1, o.dim - 1, grid, frozen);
        std::string text = "z";
        for (std::size_t c = 0; c < out.cols(); ++c) text += ",x" + std::to_string(c + 1);
        text += '\n';
        char buf[40];
        for (std::size_t r = 0; r < out.rows(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g", grid[r]);
            text += buf;
            for (std::size_t c = 0; c < out.cols(); ++c) {
                std::snprintf(buf, sizeof buf, ",%.17g", out(r, c));
                text += buf;
            }
            text += '\n';
        }
        return text;
    });
    emit(o.out, csv);
    return 0;
}

AttributePredictor parse_predictor(const std::string& text, std::size_t dim) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("--pred: '" + item + "' is not a number");
        }
        if (used != item.size()) throw std::invalid_argument("--pred: '" + item + "' is not a number");
        values.push_back(v);
    }
    if (values.size() != dim + 2)
        throw std::invalid_argument("--pred needs " + std::to_string(dim) + " weights followed by c and k (" +
                                    std::to_string(dim + 2) + " values), got " + std::to_string(values.size()));
    AttributePredictor p;
    p.weight = Matrix(1, dim, std::vector<double>(values.begin(), values.begin() + static_cast<long>(dim)));
    p.offset = values[dim];
    p.sharpness = values[dim + 1];
    p.validate();
    return p;
}

int cmd_entropy(const Options& o) {
    const json records = with_model(o.model, [&](const auto& m) {
        const AttributePredictor pred = parse_predictor(o.pred, m.output_dim());
        EntropyOptions eo;
        eo.bins = o.bins.value_or(o.quick ? 20 : 100);
        eo.samples_per_bin = o.per_bin.value_or(o.quick ? 100 : 1000);
        eo.seed = o.seed;
        const LatentShape shape = m.latent_shape();
        if (o.layer) check_index(o.layer, shape.z_dims.size(), "layer");
        json out = json::array();
        for (std::size_t i = 1; i <= shape.z_dims.size(); ++i) {
            if (o.layer && i != o.layer) continue;
            if (o.dim) check_index(o.dim, shape.z_dims[i - 1], "dim");
            for (std::size_t j = 1; j <= shape.z_dims[i - 1]; ++j) {
                if (o.dim && j != o.dim) continue;
                out.push_back({{"layer", i},
                               {"dim", j},
                               {"entropy_coefficient", entropy_coefficient(m, i - 1, j - 1, pred, eo)}});
            }
        }
        return out;
    });
    emit(o.out, records.dump(2) + "\n");
    return 0;
}

int cmd_variance(const Options& o) {
    const VarianceAttribution va =
        with_model(o.model, [&](const auto& m) { return variance_attribution(m, o.variance_samples, o.seed); });
    emit(o.out, json{{"var_z", va.var_z}, {"var_eps", va.var_eps}}.dump(2) + "\n");
    return 0;
}

int cmd_pca(const Options& o) {
    const Matrix data = read_csv_matrix(read_file(o.data));
    const EigenDecomposition eig = sym_eig(covariance(data));
    const std::size_t keep = o.q == 0 ? data.cols() : o.q;
    if (keep > data.cols()) throw ContractError("--q exceeds the data dimension");
    std::string text = "eigenvalue";
    for (std::size_t c = 0; c < data.cols(); ++c) text += ",v" + std::to_string(c + 1);
    text += '\n';
    Matrix rows(keep, data.cols() + 1);
    for (std::size_t k = 0; k < keep; ++k) {
        rows(k, 0) = eig.eigenvalues[k];
        for (std::size_t c = 0; c < data.cols(); ++c) rows(k, c + 1) = eig.eigenvectors(c, k);
    }
    emit(o.out, text + write_csv_matrix(rows));
    return 0;
}

int cmd_dataset(const Options& o) {
    const ToyDataset ds = make_dataset(o.ambient, o.rank, o.samples, parse_latent_dist(o.dist), o.seed);
    emit(o.out, write_csv_matrix(ds.samples));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale EigenGAN: linear and layered subspace generators"};
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    Options o;
    app.add_flag("--quick", o.quick, "Shrink steps, trials and samples to smoke-test scale");

    auto* train_cmd = app.add_subcommand("train", "Train a generator on a toy dataset");
    train_cmd->add_option("--kind", o.kind, "linear or layered")->check(CLI::IsMember({"linear", "layered"}));
    train_cmd->add_option("--rank", o.rank, "Data rank r")->required();
    train_cmd->add_option("--q", o.q, "Subspace dimension (per layer for layered models)");
    train_cmd->add_option("--ambient", o.ambient, "Observation dimension D");
    train_cmd->add_option("--samples", o.samples, "Dataset size n");
    train_cmd->add_option("--dist", o.dist, "normal or uniform")->check(CLI::IsMember({"normal", "uniform"}));
    train_cmd->add_option("--loss", o.loss, "vanilla, lsgan, wgan-gp, hinge or kl-f-gan");
    train_cmd->add_option("--steps", o.steps, "Training steps");
    train_cmd->add_option("--batch", o.batch, "Batch size");
    train_cmd->add_option("--lr-g", o.lr_g, "Generator learning rate");
    train_cmd->add_option("--lr-d", o.lr_d, "Discriminator learning rate");
    train_cmd->add_option("--r1-gamma", o.r1_gamma, "R1 penalty weight");
    train_cmd->add_option("--ema-decay", o.ema_decay, "Generator moving-average decay");
    train_cmd->add_option("--ortho-weight", o.ortho_weight, "Orthogonality penalty weight");
    train_cmd->add_option("--config", o.config, "TrainConfig JSON used as the base configuration");
    train_cmd->add_option("--seed", o.seed, "Seed for data, initialisation and training");
    train_cmd->add_option("--out", o.out, "Path of the moving-average model JSON")->required();
    train_cmd->add_option("--history", o.history, "History CSV path (default <out stem>.history.csv)");

    auto* bench_cmd = app.add_subcommand("bench", "Run the basis-similarity grid");
    bench_cmd->add_option("--spec", o.spec, "BenchSpec JSON");
    bench_cmd->add_option("--dist", o.bench_dist, "normal or uniform")->check(CLI::IsMember({"normal", "uniform"}));
    bench_cmd->add_option("--trials", o.trials, "Trials per cell (default 20)");
    bench_cmd->add_flag("--full", o.full, "100 trials per cell");
    bench_cmd->add_option("--losses", o.losses, "Loss list")->delimiter(',');
    bench_cmd->add_option("--grid", o.grid, "Rank pairs such as 5:1,10:3")->delimiter(',');
    bench_cmd->add_option("--ambient", o.bench_ambient, "Observation dimension; 0 matches each data rank");
    bench_cmd->add_option("--steps", o.steps, "Training steps per trial");
    bench_cmd->add_option("--r1-gamma", o.r1_gamma, "R1 penalty weight");
    bench_cmd->add_option("--workers", o.workers, "Worker threads (default: hardware threads)");
    bench_cmd->add_option("--seed", o.seed, "Master seed");
    bench_cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    bench_cmd->add_option("--out", o.out, "Output path (default standard output)");
    bench_cmd->add_option("--timings", o.timings, "Write per-cell training seconds to this CSV");

    auto* traverse_cmd = app.add_subcommand("traverse", "Sweep one latent coordinate");
    traverse_cmd->add_option("--model", o.model, "Model JSON")->required();
    traverse_cmd->add_option("--layer", o.layer, "Layer index, from 1")->required();
    traverse_cmd->add_option("--dim", o.dim, "Dimension index, from 1")->required();
    traverse_cmd->add_option("--steps", o.grid_steps, "Grid points (1 gives the single point 0)");
    traverse_cmd->add_option("--range", o.range, "Grid spans [-range, range]");
    traverse_cmd->add_option("--seed", o.seed, "Seed for the frozen latents");
    traverse_cmd->add_option("--out", o.out, "Output path (default standard output)");

    auto* entropy_cmd = app.add_subcommand("entropy", "Entropy coefficient of latent dimensions");
    entropy_cmd->add_option("--model", o.model, "Model JSON")->required();
    entropy_cmd->add_option("--pred", o.pred, "Predictor w_1,...,w_d,c,k")->required();
    entropy_cmd->add_option("--layer", o.layer, "Only this layer (from 1)");
    entropy_cmd->add_option("--dim", o.dim, "Only this dimension (from 1)");
    entropy_cmd->add_option("--bins", o.bins, "Bins over [-4.5, 4.5] (default 100)");
    entropy_cmd->add_option("--samples", o.per_bin, "Generator draws per bin (default 1000)");
    entropy_cmd->add_option("--seed", o.seed, "Seed");
    entropy_cmd->add_option("--out", o.out, "Output path (default standard output)");

    auto* variance_cmd = app.add_subcommand("variance", "Output variance from z versus bottom noise");
    variance_cmd->add_option("--model", o.model, "Model JSON")->required();
    variance_cmd->add_option("--samples", o.variance_samples, "Draws per estimate (>= 100)");
    variance_cmd->add_option("--seed", o.seed, "Seed");
    variance_cmd->add_option("--out", o.out, "Output path (default standard output)");

    auto* pca_cmd = app.add_subcommand("pca", "Eigendecomposition of a CSV dataset's covariance");
    pca_cmd->add_option("--data", o.data, "CSV, one row per sample")->required();
    pca_cmd->add_option("--q", o.q, "Number of components (default all)");
    pca_cmd->add_option("--out", o.out, "Output path (default standard output)");

    auto* dataset_cmd = app.add_subcommand("dataset", "Write a toy dataset as CSV");
    dataset_cmd->add_option("--rank", o.rank, "Data rank r")->required();
    dataset_cmd->add_option("--ambient", o.ambient, "Observation dimension D");
    dataset_cmd->add_option("--samples", o.samples, "Number of samples");
    dataset_cmd->add_option("--dist", o.dist, "normal or uniform")->check(CLI::IsMember({"normal", "uniform"}));
    dataset_cmd->add_option("--seed", o.seed, "Seed");
    dataset_cmd->add_option("--out", o.out, "Output path (default standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    // pca's --q defaults to every component.
    if (pca_cmd->parsed() && pca_cmd->count("--q") == 0) o.q = 0;

    try {
        if (train_cmd->parsed()) return cmd_train(o);
        if (bench_cmd->parsed()) return cmd_bench(o);
        if (traverse_cmd->parsed()) return cmd_traverse(o);
        if (entropy_cmd->parsed()) return cmd_entropy(o);
        if (variance_cmd->parsed()) return cmd_variance(o);
        if (pca_cmd->parsed()) return cmd_pca(o);
        if (dataset_cmd->parsed()) return cmd_dataset(o);
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
