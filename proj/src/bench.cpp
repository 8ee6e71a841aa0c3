#include "eigengan/bench.hpp"

#include "eigengan/metrics.hpp"
#include "eigengan/pca.hpp"
#include "eigengan/serialize.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

namespace eigengan {

using nlohmann::json;

std::string RankPair::label() const {
    return std::to_string(data_rank) + "→" + std::to_string(subspace_rank);
}

const std::vector<RankPair>& table_grid() {
    static const std::vector<RankPair> grid{{5, 1}, {5, 3}, {10, 1}, {10, 3}, {10, 5}, {20, 1}, {20, 5}, {20, 10}};
    return grid;
}

RankPair parse_rank_pair(std::string_view text) {
    const std::string s(text);
    std::size_t sep = 0, skip = 0;
    for (const std::string_view token : {std::string_view(":"), std::string_view("->"), std::string_view("→")}) {
        if (const auto pos = s.find(token); pos != std::string::npos) {
            sep = pos;
            skip = token.size();
            break;
        }
    }
    if (skip == 0) throw std::invalid_argument("rank pair '" + s + "' must look like 5:1");
    try {
        std::size_t used_a = 0, used_b = 0;
        const std::string a = s.substr(0, sep), b = s.substr(sep + skip);
        RankPair p{std::stoul(a, &used_a), std::stoul(b, &used_b)};
        if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing characters");
        return p;
    } catch (const std::exception&) {
        throw std::invalid_argument("rank pair '" + s + "' must look like 5:1");
    }
}

TrainConfig table_train_config(LatentDist dist) {
    TrainConfig c;
    c.steps = 4000;
    c.batch = 64;
    c.lr_d = 5e-3;
    c.lr_g = 2e-3;
    c.ema_decay = 0.995;
    c.r1_gamma = dist == LatentDist::Normal ? 100.0 : 0.0;
    return c;
}

void BenchSpec::validate() const {
    if (grid.empty()) throw ContractError("BenchSpec: empty grid");
    if (losses.empty()) throw ContractError("BenchSpec: no losses");
    if (trials < 1) throw ContractError("BenchSpec: trials must be >= 1");
    for (const RankPair& p : grid) {
        if (p.subspace_rank < 1 || p.subspace_rank > p.data_rank)
            throw ContractError("BenchSpec: need 1 <= subspace rank <= data rank in " + p.label());
        if (ambient != 0 && p.data_rank > ambient)
            throw ContractError("BenchSpec: data rank exceeds ambient dimension in " + p.label());
        if (samples < std::max<std::size_t>(2, 10 * p.data_rank))
            throw ContractError("BenchSpec: too few samples for " + p.label());
    }
    train.validate();
}

TrialSeeds trial_seeds(std::uint64_t master, const RankPair& pair, std::size_t trial) {
    const auto at = [&](std::uint64_t purpose) {
        return Rng::stream(master, {pair.data_rank, pair.subspace_rank, trial, purpose}).next();
    };
    return {at(0), at(1), at(2)};
}

TrainConfig cell_train_config(const BenchSpec& spec, LossKind loss) {
    TrainConfig cfg = spec.train;
    cfg.loss = loss;
    if (loss == LossKind::WGANGP && spec.wgan_critic_steps != 0) cfg.d_steps_per_g = spec.wgan_critic_steps;
    return cfg;
}

TrialResult run_trial(const BenchSpec& spec, LossKind loss, const RankPair& pair, std::size_t trial) {
    const auto start = std::chrono::steady_clock::now();
    const TrialSeeds seeds = trial_seeds(spec.master_seed, pair, trial);
    const ToyDataset data =
        make_dataset(spec.ambient_for(pair), pair.data_rank, spec.samples, spec.dist, seeds.data);
    Rng model_rng(seeds.model);
    const LinearEigenModel initial = LinearEigenModel::create(data.ambient, pair.subspace_rank, model_rng);
    TrainConfig cfg = cell_train_config(spec, loss);
    cfg.seed = seeds.train;

    TrialResult out;
    try {
        const auto result = train(initial, data.samples, cfg);
        const SubspaceModel& s = result.ema.subspace;
        out.similarity = basis_similarity(s.basis, s.importance, pca_basis(data.samples, pair.subspace_rank)).mean;
        out.ortho_per_dim = ortho_penalty(s.basis) / static_cast<double>(pair.subspace_rank);
    } catch (const TrainingDiverged& e) {
        out.failed = true;
        out.error = e.what();
        out.similarity = out.ortho_per_dim = std::numeric_limits<double>::quiet_NaN();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

const CellResult* BenchReport::find(LossKind loss, const RankPair& pair) const {
    for (const CellResult& c : cells)
        if (c.loss == loss && c.pair == pair) return &c;
    return nullptr;
}

namespace {

void finalize(CellResult& cell) {
    double sum = 0.0;
    std::size_t ok = 0;
    cell.failures = 0;
    for (double s : cell.similarities) {
        if (std::isnan(s)) {
            ++cell.failures;
        } else {
            sum += s;
            ++ok;
        }
    }
    cell.mean = ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    cell.flagged = static_cast<double>(cell.failures) > 0.2 * static_cast<double>(cell.similarities.size());
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec, const BenchProgress& on_cell) {
    spec.validate();
    struct Job {
        std::size_t cell;
        std::size_t trial;
    };
    BenchReport report;
    report.dist = spec.dist;
    report.master_seed = spec.master_seed;
    std::vector<Job> jobs;
    for (LossKind loss : spec.losses) {
        for (const RankPair& pair : spec.grid) {
            CellResult cell;
            cell.loss = loss;
            cell.pair = pair;
            cell.ambient = spec.ambient_for(pair);
            for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({report.cells.size(), t});
            report.cells.push_back(std::move(cell));
        }
    }

    std::vector<TrialResult> results(jobs.size());
    std::vector<std::atomic<std::size_t>> remaining(report.cells.size());
    for (auto& r : remaining) r.store(spec.trials);
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    std::exception_ptr error;
    std::mutex error_mutex;

    auto assemble = [&](std::size_t c) {
        CellResult& cell = report.cells[c];
        for (std::size_t t = 0; t < spec.trials; ++t) {
            const TrialResult& r = results[c * spec.trials + t];
            cell.similarities.push_back(r.similarity);
            cell.ortho_per_dim.push_back(r.ortho_per_dim);
            cell.wall_seconds += r.seconds;
        }
        finalize(cell);
    };

    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (error) return;
            }
            try {
                const CellResult& cell = report.cells[jobs[j].cell];
                results[j] = run_trial(spec, cell.loss, cell.pair, jobs[j].trial);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
            if (remaining[jobs[j].cell].fetch_sub(1) == 1) {
                std::lock_guard lock(progress_mutex);
                assemble(jobs[j].cell);
                if (on_cell) on_cell(report.cells[jobs[j].cell]);
            }
        }
    };

    std::size_t workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return report;
}

namespace {

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

std::string two_decimals(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string emit_table(const BenchReport& report, TableFormat format) {
    if (format == TableFormat::Json) {
        json cells = json::array();
        for (const CellResult& c : report.cells) {
            json sims = json::array(), ortho = json::array();
            for (double s : c.similarities) sims.push_back(number_or_null(s));
            for (double o : c.ortho_per_dim) ortho.push_back(number_or_null(o));
            cells.push_back({{"loss", to_string(c.loss)},
                             {"data_rank", c.pair.data_rank},
                             {"subspace_rank", c.pair.subspace_rank},
                             {"ambient", c.ambient},
                             {"mean", number_or_null(c.mean)},
                             {"similarities", sims},
                             {"ortho_per_dim", ortho},
                             {"failures", c.failures},
                             {"flagged", c.flagged}});
        }
        const json doc{{"version", kFormatVersion},
                       {"dist", to_string(report.dist)},
                       {"master_seed", report.master_seed},
                       {"cells", cells}};
        return doc.dump(2) + "\n";
    }

    // Columns: published pairs in table order, then any others in ascending order.
    std::vector<RankPair> columns;
    for (const RankPair& p : table_grid())
        if (std::any_of(report.cells.begin(), report.cells.end(), [&](const CellResult& c) { return c.pair == p; }))
            columns.push_back(p);
    std::vector<RankPair> extra;
    for (const CellResult& c : report.cells)
        if (std::find(columns.begin(), columns.end(), c.pair) == columns.end() &&
            std::find(extra.begin(), extra.end(), c.pair) == extra.end())
            extra.push_back(c.pair);
    std::sort(extra.begin(), extra.end());
    columns.insert(columns.end(), extra.begin(), extra.end());

    std::vector<LossKind> rows;
    for (const CellResult& c : report.cells)
        if (std::find(rows.begin(), rows.end(), c.loss) == rows.end()) rows.push_back(c.loss);

    std::string out = "loss";
    for (const RankPair& p : columns) out += "," + p.label();
    out += '\n';
    for (LossKind loss : rows) {
        out += to_string(loss);
        for (const RankPair& p : columns) {
            out += ',';
            if (const CellResult* c = report.find(loss, p)) out += two_decimals(c->mean);
        }
        out += '\n';
    }
    return out;
}

BenchReport parse_report_json(std::string_view json_text) {
    try {
        const json doc = json::parse(json_text);
        if (doc.at("version").get<int>() != kFormatVersion) throw FormatError("unsupported report version");
        BenchReport r;
        r.dist = parse_latent_dist(doc.at("dist").get<std::string>());
        r.master_seed = doc.at("master_seed").get<std::uint64_t>();
        for (const json& c : doc.at("cells")) {
            CellResult cell;
            cell.loss = parse_loss_kind(c.at("loss").get<std::string>());
            cell.pair = {c.at("data_rank").get<std::size_t>(), c.at("subspace_rank").get<std::size_t>()};
            cell.ambient = c.at("ambient").get<std::size_t>();
            cell.mean = number_from(c.at("mean"));
            for (const json& s : c.at("similarities")) cell.similarities.push_back(number_from(s));
            for (const json& o : c.at("ortho_per_dim")) cell.ortho_per_dim.push_back(number_from(o));
            cell.failures = c.at("failures").get<std::size_t>();
            cell.flagged = c.at("flagged").get<bool>();
            r.cells.push_back(std::move(cell));
        }
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
}

std::string bench_spec_to_json(const BenchSpec& spec) {
    json grid = json::array(), losses = json::array();
    for (const RankPair& p : spec.grid) grid.push_back(std::to_string(p.data_rank) + ":" + std::to_string(p.subspace_rank));
    for (LossKind l : spec.losses) losses.push_back(to_string(l));
    const json doc{{"grid", grid},
                   {"losses", losses},
                   {"dist", to_string(spec.dist)},
                   {"trials", spec.trials},
                   {"ambient", spec.ambient},
                   {"samples", spec.samples},
                   {"train", json::parse(train_config_to_json(spec.train))},
                   {"wgan_critic_steps", spec.wgan_critic_steps},
                   {"master_seed", spec.master_seed},
                   {"workers", spec.workers}};
    return doc.dump(2) + "\n";
}

BenchSpec bench_spec_from_json(std::string_view json_text) {
    try {
        const json doc = json::parse(json_text);
        if (!doc.is_object()) throw FormatError("bench spec: expected an object");
        BenchSpec spec;
        for (const auto& [key, value] : doc.items()) {
            if (key == "grid") {
                spec.grid.clear();
                for (const json& p : value) {
                    if (p.is_string()) spec.grid.push_back(parse_rank_pair(p.get<std::string>()));
                    else if (p.is_array() && p.size() == 2)
                        spec.grid.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
                    else throw FormatError("bench spec: grid entries must be \"r:q\" or [r, q]");
                }
            } else if (key == "losses") {
                spec.losses.clear();
                for (const json& l : value) spec.losses.push_back(parse_loss_kind(l.get<std::string>()));
            } else if (key == "dist") {
                spec.dist = parse_latent_dist(value.get<std::string>());
            } else if (key == "trials") {
                spec.trials = value.get<std::size_t>();
            } else if (key == "ambient") {
                spec.ambient = value.get<std::size_t>();
            } else if (key == "samples") {
                spec.samples = value.get<std::size_t>();
            } else if (key == "train") {
                spec.train = train_config_from_json(value.dump());
            } else if (key == "wgan_critic_steps") {
                spec.wgan_critic_steps = value.get<std::size_t>();
            } else if (key == "master_seed") {
                spec.master_seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                spec.workers = value.get<std::size_t>();
            } else {
                throw FormatError("bench spec: unknown field '" + key + "'");
            }
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed bench spec: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    } catch (const std::logic_error& e) {
        throw FormatError(e.what());
    }
}

}  // namespace eigengan
