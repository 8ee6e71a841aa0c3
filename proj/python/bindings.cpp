#include "eigengan/bench.hpp"
#include "eigengan/generators.hpp"
#include "eigengan/metrics.hpp"
#include "eigengan/pca.hpp"
#include "eigengan/serialize.hpp"
#include "eigengan/toy_data.hpp"
#include "eigengan/trainer.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

namespace py = pybind11;
using namespace eigengan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() == 1) return Matrix(1, a.shape(0), std::vector<double>(a.data(), a.data() + a.size()));
    if (a.ndim() != 2) throw ShapeError("expected a 1-d or 2-d array");
    return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    if (m.size() != 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return out;
}

Array to_vector(const Matrix& m) {
    Array out(static_cast<py::ssize_t>(m.size()));
    if (m.size() != 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return out;
}

LossKind loss_arg(const std::string& name) { return parse_loss_kind(name); }
LatentDist dist_arg(const std::string& name) { return parse_latent_dist(name); }

template <GeneratorModel G>
py::tuple sample(const G& model, std::size_t n, std::uint64_t seed) {
    Rng z_rng = stream_for(seed, Stream::Latent);
    Rng eps_rng = stream_for(seed, Stream::Noise);
    LatentBatch lb = model.latent_shape().sample(n, z_rng, eps_rng);
    py::list zs;
    for (const Matrix& z : lb.z) zs.append(to_array(z));
    return py::make_tuple(to_array(model.forward(lb)), zs, to_array(lb.eps));
}

template <GeneratorModel G>
Array forward(const G& model, const std::vector<Array>& z, const Array& eps) {
    LatentBatch lb;
    for (const Array& a : z) lb.z.push_back(to_matrix(a));
    lb.eps = to_matrix(eps);
    model.latent_shape().check(lb);
    return to_array(model.forward(lb));
}

template <GeneratorModel G>
py::dict attribution(const G& model, std::size_t n, std::uint64_t seed) {
    VarianceAttribution v = variance_attribution(model, n, seed);
    py::dict d;
    d["var_z"] = v.var_z;
    d["var_eps"] = v.var_eps;
    return d;
}

template <GeneratorModel G>
std::string save(const G& model, const TrainConfig& cfg) {
    ModelMeta meta;
    meta.seed = cfg.seed;
    meta.config = cfg;
    return save_model(AnyGenerator{model}, meta);
}

py::dict history_dict(const TrainHistory& h) {
    Array disc(static_cast<py::ssize_t>(h.size())), gen(static_cast<py::ssize_t>(h.size()));
    Array ortho(static_cast<py::ssize_t>(h.size())), sigma(static_cast<py::ssize_t>(h.size()));
    for (std::size_t i = 0; i < h.size(); ++i) {
        disc.mutable_data()[i] = h[i].disc_loss;
        gen.mutable_data()[i] = h[i].gen_loss;
        ortho.mutable_data()[i] = h[i].ortho_penalty;
        sigma.mutable_data()[i] = h[i].sigma;
    }
    py::dict d;
    d["disc_loss"] = disc;
    d["gen_loss"] = gen;
    d["ortho_penalty"] = ortho;
    d["sigma"] = sigma;
    d["csv"] = history_csv(h);
    return d;
}

template <GeneratorModel G>
py::dict train_model(const G& model, const Array& data, const TrainConfig& cfg) {
    Matrix x = to_matrix(data);
    std::optional<TrainResult<G>> r;
    {
        py::gil_scoped_release release;
        r.emplace(train(model, x, cfg));
    }
    py::dict d;
    d["model"] = r->model;
    d["ema"] = r->ema;
    d["history"] = history_dict(r->history);
    return d;
}

py::dict similarity_dict(const SimilarityResult& s) {
    py::dict d;
    d["mean"] = s.mean;
    d["pair_cos"] = s.pair_cos;
    d["matching"] = s.matching;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Subspace generators, adversarial training and evaluation";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);
    py::register_exception<DegenerateSpectrum>(m, "DegenerateSpectrum", PyExc_RuntimeError);

    m.def(
        "make_dataset",
        [](std::size_t ambient, std::size_t rank, std::size_t n, const std::string& dist, std::uint64_t seed) {
            ToyDataset ds = make_dataset(ambient, rank, n, dist_arg(dist), seed);
            py::dict d;
            d["samples"] = to_array(ds.samples);
            d["transform"] = to_array(ds.transform);
            d["translation"] = to_vector(ds.translation);
            return d;
        },
        py::arg("ambient"), py::arg("rank"), py::arg("n"), py::arg("dist") = "normal", py::arg("seed") = 0,
        "Samples rows y = A x + b; returns samples, transform (A) and translation (b).");

    m.def("covariance", [](const Array& x) { return to_array(covariance(to_matrix(x))); }, py::arg("data"));
    m.def(
        "sym_eig",
        [](const Array& s) {
            EigenDecomposition e = sym_eig(to_matrix(s));
            return py::make_tuple(to_vector(Matrix::row(e.eigenvalues)), to_array(e.eigenvectors));
        },
        py::arg("matrix"), "Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.");
    m.def("pca_basis", [](const Array& x, std::size_t q) { return to_array(pca_basis(to_matrix(x), q)); },
          py::arg("data"), py::arg("q"));
    m.def(
        "ppca_mle",
        [](const Array& x, std::size_t q) {
            PpcaSolution s = ppca_mle(to_matrix(x), q);
            py::dict d;
            d["basis"] = to_array(s.basis);
            d["importance"] = to_vector(s.importance);
            d["mean"] = to_vector(s.mean);
            d["sigma"] = s.sigma;
            return d;
        },
        py::arg("data"), py::arg("q"));
    m.def(
        "basis_similarity",
        [](const Array& basis, const Array& importance, const Array& ref) {
            return similarity_dict(basis_similarity(to_matrix(basis), to_matrix(importance), to_matrix(ref)));
        },
        py::arg("basis"), py::arg("importance"), py::arg("reference"));
    m.def(
        "entropy_coefficient_from_bins",
        [](const std::vector<double>& p) { return entropy_coefficient_from_bins(p); }, py::arg("p_given_bin"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_property(
            "loss", [](const TrainConfig& c) { return to_string(c.loss); },
            [](TrainConfig& c, const std::string& s) { c.loss = loss_arg(s); })
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("lr_g", &TrainConfig::lr_g)
        .def_readwrite("lr_d", &TrainConfig::lr_d)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("ortho_weight", &TrainConfig::ortho_weight)
        .def_readwrite("r1_gamma", &TrainConfig::r1_gamma)
        .def_readwrite("gp_lambda", &TrainConfig::gp_lambda)
        .def_readwrite("ema_decay", &TrainConfig::ema_decay)
        .def_readwrite("d_steps_per_g", &TrainConfig::d_steps_per_g)
        .def_readwrite("seed", &TrainConfig::seed)
        .def("validate", &TrainConfig::validate)
        .def("to_json", [](const TrainConfig& c) { return train_config_to_json(c); })
        .def_static("from_json", [](const std::string& s) { return train_config_from_json(s); });

    m.def(
        "table_train_config", [](const std::string& dist) { return table_train_config(dist_arg(dist)); },
        py::arg("dist") = "normal");

    py::class_<LinearEigenModel>(m, "LinearModel")
        .def_static(
            "create",
            [](std::size_t ambient, std::size_t q, std::uint64_t seed) {
                Rng rng(seed);
                return LinearEigenModel::create(ambient, q, rng);
            },
            py::arg("ambient"), py::arg("q"), py::arg("seed") = 0)
        .def_property_readonly("basis", [](const LinearEigenModel& g) { return to_array(g.subspace.basis); })
        .def_property_readonly("importance",
                               [](const LinearEigenModel& g) { return to_vector(g.subspace.importance); })
        .def_property_readonly("origin", [](const LinearEigenModel& g) { return to_vector(g.subspace.origin); })
        .def_property_readonly("sigma", &LinearEigenModel::sigma)
        .def_property_readonly("output_dim", &LinearEigenModel::output_dim)
        .def("sample", &sample<LinearEigenModel>, py::arg("n"), py::arg("seed") = 0,
             "Returns (x, [z], eps) for n fresh latent draws.")
        .def("forward", &forward<LinearEigenModel>, py::arg("z"), py::arg("eps"))
        .def("variance_attribution", &attribution<LinearEigenModel>, py::arg("n") = 2000, py::arg("seed") = 0)
        .def("save", &save<LinearEigenModel>, py::arg("config") = TrainConfig{});

    py::class_<LayeredConfig>(m, "LayeredConfig")
        .def(py::init<>())
        .def_readwrite("noise_dim", &LayeredConfig::noise_dim)
        .def_readwrite("widths", &LayeredConfig::widths)
        .def_readwrite("q", &LayeredConfig::q)
        .def_readwrite("data_dim", &LayeredConfig::data_dim)
        .def_readwrite("leaky_slope", &LayeredConfig::leaky_slope);

    py::class_<LayeredEigenModel>(m, "LayeredModel")
        .def_static(
            "create",
            [](const LayeredConfig& cfg, std::uint64_t seed) {
                Rng rng(seed);
                return LayeredEigenModel::create(cfg, rng);
            },
            py::arg("config") = LayeredConfig{}, py::arg("seed") = 0)
        .def("ablated", [](const LayeredEigenModel& g) { return ablate_subspaces(g); },
             "Copy without subspaces; z is added to the features directly.")
        .def_property_readonly("has_subspaces", &LayeredEigenModel::has_subspaces)
        .def_property_readonly("layer_count", &LayeredEigenModel::layer_count)
        .def_property_readonly("output_dim", &LayeredEigenModel::output_dim)
        .def("basis",
             [](const LayeredEigenModel& g, std::size_t layer) {
                 if (layer >= g.layers.size() || !g.layers[layer].subspace)
                     throw ContractError("layer has no subspace");
                 return to_array(g.layers[layer].subspace->basis);
             },
             py::arg("layer"))
        .def("importance",
             [](const LayeredEigenModel& g, std::size_t layer) {
                 if (layer >= g.layers.size() || !g.layers[layer].subspace)
                     throw ContractError("layer has no subspace");
                 return to_vector(g.layers[layer].subspace->importance);
             },
             py::arg("layer"))
        .def("sample", &sample<LayeredEigenModel>, py::arg("n"), py::arg("seed") = 0,
             "Returns (x, [z per layer], eps) for n fresh latent draws.")
        .def("forward", &forward<LayeredEigenModel>, py::arg("z"), py::arg("eps"))
        .def("variance_attribution", &attribution<LayeredEigenModel>, py::arg("n") = 2000, py::arg("seed") = 0)
        .def("save", &save<LayeredEigenModel>, py::arg("config") = TrainConfig{});

    m.def("train", &train_model<LinearEigenModel>, py::arg("model"), py::arg("data"), py::arg("config"));
    m.def("train", &train_model<LayeredEigenModel>, py::arg("model"), py::arg("data"), py::arg("config"));

    m.def(
        "load_model",
        [](const std::string& text) -> py::object {
            ModelFile f = load_model(text);
            return std::visit([](const auto& g) { return py::cast(g); }, f.model);
        },
        py::arg("json_text"));

    m.def("bench_spec_default_json", [] { return bench_spec_to_json(BenchSpec{}); });
    m.def(
        "run_bench",
        [](const std::string& spec_json, const std::string& format) {
            BenchSpec spec = bench_spec_from_json(spec_json);
            TableFormat f = format == "json" ? TableFormat::Json : TableFormat::Csv;
            if (format != "json" && format != "csv") throw ContractError("format must be csv or json");
            BenchReport r;
            {
                py::gil_scoped_release release;
                r = run_bench(spec);
            }
            return emit_table(r, f);
        },
        py::arg("spec_json"), py::arg("format") = "csv", "Runs a benchmark described by a spec JSON document.");
}
