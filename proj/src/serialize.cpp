#include "eigengan/serialize.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eigengan {

using nlohmann::json;

namespace {

json nested(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json flat(const Matrix& m) {
    json out = json::array();
    for (double v : m.data()) out.push_back(v);
    return out;
}

Matrix from_nested(const json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected nested arrays");
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw FormatError(std::string(what) + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Matrix from_flat(const json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
    Matrix m(1, j.size());
    for (std::size_t i = 0; i < j.size(); ++i) m[i] = j[i].get<double>();
    return m;
}

const json& field(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

json config_json(const TrainConfig& c) {
    return {{"loss", to_string(c.loss)},       {"steps", c.steps},         {"batch", c.batch},
            {"lr_g", c.lr_g},                  {"lr_d", c.lr_d},           {"beta1", c.beta1},
            {"beta2", c.beta2},                {"ortho_weight", c.ortho_weight},
            {"r1_gamma", c.r1_gamma},          {"gp_lambda", c.gp_lambda}, {"ema_decay", c.ema_decay},
            {"d_steps_per_g", c.d_steps_per_g}, {"seed", c.seed}};
}

TrainConfig config_from(const json& j) {
    if (!j.is_object()) throw FormatError("train config: expected an object");
    TrainConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "loss") c.loss = parse_loss_kind(value.get<std::string>());
        else if (key == "steps") c.steps = value.get<std::size_t>();
        else if (key == "batch") c.batch = value.get<std::size_t>();
        else if (key == "lr_g") c.lr_g = value.get<double>();
        else if (key == "lr_d") c.lr_d = value.get<double>();
        else if (key == "beta1") c.beta1 = value.get<double>();
        else if (key == "beta2") c.beta2 = value.get<double>();
        else if (key == "ortho_weight") c.ortho_weight = value.get<double>();
        else if (key == "r1_gamma") c.r1_gamma = value.get<double>();
        else if (key == "gp_lambda") c.gp_lambda = value.get<double>();
        else if (key == "ema_decay") c.ema_decay = value.get<double>();
        else if (key == "d_steps_per_g") c.d_steps_per_g = value.get<std::size_t>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw FormatError("train config: unknown field '" + key + "'");
    }
    return c;
}

json subspace_fields(const SubspaceModel& s) {
    return {{"U", nested(s.basis)}, {"L", flat(s.importance)}, {"mu", flat(s.origin)}};
}

SubspaceModel subspace_from(const json& j) {
    SubspaceModel s;
    s.basis = from_nested(field(j, "U"), "U");
    s.importance = from_flat(field(j, "L"), "L");
    s.origin = from_flat(field(j, "mu"), "mu");
    try {
        s.validate();
    } catch (const ShapeError& e) {
        throw FormatError(e.what());
    }
    return s;
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed JSON document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

}  // namespace

std::string save_model(const AnyGenerator& model, const ModelMeta& meta) {
    json doc;
    json layers = json::array();
    if (const auto* lin = std::get_if<LinearEigenModel>(&model)) {
        doc["kind"] = "linear";
        doc["ambient"] = lin->output_dim();
        layers.push_back(subspace_fields(lin->subspace));
        doc["log_sigma"] = lin->log_sigma.item();
        doc["bottom"] = nullptr;
    } else {
        const auto& lay = std::get<LayeredEigenModel>(model);
        doc["kind"] = "layered";
        doc["ambient"] = lay.output_dim();
        doc["leaky_slope"] = lay.leaky_slope;
        for (const EigenLayer& l : lay.layers) {
            json entry = l.subspace ? subspace_fields(*l.subspace) : json::object();
            entry["latent_dim"] = l.latent_dim;
            entry["weight"] = nested(l.map.weight);
            entry["bias"] = flat(l.map.bias);
            entry["activation"] = l.map.activation == Activation::LeakyRelu ? "leaky_relu" : "identity";
            entry["f_transform"] = l.subspace ? nested(l.map.f_transform) : json(nullptr);
            layers.push_back(std::move(entry));
        }
        doc["log_sigma"] = nullptr;
        doc["bottom"] = {{"weight", nested(lay.bottom_weight)}, {"bias", flat(lay.bottom_bias)}};
    }
    doc["layers"] = std::move(layers);
    doc["meta"] = {{"seed", meta.seed}, {"config", config_json(meta.config)}, {"version", meta.version}};
    return doc.dump(1) + "\n";
}

ModelFile load_model(std::string_view json_text) {
    return guarded([&] {
        const json doc = json::parse(json_text);
        ModelFile out;
        const json& meta = field(doc, "meta");
        out.meta.version = field(meta, "version").get<int>();
        if (out.meta.version != kFormatVersion)
            throw FormatError("unsupported model version " + std::to_string(out.meta.version));
        out.meta.seed = field(meta, "seed").get<std::uint64_t>();
        out.meta.config = config_from(field(meta, "config"));

        const std::string kind = field(doc, "kind").get<std::string>();
        const json& layers = field(doc, "layers");
        const std::size_t ambient = field(doc, "ambient").get<std::size_t>();
        if (kind == "linear") {
            if (layers.size() != 1) throw FormatError("linear model must have exactly one layer");
            LinearEigenModel m;
            m.subspace = subspace_from(layers[0]);
            m.log_sigma = Matrix::scalar(field(doc, "log_sigma").get<double>());
            if (m.output_dim() != ambient) throw FormatError("ambient does not match the basis");
            out.model = std::move(m);
        } else if (kind == "layered") {
            LayeredEigenModel m;
            m.leaky_slope = field(doc, "leaky_slope").get<double>();
            const json& bottom = field(doc, "bottom");
            m.bottom_weight = from_nested(field(bottom, "weight"), "bottom.weight");
            m.bottom_bias = from_flat(field(bottom, "bias"), "bottom.bias");
            for (const json& entry : layers) {
                EigenLayer l;
                l.latent_dim = field(entry, "latent_dim").get<std::size_t>();
                if (entry.contains("U")) l.subspace = subspace_from(entry);
                l.map.weight = from_nested(field(entry, "weight"), "weight");
                l.map.bias = from_flat(field(entry, "bias"), "bias");
                const std::string act = field(entry, "activation").get<std::string>();
                if (act == "leaky_relu") l.map.activation = Activation::LeakyRelu;
                else if (act == "identity") l.map.activation = Activation::Identity;
                else throw FormatError("unknown activation '" + act + "'");
                if (l.subspace) l.map.f_transform = from_nested(field(entry, "f_transform"), "f_transform");
                m.layers.push_back(std::move(l));
            }
            if (m.layers.empty()) throw FormatError("layered model has no layers");
            try {
                m.validate();
            } catch (const std::logic_error& e) {
                throw FormatError(e.what());
            }
            if (m.output_dim() != ambient) throw FormatError("ambient does not match the last layer");
            out.model = std::move(m);
        } else {
            throw FormatError("unknown model kind '" + kind + "'");
        }
        return out;
    });
}

std::string train_config_to_json(const TrainConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

TrainConfig train_config_from_json(std::string_view json_text) {
    return guarded([&] { return config_from(json::parse(json_text)); });
}

std::string history_csv(const TrainHistory& history) {
    std::string out = "step,disc_loss,gen_loss,ortho_penalty,sigma\n";
    char buf[160];
    for (std::size_t i = 0; i < history.size(); ++i) {
        const StepRecord& r = history[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1, r.disc_loss, r.gen_loss,
                      r.ortho_penalty, r.sigma);
        out += buf;
    }
    return out;
}

Matrix read_csv_matrix(std::string_view text) {
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        bool numeric = true;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t end = std::min(line.find(',', start), line.size());
            std::string cell = line.substr(start, end - start);
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) numeric = false;
            row.push_back(v);
            start = end + 1;
        }
        if (!numeric) {
            if (rows == 0 && cols == 0 && values.empty()) {
                cols = row.size();
                continue;  // header
            }
            throw FormatError("CSV line " + std::to_string(line_no) + ": non-numeric value");
        }
        if (cols == 0) cols = row.size();
        if (row.size() != cols)
            throw FormatError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " values, found " + std::to_string(row.size()));
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw FormatError("CSV contains no data rows");
    return Matrix(rows, cols, std::move(values));
}

std::string write_csv_matrix(const Matrix& m) {
    std::string out;
    char buf[40];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%s%.17g", c ? "," : "", m(r, c));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write to '" + path + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace eigengan
