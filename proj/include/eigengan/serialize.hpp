#pragma once

// JSON and CSV persistence for models, configs and training histories.

#include "eigengan/generators.hpp"
#include "eigengan/trainer.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace eigengan {

inline constexpr int kFormatVersion = 1;

/// Thrown for malformed or incompatible documents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelMeta {
    std::uint64_t seed = 0;
    TrainConfig config;
    int version = kFormatVersion;
};

struct ModelFile {
    AnyGenerator model;
    ModelMeta meta;
};

/// Doubles are written in shortest round-trip form, so load(save(m)) == m bit for bit.
std::string save_model(const AnyGenerator& model, const ModelMeta& meta);
ModelFile load_model(std::string_view json_text);

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(std::string_view json_text);

/// step,disc_loss,gen_loss,ortho_penalty,sigma with 17 significant digits.
std::string history_csv(const TrainHistory& history);

/// Reads numeric CSV, one row per sample; a non-numeric first line is taken as a header.
Matrix read_csv_matrix(std::string_view text);
std::string write_csv_matrix(const Matrix& m);

std::string read_file(const std::string& path);
/// Writes through a temporary file and a rename so failures leave no partial output.
void write_file(const std::string& path, std::string_view content);

}  // namespace eigengan
