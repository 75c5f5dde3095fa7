#pragma once

#include "fatmargin/dataset.hpp"
#include "fatmargin/mcm.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace fatmargin {

enum class HeaderMode { Auto, Present, Absent };

struct CsvOptions {
    // Column index (0-based) or header name; the last column when unset.
    std::optional<std::string> label_column;
    // Raw label value mapped to +1; every other value maps to -1. When
    // unset, {-1, 1} files keep their labels and otherwise the larger of the
    // two values (numeric order when both parse, else lexicographic) is +1.
    std::optional<std::string> positive_label;
    char delimiter = ',';
    HeaderMode header = HeaderMode::Auto;
    // Allow files with no data rows or a single class (prediction inputs).
    bool allow_incomplete = false;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset read_csv(std::istream& in, const CsvOptions& options = {});

/// Features-only CSV (no label column), for prediction inputs.
Matrix read_feature_csv(std::istream& in, char delimiter = ',', HeaderMode header = HeaderMode::Auto);

using Model = std::variant<LinearModel, KernelModel>;

struct Provenance {
    std::string dataset;
    std::optional<double> gamma;
    std::optional<std::uint64_t> seed;
};

struct ModelFile {
    Model model;
    Provenance provenance;
};

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const ModelFile& file);
/// Throws FormatError on malformed input or a version mismatch.
ModelFile deserialize_model(std::string_view text);

Prediction predict(const Model& model, std::span<const double> x);
std::size_t model_dimension(const Model& model);

/// Renders a Gaussian kernel model as a closed-form decision function in raw
/// feature coordinates. Throws ConfigError for other kernels.
std::string export_closed_form(const KernelModel& model);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

} // namespace fatmargin
