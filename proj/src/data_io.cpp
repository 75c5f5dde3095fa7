#include "fatmargin/data_io.hpp"

#include "fatmargin/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace fatmargin {

namespace {

using json = nlohmann::json;

std::string trim(std::string_view s)
{
    const auto* ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delimiter))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == delimiter)
        out.emplace_back();
    return out;
}

std::optional<double> parse_number(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+')
        ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        return std::nullopt;
    return v;
}

struct RawRow {
    std::size_t line;
    std::vector<std::string> fields;
};

struct RawTable {
    std::vector<std::string> header;
    std::vector<RawRow> rows;
};

// Header sniffing ignores the label column, given either by index or as the
// last column.
RawTable read_table(std::istream& in, char delimiter, HeaderMode header_mode,
                    std::optional<std::size_t> label_column, bool label_is_last)
{
    RawTable table;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto fields = split(line, delimiter);
        if (first) {
            first = false;
            bool is_header = header_mode == HeaderMode::Present;
            if (header_mode == HeaderMode::Auto) {
                for (std::size_t c = 0; c < fields.size(); ++c) {
                    if ((label_column && *label_column == c) || (label_is_last && c + 1 == fields.size()))
                        continue;
                    if (fields[c] != "?" && !fields[c].empty() && !parse_number(fields[c])) {
                        is_header = true;
                        break;
                    }
                }
            }
            if (is_header) {
                table.header = std::move(fields);
                continue;
            }
        }
        table.rows.push_back({lineno, std::move(fields)});
    }
    return table;
}

double parse_feature(const RawRow& row, std::size_t column, const std::string& name)
{
    const auto& f = row.fields[column];
    if (f.empty() || f == "?")
        throw DataError("row " + std::to_string(row.line) + ": missing value in column '" + name + "'");
    auto v = parse_number(f);
    if (!v || !std::isfinite(*v))
        throw DataError("row " + std::to_string(row.line) + ": non-numeric value '" + f + "' in column '"
                        + name + "'");
    return *v;
}

bool label_less(const std::string& a, const std::string& b)
{
    auto na = parse_number(a);
    auto nb = parse_number(b);
    if (na && nb)
        return *na < *nb;
    return a < b;
}

bool label_equal(const std::string& a, const std::string& b)
{
    auto na = parse_number(a);
    auto nb = parse_number(b);
    if (na && nb)
        return *na == *nb;
    return a == b;
}

} // namespace

Dataset read_csv(std::istream& in, const CsvOptions& options)
{
    std::optional<std::size_t> label_index;
    bool label_by_name = false;
    if (options.label_column) {
        if (auto v = parse_number(*options.label_column); v && *v >= 0 && std::floor(*v) == *v)
            label_index = static_cast<std::size_t>(*v);
        else
            label_by_name = true;
    }
    const auto header_mode = label_by_name ? HeaderMode::Present : options.header;

    auto table = read_table(in, options.delimiter, header_mode, label_index,
                            !label_index && !label_by_name);

    std::size_t ncols = 0;
    if (!table.header.empty())
        ncols = table.header.size();
    else if (!table.rows.empty())
        ncols = table.rows.front().fields.size();

    if (label_by_name) {
        auto it = std::find(table.header.begin(), table.header.end(), *options.label_column);
        if (it == table.header.end())
            throw DataError("label column '" + *options.label_column + "' not found in header");
        label_index = static_cast<std::size_t>(it - table.header.begin());
    }
    if (ncols == 0) {
        if (!options.allow_incomplete)
            throw DataError("file contains no data rows");
        Dataset empty;
        empty.features = Matrix(0, 0);
        return empty;
    }
    if (!label_index)
        label_index = ncols - 1;
    if (*label_index >= ncols)
        throw DataError("label column " + std::to_string(*label_index) + " is out of range (file has "
                        + std::to_string(ncols) + " columns)");

    Dataset data;
    data.source_columns = ncols;
    for (std::size_t c = 0; c < ncols; ++c) {
        if (c == *label_index)
            continue;
        data.feature_names.push_back(table.header.empty() ? "x" + std::to_string(data.feature_names.size() + 1)
                                                          : table.header[c]);
    }
    const auto n = data.feature_names.size();

    std::vector<std::string> raw_labels;
    std::vector<double> values;
    values.reserve(table.rows.size() * n);
    for (const auto& row : table.rows) {
        if (row.fields.size() != ncols)
            throw DataError("row " + std::to_string(row.line) + ": expected " + std::to_string(ncols)
                            + " fields, found " + std::to_string(row.fields.size()));
        std::size_t k = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (c == *label_index)
                continue;
            values.push_back(parse_feature(row, c, data.feature_names[k++]));
        }
        const auto& label = row.fields[*label_index];
        if (label.empty() || label == "?")
            throw DataError("row " + std::to_string(row.line) + ": missing label");
        raw_labels.push_back(label);
    }

    std::vector<std::string> distinct;
    for (const auto& l : raw_labels)
        if (std::none_of(distinct.begin(), distinct.end(), [&](const auto& d) { return label_equal(d, l); }))
            distinct.push_back(l);
    std::sort(distinct.begin(), distinct.end(), label_less);

    std::string positive;
    if (options.positive_label) {
        positive = *options.positive_label;
        const bool present = std::any_of(distinct.begin(), distinct.end(),
                                         [&](const auto& d) { return label_equal(d, positive); });
        if (!present && !options.allow_incomplete)
            throw DataError("unknown label value '" + positive + "': it does not occur in the label column");
        for (const auto& d : distinct)
            if (distinct.size() > 2 && !label_equal(d, positive))
                throw DataError("unknown label value '" + d + "': more than two classes in the label column");
    } else {
        if (distinct.size() > 2)
            throw DataError("unknown label value '" + distinct[2] + "': more than two classes in the label column");
        if (!distinct.empty())
            positive = distinct.back();
    }
    if (distinct.size() < 2 && !options.allow_incomplete)
        throw DataError(distinct.empty() ? "file contains no data rows" : "file contains a single class");

    data.features = Matrix(raw_labels.size(), n);
    for (std::size_t i = 0; i < raw_labels.size(); ++i)
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i * n), n, data.features.row(i).begin());
    data.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels)
        data.labels.push_back(label_equal(l, positive) ? 1 : -1);
    data.validate();
    return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    return read_csv(in, options);
}

Matrix read_feature_csv(std::istream& in, char delimiter, HeaderMode header)
{
    auto table = read_table(in, delimiter, header, std::nullopt, false);
    Matrix out;
    if (table.rows.empty())
        return Matrix(0, table.header.size());
    const auto ncols = table.rows.front().fields.size();
    std::vector<double> row_values(ncols);
    for (const auto& row : table.rows) {
        if (row.fields.size() != ncols)
            throw DataError("row " + std::to_string(row.line) + ": expected " + std::to_string(ncols)
                            + " fields, found " + std::to_string(row.fields.size()));
        for (std::size_t c = 0; c < ncols; ++c)
            row_values[c] = parse_feature(row, c, table.header.empty() ? "x" + std::to_string(c + 1)
                                                                       : table.header[c]);
        out.append_row(row_values);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

json standardization_to_json(const StandardizationParams& p)
{
    return {{"enabled", p.enabled}, {"mean", p.mean}, {"scale", p.scale}};
}

StandardizationParams standardization_from_json(const json& j)
{
    StandardizationParams p;
    p.enabled = j.at("enabled").get<bool>();
    p.mean = j.at("mean").get<std::vector<double>>();
    p.scale = j.at("scale").get<std::vector<double>>();
    if (p.mean.size() != p.scale.size())
        throw FormatError("standardization mean and scale differ in length");
    for (double s : p.scale)
        if (!(s > 0.0))
            throw FormatError("standardization scale must be positive");
    return p;
}

json model_to_json(const LinearModel& m)
{
    return {{"kind", "linear"},
            {"w", m.w},
            {"b", m.b},
            {"h", m.h},
            {"objective", m.objective},
            {"C", m.C},
            {"hard_margin", m.hard_margin},
            {"fuzzy", m.fuzzy},
            {"iterations", m.iterations},
            {"standardization", standardization_to_json(m.standardization)}};
}

json model_to_json(const KernelModel& m)
{
    json samples = json::array();
    for (std::size_t k = 0; k < m.support_samples.rows(); ++k) {
        const auto r = m.support_samples.row(k);
        samples.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return {{"kind", "kernel"},
            {"kernel", {{"type", to_string(m.kernel.kind)}, {"gamma", m.kernel.gamma}}},
            {"lambdas", m.lambdas},
            {"b", m.b},
            {"h", m.h},
            {"objective", m.objective},
            {"C", m.C},
            {"fuzzy", m.fuzzy},
            {"sv_tolerance", m.sv_tolerance},
            {"support_indices", m.support_indices},
            {"support_samples", samples},
            {"iterations", m.iterations},
            {"standardization", standardization_to_json(m.standardization)}};
}

LinearModel linear_from_json(const json& j)
{
    LinearModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.h = j.at("h").get<double>();
    m.objective = j.at("objective").get<double>();
    m.C = j.at("C").get<double>();
    m.hard_margin = j.at("hard_margin").get<bool>();
    m.fuzzy = j.at("fuzzy").get<bool>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.standardization = standardization_from_json(j.at("standardization"));
    if (m.w.size() != m.standardization.mean.size())
        throw FormatError("weight vector and standardization differ in length");
    return m;
}

KernelModel kernel_from_json(const json& j)
{
    KernelModel m;
    const auto& k = j.at("kernel");
    m.kernel.kind = kernel_kind_from_string(k.at("type").get<std::string>());
    m.kernel.gamma = k.at("gamma").get<double>();
    m.kernel.validate();
    m.lambdas = j.at("lambdas").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.h = j.at("h").get<double>();
    m.objective = j.at("objective").get<double>();
    m.C = j.at("C").get<double>();
    m.fuzzy = j.at("fuzzy").get<bool>();
    m.sv_tolerance = j.at("sv_tolerance").get<double>();
    m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.standardization = standardization_from_json(j.at("standardization"));
    const auto n = m.standardization.mean.size();
    const auto& samples = j.at("support_samples");
    if (samples.size() != m.support_indices.size())
        throw FormatError("support sample count does not match support indices");
    m.support_samples = Matrix(0, n);
    for (const auto& row : samples) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != n)
            throw FormatError("support sample has the wrong dimension");
        m.support_samples.append_row(values);
    }
    for (auto idx : m.support_indices) {
        if (idx >= m.lambdas.size())
            throw FormatError("support index out of range");
        m.support_lambdas.push_back(m.lambdas[idx]);
    }
    return m;
}

} // namespace

std::string serialize_model(const ModelFile& file)
{
    json j = std::visit([](const auto& m) { return model_to_json(m); }, file.model);
    j["format"] = "fatmargin-model";
    j["format_version"] = kModelFormatVersion;
    json prov = {{"dataset", file.provenance.dataset}};
    prov["gamma"] = file.provenance.gamma ? json(*file.provenance.gamma) : json(nullptr);
    prov["seed"] = file.provenance.seed ? json(*file.provenance.seed) : json(nullptr);
    j["provenance"] = prov;
    return j.dump(2) + "\n";
}

ModelFile deserialize_model(std::string_view text)
{
    try {
        const auto j = json::parse(text.begin(), text.end());
        if (!j.is_object() || j.value("format", std::string{}) != "fatmargin-model")
            throw FormatError("not a fatmargin model file");
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw FormatError("unsupported model format version " + std::to_string(version)
                              + " (expected " + std::to_string(kModelFormatVersion) + ")");
        ModelFile file;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "linear")
            file.model = linear_from_json(j);
        else if (kind == "kernel")
            file.model = kernel_from_json(j);
        else
            throw FormatError("unknown model kind '" + kind + "'");
        const auto& prov = j.at("provenance");
        file.provenance.dataset = prov.at("dataset").get<std::string>();
        if (!prov.at("gamma").is_null())
            file.provenance.gamma = prov.at("gamma").get<double>();
        if (!prov.at("seed").is_null())
            file.provenance.seed = prov.at("seed").get<std::uint64_t>();
        return file;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
}

Prediction predict(const Model& model, std::span<const double> x)
{
    return std::visit(
        [x](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>)
                return predict_linear(m, x);
            else
                return predict_kernel(m, x);
        },
        model);
}

std::size_t model_dimension(const Model& model)
{
    return std::visit([](const auto& m) { return m.standardization.mean.size(); }, model);
}

// ---------------------------------------------------------------------------
// Closed-form export

namespace {

std::string fixed4(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Four decimals; coefficients below 0.1 in magnitude switch to a mantissa
// with four decimals so that small terms keep their leading digits.
std::string coefficient(double v)
{
    char buf[64];
    if (v != 0.0 && std::abs(v) < 0.1)
        std::snprintf(buf, sizeof buf, "%.4e", v);
    else
        std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string factor(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::string squared_offset(std::size_t d, double center)
{
    const std::string var = "x" + std::to_string(d + 1);
    if (center < 0.0)
        return "(" + var + " + " + fixed4(-center) + ")^2";
    return "(" + var + " - " + fixed4(center) + ")^2";
}

} // namespace

std::string export_closed_form(const KernelModel& model)
{
    if (model.kernel.kind != KernelKind::Gaussian)
        throw ConfigError("closed-form export is unsupported for non-Gaussian kernels");
    const auto& st = model.standardization;
    const auto n = st.mean.size();

    // exp(-g |(x - mu)/s - z|^2) = exp(-sum_d (g / s_d^2) (x_d - (mu_d + s_d z_d))^2)
    std::vector<double> factors(n);
    for (std::size_t d = 0; d < n; ++d)
        factors[d] = model.kernel.gamma / (st.scale[d] * st.scale[d]);
    const bool uniform = std::all_of(factors.begin(), factors.end(), [&](double f) { return f == factors[0]; });

    std::ostringstream out;
    out << "f(";
    for (std::size_t d = 0; d < n; ++d)
        out << (d ? ", " : "") << 'x' << d + 1;
    out << ") = sign{";
    if (model.support_lambdas.empty()) {
        out << ' ' << coefficient(model.b) << " }\n";
        return out.str();
    }
    out << '\n';
    for (std::size_t k = 0; k < model.support_lambdas.size(); ++k) {
        const double lambda = model.support_lambdas[k];
        const auto center = st.invert(model.support_samples.row(k));
        out << "  ";
        if (k == 0)
            out << coefficient(lambda);
        else
            out << (lambda < 0.0 ? "- " : "+ ") << coefficient(std::abs(lambda));
        out << " * exp[-";
        if (uniform) {
            out << factor(factors[0]) << " * (";
            for (std::size_t d = 0; d < n; ++d)
                out << (d ? " + " : "") << squared_offset(d, center[d]);
            out << ")]\n";
        } else {
            out << '(';
            for (std::size_t d = 0; d < n; ++d)
                out << (d ? " + " : "") << factor(factors[d]) << " * " << squared_offset(d, center[d]);
            out << ")]\n";
        }
    }
    out << "  " << (model.b < 0.0 ? "- " : "+ ") << coefficient(std::abs(model.b)) << " }\n";
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw DataError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fatmargin
