#include "cli.hpp"

#include "fatmargin/data_io.hpp"
#include "fatmargin/error.hpp"
#include "fatmargin/eval.hpp"
#include "fatmargin/membership.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace fatmargin::cli {

namespace {

using json = nlohmann::json;

struct Options {
    std::string data;
    std::string label_column;
    std::string positive_label;
    std::string kind = "linear";
    bool fuzzy = false;
    double C = 1.0;
    double gamma = 1.0;
    double delta = 0.0;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    double sv_tol = 1e-6;
    std::string out;
    std::string model;
    std::string upper_slack = "plus";
    bool no_standardize = false;
    std::size_t threads = 0;
    std::string C_grid;
    std::string gamma_grid;
    std::string config;
};

CsvOptions csv_options(const Options& o)
{
    CsvOptions c;
    if (!o.label_column.empty())
        c.label_column = o.label_column;
    if (!o.positive_label.empty())
        c.positive_label = o.positive_label;
    return c;
}

TrainConfig train_config(const Options& o)
{
    TrainConfig t;
    t.C = o.C;
    t.fuzzy = o.fuzzy;
    if (o.delta != 0.0)
        t.delta = o.delta;
    t.standardize = !o.no_standardize;
    t.upper_slack_sign = upper_slack_sign_from_string(o.upper_slack);
    return t;
}

CVConfig cv_config(const Options& o)
{
    CVConfig c;
    c.folds = o.folds;
    c.seed = o.seed;
    c.kind = model_kind_from_string(o.kind);
    c.train = train_config(o);
    c.kernel = KernelSpec{KernelKind::Gaussian, o.gamma};
    c.sv_tolerance = o.sv_tol;
    c.threads = o.threads;
    c.dataset_name = std::filesystem::path(o.data).stem().string();
    return c;
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in grid list");
        }
    }
    return out;
}

json options_json(const Options& o)
{
    return {{"data", o.data},
            {"label_column", o.label_column},
            {"positive_label", o.positive_label},
            {"kind", o.kind},
            {"fuzzy", o.fuzzy},
            {"C", o.C},
            {"gamma", o.gamma},
            {"delta", o.delta},
            {"folds", o.folds},
            {"seed", o.seed},
            {"sv_tol", o.sv_tol},
            {"upper_slack", o.upper_slack},
            {"standardize", !o.no_standardize},
            {"model", o.model},
            {"out", o.out},
            {"C_grid", o.C_grid},
            {"gamma_grid", o.gamma_grid},
            {"config", o.config}};
}

class Run {
public:
    Run(std::string subcommand, const std::vector<std::string>& args, const Options& o)
        : manifest_{{"tool", "fatmargin"},
                    {"version", kToolVersion},
                    {"subcommand", std::move(subcommand)},
                    {"args", args},
                    {"options", options_json(o)},
                    {"seed", o.seed},
                    {"outputs", json::array()}}
    {
    }

    void write(const std::filesystem::path& path, std::string_view contents)
    {
        write_file_atomic(path, contents);
        manifest_["outputs"].push_back(path.string());
    }

    json& result() { return manifest_["result"]; }

    void finish(const std::filesystem::path& manifest_path)
    {
        write_file_atomic(manifest_path, manifest_.dump(2) + "\n");
    }

private:
    json manifest_;
};

std::filesystem::path with_suffix(const std::string& base, const std::string& suffix)
{
    return std::filesystem::path(base + suffix);
}

double train_accuracy(const Model& model, const Dataset& data)
{
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        correct += predict(model, data.features.row(i)).label == data.labels[i];
    return data.size() ? 100.0 * static_cast<double>(correct) / static_cast<double>(data.size()) : 0.0;
}

int cmd_train(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    if (o.out.empty())
        throw ConfigError("train needs --out");
    const auto data = load_csv(o.data, csv_options(o));
    auto cfg = cv_config(o);
    cfg.validate();
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    const auto model = fit_on(data, all, cfg);

    ModelFile file{model, {cfg.dataset_name, std::nullopt, o.seed}};
    if (cfg.kind == ModelKind::Kernel)
        file.provenance.gamma = o.gamma;

    const double acc = train_accuracy(model, data);
    std::string sv = "n/a";
    double h = 0.0;
    double objective = 0.0;
    std::visit(
        [&](const auto& m) {
            h = m.h;
            objective = m.objective;
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KernelModel>)
                sv = std::to_string(m.support_count());
        },
        model);

    Run run("train", args, o);
    run.write(o.out, serialize_model(file));
    run.result() = {{"h", h}, {"objective", objective}, {"sv_count", sv}, {"train_accuracy", acc}};
    run.finish(with_suffix(o.out, ".manifest.json"));
    out << fmt::format("h={:.6f} objective={:.6f} sv={} train_accuracy={:.2f}%\n", h, objective, sv, acc);
    return kOk;
}

std::size_t count_columns(const std::string& text)
{
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    }
    return 0;
}

int cmd_predict(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    if (o.model.empty())
        throw ConfigError("predict needs --model");
    const auto file = deserialize_model(read_file(o.model));
    const auto n = model_dimension(file.model);
    const auto text = read_file(o.data);
    const auto ncols = count_columns(text);

    Matrix features;
    std::vector<int> labels;
    if (ncols == 0) {
        features = Matrix(0, n);
    } else if (ncols == n) {
        std::istringstream in(text);
        features = read_feature_csv(in);
    } else if (ncols == n + 1) {
        auto opts = csv_options(o);
        opts.allow_incomplete = true;
        std::istringstream in(text);
        auto data = read_csv(in, opts);
        features = std::move(data.features);
        labels = std::move(data.labels);
    } else {
        throw StructuralError("input has " + std::to_string(ncols) + " columns, model expects "
                              + std::to_string(n) + " features");
    }

    std::string csv;
    std::size_t correct = 0;
    if (features.rows() > 0)
        csv = "index,score,label\n";
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto p = predict(file.model, features.row(i));
        csv += fmt::format("{},{:.17g},{}\n", i, p.score, p.label);
        if (!labels.empty() && p.label == labels[i])
            ++correct;
    }

    Run run("predict", args, o);
    if (!labels.empty()) {
        const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
        run.result() = {{"accuracy", acc}, {"samples", labels.size()}};
    }
    if (o.out.empty()) {
        out << csv;
    } else {
        run.write(o.out, csv);
        run.finish(with_suffix(o.out, ".manifest.json"));
    }
    if (!labels.empty())
        out << fmt::format("accuracy={:.4f}%\n", 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size()));
    return kOk;
}

int cmd_cv(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    const auto data = load_csv(o.data, csv_options(o));
    const auto report = cross_validate(data, cv_config(o));
    const auto text = format_report_text(report);
    out << text;
    if (!o.out.empty()) {
        Run run("cv", args, o);
        run.write(with_suffix(o.out, ".txt"), text);
        run.write(with_suffix(o.out, ".csv"), format_report_csv(report));
        run.result() = {{"mean_accuracy", report.test_accuracy.mean},
                        {"std_accuracy", report.test_accuracy.stddev},
                        {"failed_folds", report.failed_folds}};
        run.finish(with_suffix(o.out, ".manifest.json"));
    }
    return report.failed_folds == report.fold_results.size() ? kSolverError : kOk;
}

int cmd_grid(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    auto C_grid = kDefaultCGrid;
    auto gamma_grid = kDefaultGammaGrid;
    if (!o.config.empty()) {
        try {
            const auto j = json::parse(read_file(o.config));
            if (j.contains("C_grid"))
                C_grid = j.at("C_grid").get<std::vector<double>>();
            if (j.contains("gamma_grid"))
                gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad grid config: ") + e.what());
        }
    }
    if (!o.C_grid.empty())
        C_grid = parse_list(o.C_grid);
    if (!o.gamma_grid.empty())
        gamma_grid = parse_list(o.gamma_grid);

    const auto data = load_csv(o.data, csv_options(o));
    const auto cfg = cv_config(o);
    const auto grid = grid_search(data, cfg, C_grid, gamma_grid);
    const auto text = format_report_text(grid.best);
    out << text;
    if (!o.out.empty()) {
        Run run("grid", args, o);
        run.write(with_suffix(o.out, ".grid.csv"), format_grid_csv(grid, cfg.dataset_name, cfg.kind));
        run.write(with_suffix(o.out, ".txt"), text);
        run.write(with_suffix(o.out, ".csv"), format_report_csv(grid.best));
        run.result() = {{"best_C", grid.best_C},
                        {"best_gamma", grid.best_gamma ? json(*grid.best_gamma) : json(nullptr)},
                        {"mean_accuracy", grid.best.test_accuracy.mean},
                        {"std_accuracy", grid.best.test_accuracy.stddev},
                        {"C_grid", C_grid},
                        {"gamma_grid", gamma_grid}};
        run.finish(with_suffix(o.out, ".manifest.json"));
    }
    return kOk;
}

int cmd_memberships(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    auto data = load_csv(o.data, csv_options(o));
    if (!o.no_standardize)
        data = StandardizationParams::fit(data.features).apply(data);
    const auto mv = compute_memberships(data, o.delta != 0.0 ? std::optional<double>(o.delta) : std::nullopt);
    std::string csv = "sample_index,label,distance,s_i\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        csv += fmt::format("{},{},{:.17g},{:.17g}\n", i, data.labels[i], mv.distances[i], mv.values[i]);
    if (o.out.empty()) {
        out << csv;
        return kOk;
    }
    Run run("memberships", args, o);
    run.write(o.out, csv);
    run.result() = {{"delta", mv.delta}, {"radius_positive", mv.radii.positive}, {"radius_negative", mv.radii.negative}};
    run.finish(with_suffix(o.out, ".manifest.json"));
    return kOk;
}

int cmd_export(const Options& o, const std::vector<std::string>& args, std::ostream& out)
{
    if (o.model.empty())
        throw ConfigError("export needs --model");
    const auto file = deserialize_model(read_file(o.model));
    const auto* km = std::get_if<KernelModel>(&file.model);
    if (!km)
        throw ConfigError("closed-form export is unsupported for linear models");
    const auto text = export_closed_form(*km);
    if (o.out.empty()) {
        out << text;
        return kOk;
    }
    Run run("export", args, o);
    run.write(o.out, text);
    run.result() = {{"terms", km->support_count()}};
    run.finish(with_suffix(o.out, ".manifest.json"));
    return kOk;
}

void add_common(CLI::App* app, Options& o, bool needs_data)
{
    auto* data = app->add_option("--data", o.data, "CSV dataset");
    if (needs_data)
        data->required();
    app->add_option("--label-column", o.label_column, "label column index (0-based) or header name");
    app->add_option("--positive-label", o.positive_label, "raw label value mapped to +1");
    app->add_option("--kind", o.kind, "linear-hard | linear | kernel");
    app->add_flag("--fuzzy", o.fuzzy, "weight slacks by fuzzy memberships");
    app->add_option("--C", o.C, "slack penalty");
    app->add_option("--gamma", o.gamma, "Gaussian kernel width");
    app->add_option("--delta", o.delta, "membership delta (default: scale-relative)");
    app->add_option("--folds", o.folds, "cross-validation folds");
    app->add_option("--seed", o.seed, "fold shuffling seed");
    app->add_option("--sv-tol", o.sv_tol, "relative support-vector threshold");
    app->add_option("--out", o.out, "output path (prefix for cv/grid)");
    app->add_option("--upper-slack", o.upper_slack, "sign of q_i in the upper constraint: plus | minus");
    app->add_flag("--no-standardize", o.no_standardize, "train on raw features");
    app->add_option("--threads", o.threads, "worker threads (0 = FATMARGIN_THREADS or all cores)");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Minimal Complexity Machine classifiers trained by linear programming", "fatmargin"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options o;

    auto* train = app.add_subcommand("train", "train a model and write it to --out");
    add_common(train, o, true);
    auto* predict_cmd = app.add_subcommand("predict", "score a CSV with a saved model");
    add_common(predict_cmd, o, true);
    predict_cmd->add_option("--model", o.model, "model file")->required();
    auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
    add_common(cv, o, true);
    auto* grid = app.add_subcommand("grid", "grid search over C and gamma");
    add_common(grid, o, true);
    grid->add_option("--C-grid", o.C_grid, "comma-separated C values");
    grid->add_option("--gamma-grid", o.gamma_grid, "comma-separated gamma values");
    grid->add_option("--config", o.config, "JSON file with C_grid / gamma_grid arrays");
    auto* memberships = app.add_subcommand("memberships", "fuzzy memberships as CSV");
    add_common(memberships, o, true);
    auto* export_cmd = app.add_subcommand("export", "closed-form expression of a Gaussian kernel model");
    add_common(export_cmd, o, false);
    export_cmd->add_option("--model", o.model, "model file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o_out;
        std::ostringstream o_err;
        const int code = app.exit(e, o_out, o_err);
        out << o_out.str();
        err << o_err.str();
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*train)
            return cmd_train(o, args, out);
        if (*predict_cmd)
            return cmd_predict(o, args, out);
        if (*cv)
            return cmd_cv(o, args, out);
        if (*grid)
            return cmd_grid(o, args, out);
        if (*memberships)
            return cmd_memberships(o, args, out);
        if (*export_cmd)
            return cmd_export(o, args, out);
    } catch (const TrainingError& e) {
        err << "fatmargin: " << e.what() << '\n';
        return kSolverError;
    } catch (const Error& e) {
        err << "fatmargin: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

} // namespace fatmargin::cli
