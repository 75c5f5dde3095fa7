#include "fatmargin/eval.hpp"

#include "fatmargin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <thread>

namespace fatmargin {

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::LinearHard: return "linear-hard";
    case ModelKind::Linear: return "linear";
    case ModelKind::Kernel: return "kernel";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name)
{
    if (name == "linear-hard")
        return ModelKind::LinearHard;
    if (name == "linear")
        return ModelKind::Linear;
    if (name == "kernel")
        return ModelKind::Kernel;
    throw ConfigError("unknown model kind '" + name + "' (expected linear-hard, linear or kernel)");
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed)
{
    if (k < 2)
        throw ConfigError("cross-validation needs at least 2 folds");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] > 0 ? pos : neg).push_back(i);
    if (pos.size() < k || neg.size() < k)
        throw ConfigError("each class needs at least " + std::to_string(k) + " samples for " + std::to_string(k)
                          + "-fold cross-validation (have " + std::to_string(pos.size()) + " positive, "
                          + std::to_string(neg.size()) + " negative)");

    // Fisher-Yates on raw mt19937_64 draws; std::shuffle and the standard
    // distributions are not reproducible across library implementations.
    std::mt19937_64 rng(seed);
    auto shuffle = [&rng](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng() % i]);
    };
    shuffle(pos);
    shuffle(neg);

    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (const auto* cls : {&pos, &neg})
        for (auto idx : *cls)
            folds[next++ % k].push_back(idx);
    for (auto& f : folds)
        std::sort(f.begin(), f.end());
    return folds;
}

void CVConfig::validate() const
{
    if (folds < 2)
        throw ConfigError("cross-validation needs at least 2 folds");
    if (kind != ModelKind::LinearHard && !(train.C > 0.0 && std::isfinite(train.C)))
        throw ConfigError("C must be positive and finite");
    if (train.delta && !(*train.delta > 0.0))
        throw ConfigError("membership delta must be positive");
    if (kind == ModelKind::Kernel)
        kernel.validate();
    if (!(sv_tolerance >= 0.0))
        throw ConfigError("sv tolerance must be nonnegative");
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    if (values.empty())
        return s;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

void CVReport::aggregate()
{
    std::vector<double> test;
    std::vector<double> train;
    std::vector<double> sv;
    failed_folds = 0;
    for (const auto& f : fold_results) {
        if (!f.ok) {
            ++failed_folds;
            continue;
        }
        test.push_back(f.test_accuracy);
        train.push_back(f.train_accuracy);
        if (f.sv_count)
            sv.push_back(static_cast<double>(*f.sv_count));
    }
    test_accuracy = summarize(test);
    train_accuracy = summarize(train);
    sv_count = sv.empty() ? std::nullopt : std::optional<Summary>(summarize(sv));
}

Model fit_on(const Dataset& data, std::span<const std::size_t> train_rows, const CVConfig& config)
{
    const auto train = data.subset(train_rows);
    switch (config.kind) {
    case ModelKind::LinearHard: return train_linear_hard(train, config.train);
    case ModelKind::Linear: return train_linear(train, config.train);
    case ModelKind::Kernel: {
        KernelTrainConfig kc;
        static_cast<TrainConfig&>(kc) = config.train;
        kc.kernel = config.kernel;
        kc.sv_tolerance = config.sv_tolerance;
        return train_kernel(train, kc);
    }
    }
    throw ConfigError("unknown model kind");
}

std::size_t resolve_threads(std::size_t requested)
{
    std::size_t cap = 0;
    if (const char* env = std::getenv("FATMARGIN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            cap = static_cast<std::size_t>(v);
    }
    std::size_t n = requested;
    if (n == 0)
        n = cap != 0 ? cap : std::max(1u, std::thread::hardware_concurrency());
    if (cap != 0)
        n = std::min(n, cap);
    return std::max<std::size_t>(n, 1);
}

namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task)
{
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                task(i);
        });
    for (auto& th : pool)
        th.join();
}

double accuracy(const Model& model, const Dataset& data, std::span<const std::size_t> rows)
{
    if (rows.empty())
        return 0.0;
    std::size_t correct = 0;
    for (auto i : rows)
        if (predict(model, data.features.row(i)).label == data.labels[i])
            ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(rows.size());
}

FoldResult run_fold(const Dataset& data, const std::vector<std::vector<std::size_t>>& folds, std::size_t f,
                    const CVConfig& config)
{
    FoldResult r;
    r.fold = f;
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f)
            train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    r.train_size = train_rows.size();
    r.test_size = folds[f].size();
    try {
        const auto model = fit_on(data, train_rows, config);
        r.test_accuracy = accuracy(model, data, folds[f]);
        r.train_accuracy = accuracy(model, data, train_rows);
        if (const auto* km = std::get_if<KernelModel>(&model))
            r.sv_count = km->support_count();
        r.ok = true;
    } catch (const Error& e) {
        r.error = e.what();
    }
    return r;
}

CVReport empty_report(const CVConfig& config)
{
    CVReport report;
    report.dataset = config.dataset_name;
    report.kind = config.kind;
    report.fuzzy = config.train.fuzzy;
    report.C = config.kind == ModelKind::LinearHard ? 0.0 : config.train.C;
    if (config.kind == ModelKind::Kernel && config.kernel.kind == KernelKind::Gaussian)
        report.gamma = config.kernel.gamma;
    report.seed = config.seed;
    report.folds = config.folds;
    return report;
}

std::vector<double> sorted_unique(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string num(double v)
{
    return fmt::format("{:.6g}", v);
}

} // namespace

CVReport cross_validate(const Dataset& data, const CVConfig& config)
{
    config.validate();
    data.require_both_classes();
    const auto folds = stratified_kfold(data.labels, config.folds, config.seed);
    auto report = empty_report(config);
    report.fold_results.resize(folds.size());
    parallel_for(folds.size(), resolve_threads(config.threads),
                 [&](std::size_t f) { report.fold_results[f] = run_fold(data, folds, f, config); });
    report.aggregate();
    return report;
}

GridResult grid_search(const Dataset& data, const CVConfig& base, std::vector<double> C_grid,
                       std::vector<double> gamma_grid)
{
    C_grid = sorted_unique(std::move(C_grid));
    const bool kernel = base.kind == ModelKind::Kernel && base.kernel.kind == KernelKind::Gaussian;
    gamma_grid = kernel ? sorted_unique(std::move(gamma_grid)) : std::vector<double>{};
    if (base.kind == ModelKind::LinearHard)
        C_grid = {base.train.C};
    if (C_grid.empty() || (kernel && gamma_grid.empty()))
        throw ConfigError("grid search needs non-empty grids");
    for (double C : C_grid)
        if (!(C > 0.0))
            throw ConfigError("C grid values must be positive");
    for (double g : gamma_grid)
        if (!(g > 0.0))
            throw ConfigError("gamma grid values must be positive");

    data.require_both_classes();
    const auto folds = stratified_kfold(data.labels, base.folds, base.seed);
    const std::size_t ngamma = kernel ? gamma_grid.size() : 1;
    const std::size_t npoints = C_grid.size() * ngamma;

    std::vector<CVConfig> configs(npoints, base);
    for (std::size_t c = 0; c < C_grid.size(); ++c)
        for (std::size_t g = 0; g < ngamma; ++g) {
            auto& cfg = configs[c * ngamma + g];
            cfg.train.C = C_grid[c];
            if (kernel)
                cfg.kernel.gamma = gamma_grid[g];
            cfg.validate();
        }

    std::vector<FoldResult> results(npoints * folds.size());
    parallel_for(results.size(), resolve_threads(base.threads), [&](std::size_t t) {
        const auto p = t / folds.size();
        const auto f = t % folds.size();
        results[t] = run_fold(data, folds, f, configs[p]);
    });

    GridResult grid;
    double best_mean = -std::numeric_limits<double>::infinity();
    std::size_t best_point = 0;
    for (std::size_t p = 0; p < npoints; ++p) {
        auto report = empty_report(configs[p]);
        report.fold_results.assign(results.begin() + static_cast<std::ptrdiff_t>(p * folds.size()),
                                   results.begin() + static_cast<std::ptrdiff_t>((p + 1) * folds.size()));
        report.aggregate();
        GridPoint gp;
        gp.C = configs[p].train.C;
        gp.gamma = report.gamma;
        gp.mean_accuracy = report.test_accuracy.mean;
        gp.std_accuracy = report.test_accuracy.stddev;
        if (report.sv_count)
            gp.mean_sv = report.sv_count->mean;
        gp.failed_folds = report.failed_folds;
        grid.table.push_back(gp);
        const bool usable = report.failed_folds < report.fold_results.size();
        if (usable && gp.mean_accuracy > best_mean) {
            best_mean = gp.mean_accuracy;
            best_point = p;
            grid.best = std::move(report);
        }
    }
    if (best_mean == -std::numeric_limits<double>::infinity())
        throw TrainingError("every grid point failed to train", "Failed");
    grid.best_C = grid.table[best_point].C;
    grid.best_gamma = grid.table[best_point].gamma;
    grid.best.selection = "non-nested";
    return grid;
}

std::string format_report_text(const CVReport& r)
{
    std::string out;
    out += fmt::format("dataset: {}\n", r.dataset.empty() ? "-" : r.dataset);
    out += fmt::format("model: {}{}\n", to_string(r.kind), r.fuzzy ? " (fuzzy)" : "");
    out += fmt::format("C: {}\n", r.kind == ModelKind::LinearHard ? "n/a" : num(r.C));
    out += fmt::format("gamma: {}\n", r.gamma ? num(*r.gamma) : "n/a");
    out += fmt::format("folds: {}  seed: {}\n", r.folds, r.seed);
    out += "std: sample (divisor k-1)\n";
    out += fmt::format("selection: {}\n\n", r.selection);
    out += fmt::format("{:>4}  {:>6}  {:>6}  {:>9}  {:>9}  {:>8}  {}\n", "fold", "train", "test", "train_acc",
                       "test_acc", "sv_count", "status");
    for (const auto& f : r.fold_results) {
        out += fmt::format("{:>4}  {:>6}  {:>6}  {:>9.4f}  {:>9.4f}  {:>8}  {}\n", f.fold + 1, f.train_size,
                           f.test_size, f.train_accuracy, f.test_accuracy,
                           f.sv_count ? std::to_string(*f.sv_count) : "n/a", f.ok ? "ok" : "failed: " + f.error);
    }
    out += fmt::format("\ntest accuracy:  {:.4f} +/- {:.4f}\n", r.test_accuracy.mean, r.test_accuracy.stddev);
    out += fmt::format("train accuracy: {:.4f} +/- {:.4f}\n", r.train_accuracy.mean, r.train_accuracy.stddev);
    if (r.sv_count)
        out += fmt::format("support vectors: {:.4f} +/- {:.4f}\n", r.sv_count->mean, r.sv_count->stddev);
    else
        out += "support vectors: n/a\n";
    out += fmt::format("failed folds: {}\n", r.failed_folds);
    return out;
}

std::string format_report_csv(const CVReport& r)
{
    std::string out = "dataset,kind,C,gamma,fold,acc,sv_count,seed\n";
    for (const auto& f : r.fold_results) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.dataset, to_string(r.kind),
                           r.kind == ModelKind::LinearHard ? "NA" : num(r.C), r.gamma ? num(*r.gamma) : "NA",
                           f.fold + 1, f.ok ? fmt::format("{:.4f}", f.test_accuracy) : "NA",
                           f.sv_count ? std::to_string(*f.sv_count) : "NA", r.seed);
    }
    return out;
}

std::string format_grid_csv(const GridResult& grid, const std::string& dataset, ModelKind kind)
{
    std::string out = "dataset,kind,C,gamma,mean_acc,std_acc,mean_sv,failed_folds,selected\n";
    for (const auto& p : grid.table) {
        const bool selected = p.C == grid.best_C && p.gamma == grid.best_gamma;
        out += fmt::format("{},{},{},{},{:.4f},{:.4f},{},{},{}\n", dataset, to_string(kind), num(p.C),
                           p.gamma ? num(*p.gamma) : "NA", p.mean_accuracy, p.std_accuracy,
                           p.mean_sv ? fmt::format("{:.4f}", *p.mean_sv) : "NA", p.failed_folds,
                           selected ? 1 : 0);
    }
    return out;
}

} // namespace fatmargin
