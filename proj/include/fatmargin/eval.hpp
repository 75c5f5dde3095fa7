#pragma once

#include "fatmargin/data_io.hpp"
#include "fatmargin/dataset.hpp"
#include "fatmargin/mcm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fatmargin {

enum class ModelKind { LinearHard, Linear, Kernel };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// k disjoint folds covering 0..M-1. Each class is shuffled with the seed and
/// dealt round-robin, so per-class counts across folds differ by at most one.
/// Throws ConfigError when k < 2 or a class has fewer than k samples.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed);

struct CVConfig {
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    ModelKind kind = ModelKind::Linear;
    // C, fuzzy, delta, standardize, solver and slack sign for every fold.
    TrainConfig train;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    double sv_tolerance = 1e-6;
    // 0 = hardware concurrency (capped by FATMARGIN_THREADS when set).
    std::size_t threads = 0;
    std::string dataset_name;

    void validate() const;
};

struct FoldResult {
    std::size_t fold = 0;
    bool ok = false;
    std::string error;
    double test_accuracy = 0.0;  // percent
    double train_accuracy = 0.0; // percent
    // Support-vector count; unset for linear models.
    std::optional<std::size_t> sv_count;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

struct Summary {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation, divisor n - 1
};

/// Mean and sample standard deviation of the values.
Summary summarize(std::span<const double> values);

struct CVReport {
    std::string dataset;
    ModelKind kind = ModelKind::Linear;
    bool fuzzy = false;
    double C = 0.0;
    std::optional<double> gamma;
    std::uint64_t seed = 0;
    std::size_t folds = 0;
    std::vector<FoldResult> fold_results;
    // Aggregates over folds that trained successfully.
    Summary test_accuracy;
    Summary train_accuracy;
    std::optional<Summary> sv_count;
    std::size_t failed_folds = 0;
    std::string selection = "none";

    /// Recomputes the aggregates from fold_results.
    void aggregate();
};

/// Trains one model on the given rows only. Standardization and memberships
/// are fitted to those rows.
Model fit_on(const Dataset& data, std::span<const std::size_t> train_rows, const CVConfig& config);

CVReport cross_validate(const Dataset& data, const CVConfig& config);

struct GridPoint {
    double C = 0.0;
    std::optional<double> gamma;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::optional<double> mean_sv;
    std::size_t failed_folds = 0;
};

struct GridResult {
    double best_C = 0.0;
    std::optional<double> best_gamma;
    CVReport best;
    std::vector<GridPoint> table;
};

inline const std::vector<double> kDefaultCGrid = {1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
inline const std::vector<double> kDefaultGammaGrid = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// Cross-validates every (C, gamma) pair on the same folds and keeps the one
/// with the highest mean test accuracy; ties go to smaller C, then smaller
/// gamma. gamma_grid is ignored for linear models.
GridResult grid_search(const Dataset& data, const CVConfig& base, std::vector<double> C_grid,
                       std::vector<double> gamma_grid = {});

/// Aligned text table of per-fold rows plus the aggregate line.
std::string format_report_text(const CVReport& report);
/// One row per fold: dataset,kind,C,gamma,fold,acc,sv_count,seed.
std::string format_report_csv(const CVReport& report);
std::string format_grid_csv(const GridResult& grid, const std::string& dataset, ModelKind kind);

/// Worker count: explicit request, else FATMARGIN_THREADS, else hardware
/// concurrency; never more than FATMARGIN_THREADS when that is set.
std::size_t resolve_threads(std::size_t requested);

} // namespace fatmargin
