#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quotus/common.hpp"

namespace quotus::complete {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Cell {
    std::uint32_t row = 0;
    std::uint32_t col = 0;

    auto operator<=>(const Cell&) const = default;
};

struct LabeledCell {
    Cell cell;
    bool label = false;
};

/// Sparse value at a matrix position.
struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

/// Binary outlet-by-cluster citation matrix with a set of held-out positions.
/// The weighted and row-normalized views use observed entries only:
///   weighted(i,j)   = x(i,j) / sqrt(observed citations of column j)
///   normalized(i,j) = weighted(i,j) / ||observed part of weighted row i||
class QuoteMatrix {
public:
    QuoteMatrix(std::size_t rows, std::size_t cols, std::vector<Cell> positives, std::vector<Cell> held_out);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool value(std::size_t i, std::size_t j) const;
    bool observed(std::size_t i, std::size_t j) const;

    /// Sorted.
    const std::vector<Cell>& positives() const { return positives_; }
    const std::vector<Cell>& held_out() const { return held_out_; }

    /// Nonzero observed entries of the weighted view, sorted by (row, col).
    const std::vector<Triplet>& weighted() const { return weighted_; }
    /// Nonzero observed entries of the row-normalized view, sorted by (row, col).
    const std::vector<Triplet>& normalized() const { return normalized_; }

    /// Normalized view with zeros at unobserved positions.
    Matrix dense_normalized() const;
    /// 1 at observed positions, 0 at held-out ones.
    Matrix dense_mask() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Cell> positives_;
    std::vector<Cell> held_out_;
    std::vector<Triplet> weighted_;
    std::vector<Triplet> normalized_;
};

struct HoldoutSplit {
    std::vector<LabeledCell> dev;
    std::vector<LabeledCell> test;
};

struct BuiltMatrix {
    QuoteMatrix matrix;
    HoldoutSplit split;
};

/// Samples `holdout_count` distinct positions uniformly from all rows*cols
/// positions and splits them evenly into dev and test (dev gets the smaller
/// half when the count is odd). Throws InputError when the count is not
/// below rows*cols.
BuiltMatrix build_matrix(std::size_t rows, std::size_t cols, std::vector<Cell> positives, std::size_t holdout_count,
                         std::uint64_t seed);

/// Builds from (outlet, cluster) id pairs; `outlet_ids` and `cluster_ids`
/// define row and column order.
BuiltMatrix build_matrix(std::span<const std::pair<std::string, std::string>> edges,
                         std::span<const std::string> outlet_ids, std::span<const std::string> cluster_ids,
                         std::size_t holdout_count, std::uint64_t seed);

struct Baselines {
    /// Mean observed citation rate of each cluster.
    Vector popularity;
    /// Mean observed citation rate of each outlet.
    Vector propensity;
};

Baselines compute_baselines(const QuoteMatrix& m);

enum class BaselineMode { Popularity, PopularityPropensity };

using ScoreFn = std::function<double(std::size_t row, std::size_t col)>;

ScoreFn baseline_scores(const Baselines& b, BaselineMode mode);

struct SoftImputeParams {
    double lambda = 0.0;
    std::size_t max_rank = 20;
    std::size_t max_iters = 500;
    /// Stop once the relative change of the objective drops below tol.
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

/// Low-rank estimate U diag(D) V^T of the normalized matrix.
struct CompletionModel {
    Matrix U;
    Vector D;
    Matrix V;
    double lambda = 0.0;
    /// Objective after each iteration; the last entry belongs to the
    /// returned (thresholded) model.
    std::vector<double> objective;
    std::size_t iterations = 0;
    bool converged = true;

    std::size_t rank() const { return static_cast<std::size_t>(D.size()); }
    double predict(std::size_t i, std::size_t j) const;
    Matrix dense() const;
    double nuclear_norm() const { return D.sum(); }
};

/// Largest singular value of the zero-filled normalized matrix.
double max_singular_value(const QuoteMatrix& m, std::uint64_t seed = 0);

/// 0.5 * ||P(X - Xhat)||_F^2 + lambda * ||Xhat||_* over observed entries.
double objective(const QuoteMatrix& m, const Matrix& xhat, double lambda);

/// Minimizes 0.5 * ||P(X - Xhat)||_F^2 + lambda * ||Xhat||_* with
/// rank(Xhat) <= max_rank by alternating ridge regressions on the factors
/// (the soft-impute ALS scheme), starting from Xhat = 0 or from `warm`.
/// The solution is exact whenever the optimal rank is below max_rank.
CompletionModel soft_impute(const QuoteMatrix& m, const SoftImputeParams& p,
                            const CompletionModel* warm = nullptr, Diagnostics* diag = nullptr);

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
    double threshold = 0.0;
    ConfusionCounts counts;
};

double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);
/// 0 when any marginal is empty.
double mcc(const ConfusionCounts& c);

/// Labels are 0/1. Positive iff score >= threshold.
ConfusionCounts confusion(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold);
EvalReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold);

struct ThresholdChoice {
    double threshold = 0.0;
    double mcc = 0.0;
};

/// Best MCC over thresholds at every distinct score (ties: the higher
/// threshold). Throws InputError("threshold tuning undefined") when labels
/// hold a single class.
ThresholdChoice tune_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Tunes the threshold on dev and reports test metrics at that threshold.
EvalReport tune_and_evaluate(const ScoreFn& score, std::span<const LabeledCell> dev, std::span<const LabeledCell> test);

struct LambdaPathEntry {
    double lambda = 0.0;
    std::size_t rank = 0;
    double nuclear_norm = 0.0;
    double dev_mcc = 0.0;
    double threshold = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

struct TunedCompletion {
    CompletionModel model;
    EvalReport test;
    std::vector<LambdaPathEntry> path;
};

/// Fits along `lambdas` in descending order with warm starts and keeps the
/// model with the best dev MCC (ties: the larger lambda).
TunedCompletion tune_lambda(const QuoteMatrix& m, std::span<const double> lambdas, const SoftImputeParams& base,
                            std::span<const LabeledCell> dev, std::span<const LabeledCell> test,
                            Diagnostics* diag = nullptr);

/// `count` values from fraction_hi * sigma_max down to fraction_lo *
/// sigma_max, evenly spaced in log scale.
std::vector<double> lambda_grid(double sigma_max, std::size_t count, double fraction_hi = 0.9,
                                double fraction_lo = 0.05);

/// Text format: a header line, scalar fields, the objective trace, then
/// U, D, V each preceded by their shape.
void save_model(const std::filesystem::path& path, const CompletionModel& model);
CompletionModel load_model(const std::filesystem::path& path);

}  // namespace quotus::complete
