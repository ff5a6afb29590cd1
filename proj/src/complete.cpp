#include "quotus/complete.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_set>

#include <Eigen/SVD>

namespace quotus::complete {

namespace {

void sort_unique(std::vector<Cell>& cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Current iterate Xhat = U diag(s) V^T with U, V orthonormal; s holds the
// singular values (the squared factor scales of the ALS parametrization).
struct Factors {
    Matrix U;
    Vector s;
    Matrix V;

    double at(std::size_t i, std::size_t j) const {
        const auto r = s.size();
        double acc = 0.0;
        for (Eigen::Index k = 0; k < r; ++k) acc += U(i, k) * s(k) * V(j, k);
        return acc;
    }
};

// Filled matrix X* = P(X) + P_perp(Xhat): observed normalized entries plus
// the current estimate at held-out positions. Both parts are sparse.
class Filled {
public:
    Filled(const QuoteMatrix& m, const Factors& f) : m_(m) {
        const auto& held = m.held_out();
        held_values_.resize(held.size());
        for (std::size_t k = 0; k < held.size(); ++k) held_values_[k] = f.at(held[k].row, held[k].col);
    }

    // X* R for R with cols() rows.
    Matrix times(const Matrix& r) const {
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m_.rows()), r.cols());
        for (const auto& t : m_.normalized()) out.row(t.row) += t.value * r.row(t.col);
        const auto& held = m_.held_out();
        for (std::size_t k = 0; k < held.size(); ++k) out.row(held[k].row) += held_values_[k] * r.row(held[k].col);
        return out;
    }

    // X*^T L for L with rows() rows.
    Matrix transpose_times(const Matrix& l) const {
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m_.cols()), l.cols());
        for (const auto& t : m_.normalized()) out.row(t.col) += t.value * l.row(t.row);
        const auto& held = m_.held_out();
        for (std::size_t k = 0; k < held.size(); ++k) out.row(held[k].col) += held_values_[k] * l.row(held[k].row);
        return out;
    }

private:
    const QuoteMatrix& m_;
    std::vector<double> held_values_;
};

double observed_sq_norm(const QuoteMatrix& m) {
    double acc = 0.0;
    for (const auto& t : m.normalized()) acc += t.value * t.value;
    return acc;
}

// Objective of an orthonormal factorization without forming Xhat:
// ||P(X - Xhat)||^2 = ||P X||^2 - 2 <P X, Xhat> + ||Xhat||^2 - ||P_perp Xhat||^2.
double factored_objective(const QuoteMatrix& m, const Factors& f, double lambda, double x_sq) {
    double cross = 0.0;
    for (const auto& t : m.normalized()) cross += t.value * f.at(t.row, t.col);
    double held_sq = 0.0;
    for (const auto& c : m.held_out()) {
        const double v = f.at(c.row, c.col);
        held_sq += v * v;
    }
    const double fit = x_sq - 2.0 * cross + f.s.squaredNorm() - held_sq;
    return 0.5 * std::max(fit, 0.0) + lambda * f.s.sum();
}

CompletionModel zero_model(const QuoteMatrix& m, double lambda) {
    CompletionModel out;
    out.U = Matrix(static_cast<Eigen::Index>(m.rows()), 0);
    out.V = Matrix(static_cast<Eigen::Index>(m.cols()), 0);
    out.D = Vector(0);
    out.lambda = lambda;
    out.objective = {0.5 * observed_sq_norm(m)};
    out.iterations = 0;
    out.converged = true;
    return out;
}

// Orthonormal columns extending `basis` to `cols` columns.
Matrix extend_orthonormal(const Matrix& basis, std::size_t cols, std::mt19937_64& rng) {
    const auto rows = static_cast<std::size_t>(basis.rows());
    Matrix g = random_orthonormal(rows, cols, rng);
    Matrix out(basis.rows(), static_cast<Eigen::Index>(cols));
    out.leftCols(basis.cols()) = basis;
    for (auto j = basis.cols(); j < out.cols(); ++j) {
        Vector v = g.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < j; ++k) v -= out.col(k).dot(v) * out.col(k);
        out.col(j) = v.normalized();
    }
    return out;
}

// d / (d^2 + lambda) per component, with d = sqrt(s); dead components stay 0.
Vector ridge_shrink(const Vector& s, double lambda) {
    Vector out(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double denom = s(k) + lambda;
        out(k) = denom > 0.0 ? std::sqrt(s(k)) / denom : 0.0;
    }
    return out;
}

}  // namespace

QuoteMatrix::QuoteMatrix(std::size_t rows, std::size_t cols, std::vector<Cell> positives, std::vector<Cell> held_out)
    : rows_(rows), cols_(cols), positives_(std::move(positives)), held_out_(std::move(held_out)) {
    sort_unique(positives_);
    sort_unique(held_out_);
    for (const auto* cells : {&positives_, &held_out_})
        for (const auto& c : *cells)
            if (c.row >= rows_ || c.col >= cols_) throw InputError("matrix cell out of range");

    std::vector<std::size_t> col_count(cols_, 0);
    std::vector<Cell> observed_pos;
    for (const auto& c : positives_) {
        if (!observed(c.row, c.col)) continue;
        observed_pos.push_back(c);
        ++col_count[c.col];
    }
    std::vector<double> row_sq(rows_, 0.0);
    for (const auto& c : observed_pos) {
        const double w = 1.0 / std::sqrt(static_cast<double>(col_count[c.col]));
        weighted_.push_back({c.row, c.col, w});
        row_sq[c.row] += w * w;
    }
    for (const auto& t : weighted_) normalized_.push_back({t.row, t.col, t.value / std::sqrt(row_sq[t.row])});
}

bool QuoteMatrix::value(std::size_t i, std::size_t j) const {
    const Cell c{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    return std::binary_search(positives_.begin(), positives_.end(), c);
}

bool QuoteMatrix::observed(std::size_t i, std::size_t j) const {
    const Cell c{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    return !std::binary_search(held_out_.begin(), held_out_.end(), c);
}

Matrix QuoteMatrix::dense_normalized() const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (const auto& t : normalized_) out(t.row, t.col) = t.value;
    return out;
}

Matrix QuoteMatrix::dense_mask() const {
    Matrix out = Matrix::Ones(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (const auto& c : held_out_) out(c.row, c.col) = 0.0;
    return out;
}

BuiltMatrix build_matrix(std::size_t rows, std::size_t cols, std::vector<Cell> positives, std::size_t holdout_count,
                         std::uint64_t seed) {
    const std::uint64_t total = static_cast<std::uint64_t>(rows) * cols;
    if (holdout_count >= total)
        throw InputError("holdout count " + std::to_string(holdout_count) + " must be below the " +
                         std::to_string(total) + " matrix entries");

    // Floyd's sampling: exactly holdout_count distinct positions.
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(holdout_count * 2);
    for (std::uint64_t j = total - holdout_count; j < total; ++j) {
        const auto t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> picked(chosen.begin(), chosen.end());
    std::sort(picked.begin(), picked.end());
    std::shuffle(picked.begin(), picked.end(), rng);

    std::vector<Cell> held;
    held.reserve(picked.size());
    for (auto k : picked) held.push_back({static_cast<std::uint32_t>(k / cols), static_cast<std::uint32_t>(k % cols)});

    QuoteMatrix m(rows, cols, std::move(positives), held);
    HoldoutSplit split;
    const auto dev_count = holdout_count / 2;
    for (std::size_t k = 0; k < held.size(); ++k) {
        LabeledCell lc{held[k], m.value(held[k].row, held[k].col)};
        (k < dev_count ? split.dev : split.test).push_back(lc);
    }
    return {std::move(m), std::move(split)};
}

BuiltMatrix build_matrix(std::span<const std::pair<std::string, std::string>> edges,
                         std::span<const std::string> outlet_ids, std::span<const std::string> cluster_ids,
                         std::size_t holdout_count, std::uint64_t seed) {
    std::map<std::string, std::uint32_t> row_of, col_of;
    for (std::size_t i = 0; i < outlet_ids.size(); ++i) row_of.emplace(outlet_ids[i], static_cast<std::uint32_t>(i));
    for (std::size_t j = 0; j < cluster_ids.size(); ++j) col_of.emplace(cluster_ids[j], static_cast<std::uint32_t>(j));
    std::vector<Cell> positives;
    for (const auto& [o, c] : edges) {
        auto r = row_of.find(o);
        auto k = col_of.find(c);
        if (r == row_of.end() || k == col_of.end()) throw InputError("edge (" + o + ", " + c + ") has unknown endpoint");
        positives.push_back({r->second, k->second});
    }
    return build_matrix(outlet_ids.size(), cluster_ids.size(), std::move(positives), holdout_count, seed);
}

Baselines compute_baselines(const QuoteMatrix& m) {
    const auto rows = static_cast<Eigen::Index>(m.rows());
    const auto cols = static_cast<Eigen::Index>(m.cols());
    Vector row_obs = Vector::Constant(rows, static_cast<double>(cols));
    Vector col_obs = Vector::Constant(cols, static_cast<double>(rows));
    for (const auto& c : m.held_out()) {
        row_obs(c.row) -= 1.0;
        col_obs(c.col) -= 1.0;
    }
    Vector row_pos = Vector::Zero(rows), col_pos = Vector::Zero(cols);
    for (const auto& c : m.positives()) {
        if (!m.observed(c.row, c.col)) continue;
        row_pos(c.row) += 1.0;
        col_pos(c.col) += 1.0;
    }
    Baselines b;
    b.popularity = Vector::Zero(cols);
    b.propensity = Vector::Zero(rows);
    for (Eigen::Index j = 0; j < cols; ++j)
        if (col_obs(j) > 0) b.popularity(j) = col_pos(j) / col_obs(j);
    for (Eigen::Index i = 0; i < rows; ++i)
        if (row_obs(i) > 0) b.propensity(i) = row_pos(i) / row_obs(i);
    return b;
}

ScoreFn baseline_scores(const Baselines& b, BaselineMode mode) {
    if (mode == BaselineMode::Popularity)
        return [pop = b.popularity](std::size_t, std::size_t j) { return pop(static_cast<Eigen::Index>(j)); };
    return [pop = b.popularity, prop = b.propensity](std::size_t i, std::size_t j) {
        return pop(static_cast<Eigen::Index>(j)) + prop(static_cast<Eigen::Index>(i));
    };
}

double CompletionModel::predict(std::size_t i, std::size_t j) const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < D.size(); ++k) acc += U(i, k) * D(k) * V(j, k);
    return acc;
}

Matrix CompletionModel::dense() const { return U * D.asDiagonal() * V.transpose(); }

double max_singular_value(const QuoteMatrix& m, std::uint64_t seed) {
    if (m.normalized().empty()) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(m.cols()));
    for (auto& x : v) x = normal(rng);
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector u = Vector::Zero(static_cast<Eigen::Index>(m.rows()));
        for (const auto& t : m.normalized()) u(t.row) += t.value * v(t.col);
        Vector w = Vector::Zero(static_cast<Eigen::Index>(m.cols()));
        for (const auto& t : m.normalized()) w(t.col) += t.value * u(t.row);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        // ||S^T S v|| approaches sigma^2 from below.
        const double next = std::sqrt(norm);
        v = w / norm;
        if (std::abs(next - sigma) <= 1e-15 * next) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    return sigma;
}

double objective(const QuoteMatrix& m, const Matrix& xhat, double lambda) {
    const Matrix resid = (m.dense_normalized() - xhat).cwiseProduct(m.dense_mask());
    Eigen::JacobiSVD<Matrix> svd(xhat);
    return 0.5 * resid.squaredNorm() + lambda * svd.singularValues().sum();
}

CompletionModel soft_impute(const QuoteMatrix& m, const SoftImputeParams& p, const CompletionModel* warm,
                            Diagnostics* diag) {
    if (p.lambda < 0) throw InputError("lambda must be non-negative");
    if (m.held_out().size() >= m.rows() * m.cols()) throw InputError("no observed entries");
    const auto rank = std::min({p.max_rank, m.rows(), m.cols()});
    if (rank == 0) return zero_model(m, p.lambda);

    // The all-zero estimate is optimal iff lambda bounds the spectral norm.
    const double sigma_max = max_singular_value(m, p.seed);
    if (p.lambda >= sigma_max) return zero_model(m, p.lambda);

    std::mt19937_64 rng(p.seed);
    const auto r = static_cast<Eigen::Index>(rank);
    Factors f;
    if (warm && warm->rank() > 0) {
        const auto keep = std::min<Eigen::Index>(warm->D.size(), r);
        f.U = extend_orthonormal(warm->U.leftCols(keep), rank, rng);
        f.V = Matrix::Zero(static_cast<Eigen::Index>(m.cols()), r);
        f.V.leftCols(keep) = warm->V.leftCols(keep);
        f.s = Vector::Constant(r, warm->D(keep - 1));
        f.s.head(keep) = warm->D.head(keep);
    } else {
        // Xhat = 0: V is zero, U an arbitrary orthonormal basis.
        f.U = random_orthonormal(m.rows(), rank, rng);
        f.V = Matrix::Zero(static_cast<Eigen::Index>(m.cols()), r);
        f.s = Vector::Ones(r);
    }

    const double x_sq = observed_sq_norm(m);
    CompletionModel out;
    out.lambda = p.lambda;
    out.converged = false;

    // With A = U diag(d), B = V diag(d) and d = sqrt(s), each half step
    // solves a ridge problem for one factor against the filled matrix and
    // re-orthonormalizes through a small SVD.
    for (std::size_t it = 0; it < p.max_iters; ++it) {
        {
            const Vector d = f.s.cwiseSqrt();
            const Vector shrink = ridge_shrink(f.s, p.lambda);
            Matrix b = Filled(m, f).transpose_times(f.U) * shrink.asDiagonal();
            Eigen::JacobiSVD<Matrix> svd(b * d.asDiagonal(), Eigen::ComputeThinU | Eigen::ComputeThinV);
            f.V = svd.matrixU();
            f.s = svd.singularValues();
            f.U = f.U * svd.matrixV();
        }
        {
            const Vector d = f.s.cwiseSqrt();
            const Vector shrink = ridge_shrink(f.s, p.lambda);
            Matrix a = Filled(m, f).times(f.V) * shrink.asDiagonal();
            Eigen::JacobiSVD<Matrix> svd(a * d.asDiagonal(), Eigen::ComputeThinU | Eigen::ComputeThinV);
            f.U = svd.matrixU();
            f.s = svd.singularValues();
            f.V = f.V * svd.matrixV();
        }
        const double obj = factored_objective(m, f, p.lambda, x_sq);
        out.iterations = it + 1;
        const bool done = !out.objective.empty() &&
                          std::abs(out.objective.back() - obj) <
                              p.tol * std::max(std::abs(out.objective.back()), std::numeric_limits<double>::min());
        out.objective.push_back(obj);
        if (done) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged)
        warn(diag, "soft_impute did not converge in " + std::to_string(p.max_iters) + " iterations (lambda " +
                       std::to_string(p.lambda) + ")");

    // Final exact step: soft-threshold the SVD of X* V.
    Eigen::JacobiSVD<Matrix> svd(Filled(m, f).times(f.V), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = (svd.singularValues().array() - p.lambda).max(0.0).matrix();
    Eigen::Index kept = 0;
    while (kept < s.size() && s(kept) > 0.0) ++kept;
    out.U = svd.matrixU().leftCols(kept);
    out.V = (f.V * svd.matrixV()).leftCols(kept);
    out.D = s.head(kept);
    Factors final_f{out.U, out.D, out.V};
    out.objective.push_back(factored_objective(m, final_f, p.lambda, x_sq));
    return out;
}

double precision(const ConfusionCounts& c) {
    const auto denom = c.tp + c.fp;
    return denom ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double recall(const ConfusionCounts& c) {
    const auto denom = c.tp + c.fn;
    return denom ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double f1(const ConfusionCounts& c) {
    const auto denom = 2 * c.tp + c.fp + c.fn;
    return denom ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double mcc(const ConfusionCounts& c) {
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

ConfusionCounts confusion(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold) {
    if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
    ConfusionCounts c;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const bool pred = scores[k] >= threshold;
        if (pred && labels[k])
            ++c.tp;
        else if (pred)
            ++c.fp;
        else if (labels[k])
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

EvalReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold) {
    EvalReport r;
    r.counts = confusion(scores, labels, threshold);
    r.precision = precision(r.counts);
    r.recall = recall(r.counts);
    r.f1 = f1(r.counts);
    r.mcc = mcc(r.counts);
    r.threshold = threshold;
    return r;
}

ThresholdChoice tune_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
    std::uint64_t pos = 0;
    for (bool l : labels) pos += l;
    if (pos == 0 || pos == labels.size()) throw InputError("threshold tuning undefined");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Lower the threshold one distinct score at a time.
    ConfusionCounts c;
    c.fn = pos;
    c.tn = labels.size() - pos;
    ThresholdChoice best{std::numeric_limits<double>::infinity(), -2.0};
    for (std::size_t k = 0; k < order.size();) {
        const double thr = scores[order[k]];
        for (; k < order.size() && scores[order[k]] == thr; ++k) {
            if (labels[order[k]]) {
                ++c.tp;
                --c.fn;
            } else {
                ++c.fp;
                --c.tn;
            }
        }
        const double v = mcc(c);
        if (v > best.mcc) best = {thr, v};
    }
    return best;
}

EvalReport tune_and_evaluate(const ScoreFn& score, std::span<const LabeledCell> dev, std::span<const LabeledCell> test) {
    auto collect = [&](std::span<const LabeledCell> cells, std::vector<double>& s, std::vector<std::uint8_t>& l) {
        s.reserve(cells.size());
        l.reserve(cells.size());
        for (const auto& c : cells) {
            s.push_back(score(c.cell.row, c.cell.col));
            l.push_back(c.label ? 1 : 0);
        }
    };
    std::vector<double> dev_scores, test_scores;
    std::vector<std::uint8_t> dev_labels, test_labels;
    collect(dev, dev_scores, dev_labels);
    collect(test, test_scores, test_labels);
    const auto choice = tune_threshold(dev_scores, dev_labels);
    return evaluate(test_scores, test_labels, choice.threshold);
}

TunedCompletion tune_lambda(const QuoteMatrix& m, std::span<const double> lambdas, const SoftImputeParams& base,
                            std::span<const LabeledCell> dev, std::span<const LabeledCell> test, Diagnostics* diag) {
    if (lambdas.empty()) throw InputError("empty lambda grid");
    std::vector<double> grid(lambdas.begin(), lambdas.end());
    std::sort(grid.begin(), grid.end(), std::greater<>());

    std::vector<std::uint8_t> dev_labels;
    for (const auto& c : dev) dev_labels.push_back(c.label ? 1 : 0);

    TunedCompletion out;
    std::optional<CompletionModel> prev;
    double best_mcc = -2.0;
    double best_threshold = 0.0;
    for (double lambda : grid) {
        auto p = base;
        p.lambda = lambda;
        auto model = soft_impute(m, p, prev ? &*prev : nullptr, diag);
        std::vector<double> scores;
        scores.reserve(dev.size());
        for (const auto& c : dev) scores.push_back(model.predict(c.cell.row, c.cell.col));
        const auto choice = tune_threshold(scores, dev_labels);
        out.path.push_back({lambda, model.rank(), model.nuclear_norm(), choice.mcc, choice.threshold,
                            model.iterations, model.converged});
        if (choice.mcc > best_mcc) {
            best_mcc = choice.mcc;
            best_threshold = choice.threshold;
            out.model = model;
        }
        prev = std::move(model);
    }

    std::vector<double> test_scores;
    std::vector<std::uint8_t> test_labels;
    for (const auto& c : test) {
        test_scores.push_back(out.model.predict(c.cell.row, c.cell.col));
        test_labels.push_back(c.label ? 1 : 0);
    }
    out.test = evaluate(test_scores, test_labels, best_threshold);
    return out;
}

std::vector<double> lambda_grid(double sigma_max, std::size_t count, double fraction_hi, double fraction_lo) {
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) return {sigma_max * fraction_hi};
    const double hi = std::log(sigma_max * fraction_hi), lo = std::log(sigma_max * fraction_lo);
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(std::exp(hi + (lo - hi) * static_cast<double>(k) / static_cast<double>(count - 1)));
    return out;
}

namespace {

void write_matrix(std::ostream& os, const char* name, const Matrix& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
}

void expect_word(std::istream& is, const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) throw InputError("model file: expected '" + word + "', got '" + got + "'");
}

Matrix read_matrix(std::istream& is, const char* name) {
    expect_word(is, name);
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0) throw InputError(std::string("model file: bad shape for ") + name);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(is >> m(i, j))) throw InputError(std::string("model file: truncated ") + name);
    return m;
}

}  // namespace

void save_model(const std::filesystem::path& path, const CompletionModel& model) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "quotus-model 1\n";
    os << "lambda " << model.lambda << '\n';
    os << "rank " << model.rank() << '\n';
    os << "iterations " << model.iterations << '\n';
    os << "converged " << (model.converged ? 1 : 0) << '\n';
    os << "objective " << model.objective.size() << '\n';
    for (double v : model.objective) os << v << '\n';
    write_matrix(os, "U", model.U);
    write_matrix(os, "D", model.D);
    write_matrix(os, "V", model.V);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << os.str();
}

CompletionModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open " + path.string());
    CompletionModel m;
    expect_word(is, "quotus-model");
    int version = 0;
    if (!(is >> version) || version != 1) throw InputError("model file: unsupported version");
    std::size_t rank = 0, count = 0;
    int converged = 0;
    expect_word(is, "lambda");
    is >> m.lambda;
    expect_word(is, "rank");
    is >> rank;
    expect_word(is, "iterations");
    is >> m.iterations;
    expect_word(is, "converged");
    is >> converged;
    m.converged = converged != 0;
    expect_word(is, "objective");
    is >> count;
    m.objective.resize(count);
    for (auto& v : m.objective) is >> v;
    if (!is) throw InputError("model file: malformed header");
    m.U = read_matrix(is, "U");
    const Matrix d = read_matrix(is, "D");
    m.V = read_matrix(is, "V");
    if (d.cols() != 1 && d.rows() != 0) throw InputError("model file: D must be a column");
    m.D = d.rows() ? Vector(d.col(0)) : Vector(0);
    if (static_cast<std::size_t>(m.D.size()) != rank || m.U.cols() != m.D.size() || m.V.cols() != m.D.size())
        throw InputError("model file: inconsistent rank");
    return m;
}

}  // namespace quotus::complete
