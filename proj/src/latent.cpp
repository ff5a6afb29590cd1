#include "quotus/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/SVD>
#include <boost/math/distributions/students_t.hpp>

#include "quotus/jsonl.hpp"

namespace quotus::latent {

namespace {

LatentSpace truncate(const Matrix& u, const Vector& s, const Matrix& v, std::size_t r, Diagnostics* diag) {
    auto keep = static_cast<Eigen::Index>(std::min<std::size_t>(r, static_cast<std::size_t>(s.size())));
    const double smax = s.size() ? s(0) : 0.0;
    const double cutoff =
        smax * static_cast<double>(std::max(u.rows(), v.rows())) * std::numeric_limits<double>::epsilon();
    Eigen::Index numerical = 0;
    while (numerical < keep && s(numerical) > cutoff) ++numerical;
    if (numerical < static_cast<Eigen::Index>(r))
        warn(diag, "requested rank " + std::to_string(r) + " exceeds numerical rank; keeping " +
                       std::to_string(numerical) + " components");
    keep = numerical;
    LatentSpace ls{u.leftCols(keep), s.head(keep), v.leftCols(keep)};
    apply_sign_convention(ls);
    return ls;
}

}  // namespace

LatentSpace decompose(const Matrix& x, std::size_t r, Diagnostics* diag) {
    if (r > static_cast<std::size_t>(std::min(x.rows(), x.cols())))
        throw InputError("rank exceeds matrix dimensions");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return truncate(svd.matrixU(), svd.singularValues(), svd.matrixV(), r, diag);
}

LatentSpace decompose(const complete::QuoteMatrix& m, std::size_t r, Diagnostics* diag) {
    return decompose(m.dense_normalized(), r, diag);
}

LatentSpace from_model(const complete::CompletionModel& model, std::size_t r, Diagnostics* diag) {
    return truncate(model.U, model.D, model.V, r, diag);
}

void apply_sign_convention(LatentSpace& ls) {
    for (Eigen::Index k = 0; k < ls.V.cols(); ++k) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < ls.V.rows(); ++j) {
            if (std::abs(ls.V(j, k)) > best) {
                best = std::abs(ls.V(j, k));
                arg = j;
            }
        }
        if (ls.V.rows() && ls.V(arg, k) < 0) {
            ls.V.col(k) *= -1.0;
            ls.U.col(k) *= -1.0;
        }
    }
}

FeatureMatrix make_feature_matrix(std::string name, std::vector<std::string> labels, Matrix raw) {
    if (static_cast<Eigen::Index>(labels.size()) != raw.rows()) throw InputError("feature labels do not match rows");
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const double sum = raw.row(i).sum();
        if (sum != 0.0) raw.row(i) /= sum;
    }
    return {std::move(name), std::move(labels), std::move(raw)};
}

std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path) {
    std::vector<FeatureRecord> out;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        out.push_back({jsonl::require_string(rec, "cluster_id", line), jsonl::require_string(rec, "feature_name", line),
                       jsonl::require_number(rec, "value", line)});
    });
    return out;
}

void save_feature_records(const std::filesystem::path& path, std::span<const FeatureRecord> records) {
    jsonl::Writer w(path);
    for (const auto& r : records)
        w.write({{"cluster_id", r.cluster_id}, {"feature_name", r.feature_name}, {"value", r.value}});
    w.close();
}

Matrix feature_values(std::span<const FeatureRecord> records, std::span<const std::string> cluster_ids,
                      std::vector<std::string>& labels, std::optional<double> dominant_margin) {
    std::map<std::string, Eigen::Index> col_of;
    for (std::size_t j = 0; j < cluster_ids.size(); ++j) col_of.emplace(cluster_ids[j], static_cast<Eigen::Index>(j));
    std::map<std::string, Eigen::Index> row_of;
    for (const auto& r : records) row_of.emplace(r.feature_name, 0);
    labels.clear();
    for (auto& [name, idx] : row_of) {
        idx = static_cast<Eigen::Index>(labels.size());
        labels.push_back(name);
    }

    Matrix raw = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(cluster_ids.size()));
    for (const auto& r : records) {
        auto c = col_of.find(r.cluster_id);
        if (c == col_of.end()) continue;
        raw(row_of.at(r.feature_name), c->second) = r.value;
    }
    if (!dominant_margin) return raw;

    Matrix dominant = Matrix::Zero(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        Eigen::Index top = -1;
        double first = -std::numeric_limits<double>::infinity(), second = 0.0;
        for (Eigen::Index i = 0; i < raw.rows(); ++i) {
            const double v = raw(i, j);
            if (v > first) {
                second = top >= 0 ? first : second;
                first = v;
                top = i;
            } else if (v > second) {
                second = v;
            }
        }
        if (top >= 0 && first - second >= *dominant_margin) dominant(top, j) = 1.0;
    }
    return dominant;
}

bool is_negation(std::string_view token) {
    return token == "not" || (token.size() >= 3 && token.substr(token.size() - 3) == "n't");
}

Vector negation_indicator(std::span<const cluster::QuoteCluster> clusters,
                          std::span<const corpus::Transcript> transcripts) {
    std::map<std::string, const corpus::Transcript*> by_id;
    for (const auto& t : transcripts) by_id.emplace(t.id, &t);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(clusters.size()));
    for (std::size_t j = 0; j < clusters.size(); ++j) {
        auto it = by_id.find(clusters[j].transcript_id);
        if (it == by_id.end()) continue;
        const auto& tokens = it->second->tokens;
        const auto& span = clusters[j].span;
        for (auto k = std::max<std::int64_t>(span.begin, 0);
             k < std::min<std::int64_t>(span.end, static_cast<std::int64_t>(tokens.size())); ++k) {
            if (is_negation(tokens[k])) {
                out(static_cast<Eigen::Index>(j)) = 1.0;
                break;
            }
        }
    }
    return out;
}

Matrix project_features(const FeatureMatrix& f, const LatentSpace& ls) {
    if (f.F.cols() != ls.V.rows()) throw InputError("feature matrix columns do not match clusters");
    for (Eigen::Index k = 0; k < ls.S.size(); ++k)
        if (ls.S(k) == 0.0) throw InputError("rank-deficient projection");
    return f.F * ls.V * ls.S.cwiseInverse().asDiagonal();
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t end = k;
        while (end < order.size() && values[order[end]] == values[order[k]]) ++end;
        const double mean = 0.5 * static_cast<double>(k + 1 + end);
        for (std::size_t q = k; q < end; ++q) ranks[order[q]] = mean;
        k = end;
    }
    return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("correlation inputs differ in length");
    if (x.size() < 3) throw InputError("correlation needs at least 3 pairs");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const auto n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        const double dx = rx[k] - mean, dy = ry[k] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw InputError("undefined correlation");
    Correlation c;
    c.n = x.size();
    c.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = n - 2.0;
    if (std::abs(c.rho) >= 1.0) {
        c.p_value = 0.0;
    } else {
        const double t = c.rho * std::sqrt(df / (1.0 - c.rho * c.rho));
        boost::math::students_t dist(df);
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return c;
}

Correlation correlate(std::span<const double> feature, std::size_t dimension, const LatentSpace& ls) {
    if (dimension >= ls.rank()) throw InputError("latent dimension out of range");
    if (feature.size() != static_cast<std::size_t>(ls.V.rows())) throw InputError("feature length does not match clusters");
    const auto d = static_cast<Eigen::Index>(dimension);
    std::vector<double> coords(feature.size());
    for (std::size_t j = 0; j < coords.size(); ++j) coords[j] = ls.V(static_cast<Eigen::Index>(j), d) * ls.S(d);
    return spearman(feature, coords);
}

std::vector<RankedOutlet> rank_outlets(const LatentSpace& ls, std::size_t dimension,
                                       std::span<const std::string> outlet_ids) {
    if (dimension >= ls.rank()) throw InputError("latent dimension out of range");
    if (outlet_ids.size() != static_cast<std::size_t>(ls.U.rows())) throw InputError("outlet ids do not match rows");
    const auto d = static_cast<Eigen::Index>(dimension);
    std::vector<RankedOutlet> out;
    out.reserve(outlet_ids.size());
    for (std::size_t i = 0; i < outlet_ids.size(); ++i)
        out.push_back({outlet_ids[i], ls.U(static_cast<Eigen::Index>(i), d) * ls.S(d)});
    std::sort(out.begin(), out.end(), [](const RankedOutlet& a, const RankedOutlet& b) {
        return a.score != b.score ? a.score > b.score : a.outlet_id < b.outlet_id;
    });
    return out;
}

RankingExtract extract_ranking(std::span<const RankedOutlet> ranked, std::size_t k) {
    RankingExtract out;
    k = std::min(k, ranked.size());
    out.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    out.bottom.assign(ranked.end() - static_cast<std::ptrdiff_t>(k), ranked.end());

    std::vector<RankedOutlet> central(ranked.begin(), ranked.end());
    std::stable_sort(central.begin(), central.end(), [](const RankedOutlet& a, const RankedOutlet& b) {
        return std::abs(a.score) < std::abs(b.score);
    });
    central.resize(k);
    std::stable_sort(central.begin(), central.end(),
                     [](const RankedOutlet& a, const RankedOutlet& b) { return a.score > b.score; });
    out.middle = std::move(central);
    return out;
}

}  // namespace quotus::latent
