#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quotus/complete.hpp"
#include "quotus/corpus.hpp"
#include "quotus/dedup_cluster.hpp"

namespace quotus::latent {

using complete::Matrix;
using complete::Vector;

/// X ~ U diag(S) V^T. Rows of U embed outlets, rows of V embed clusters.
/// Each column of V has its largest-magnitude entry positive.
struct LatentSpace {
    Matrix U;
    Vector S;
    Matrix V;

    std::size_t rank() const { return static_cast<std::size_t>(S.size()); }
};

/// Top-r SVD of the zero-filled normalized matrix. Components beyond the
/// numerical rank are dropped with a warning.
LatentSpace decompose(const complete::QuoteMatrix& m, std::size_t r, Diagnostics* diag = nullptr);
/// Top-r SVD of an arbitrary dense matrix.
LatentSpace decompose(const Matrix& x, std::size_t r, Diagnostics* diag = nullptr);
/// Leading r components of a completed model.
LatentSpace from_model(const complete::CompletionModel& model, std::size_t r, Diagnostics* diag = nullptr);

/// Flips column pairs of U and V so every column of V has its
/// largest-magnitude entry positive (first such entry on ties).
void apply_sign_convention(LatentSpace& ls);

/// Features x clusters, each nonzero row rescaled to sum to 1.
struct FeatureMatrix {
    std::string name;
    std::vector<std::string> labels;
    Matrix F;
};

FeatureMatrix make_feature_matrix(std::string name, std::vector<std::string> labels, Matrix raw);

struct FeatureRecord {
    std::string cluster_id;
    std::string feature_name;
    double value = 0.0;
};

std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path);
void save_feature_records(const std::filesystem::path& path, std::span<const FeatureRecord> records);

/// Unscaled features x clusters matrix; records for clusters not in
/// `cluster_ids` are ignored and missing cells are 0. With
/// `dominant_margin`, each cluster keeps a single 1 for the feature whose
/// value exceeds the runner-up by at least the margin (none otherwise).
Matrix feature_values(std::span<const FeatureRecord> records, std::span<const std::string> cluster_ids,
                      std::vector<std::string>& labels, std::optional<double> dominant_margin = std::nullopt);

/// True when a token is "not" or ends in "n't".
bool is_negation(std::string_view token);

/// 1 x clusters indicator of lexical negation inside each cluster's span,
/// unscaled. Clusters whose transcript is missing get 0.
Vector negation_indicator(std::span<const cluster::QuoteCluster> clusters,
                          std::span<const corpus::Transcript> transcripts);

/// L = F V S^-1, so that L S V^T is F projected onto the row space of V^T.
/// Throws InputError("rank-deficient projection") on a zero singular value.
Matrix project_features(const FeatureMatrix& f, const LatentSpace& ls);

struct Correlation {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Average ranks (ties share the mean of their positions), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with a two-sided p-value from the t
/// approximation. Throws InputError("undefined correlation") on constant
/// input and when fewer than 3 pairs are given.
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Correlates per-cluster values with the clusters' coordinates (V S) on a
/// latent dimension.
Correlation correlate(std::span<const double> feature, std::size_t dimension, const LatentSpace& ls);

struct RankedOutlet {
    std::string outlet_id;
    double score = 0.0;
};

/// Outlets sorted by U(:, dimension) * S(dimension), highest first (ties by id).
std::vector<RankedOutlet> rank_outlets(const LatentSpace& ls, std::size_t dimension,
                                       std::span<const std::string> outlet_ids);

struct RankingExtract {
    std::vector<RankedOutlet> top;
    std::vector<RankedOutlet> middle;
    std::vector<RankedOutlet> bottom;
};

/// Top-k, the k closest to zero (ordered by score), and bottom-k (lowest last).
RankingExtract extract_ranking(std::span<const RankedOutlet> ranked, std::size_t k);

}  // namespace quotus::latent
