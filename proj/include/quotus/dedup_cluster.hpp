#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quotus/align.hpp"
#include "quotus/corpus.hpp"

namespace quotus::dedup {

struct DedupParams {
    double max_norm_distance = 0.2;
    /// Only articles published within this window of each other are compared.
    Timestamp window = 14 * kSecondsPerDay;

    void validate() const;
};

struct DroppedArticle {
    std::string dropped_id;
    std::string kept_id;

    bool operator==(const DroppedArticle&) const = default;
};

struct DedupResult {
    std::vector<corpus::Article> kept;
    std::vector<DroppedArticle> dropped;
};

/// Levenshtein distance over Unicode code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Levenshtein distance if it is <= max_distance, otherwise max_distance + 1.
/// Runs in O(min(|a|,|b|) * max_distance).
std::size_t bounded_levenshtein(std::u32string_view a, std::u32string_view b, std::size_t max_distance);

/// Distance divided by the longer length; 0 for two empty strings.
double normalized_levenshtein(std::u32string_view a, std::u32string_view b);

std::u32string to_u32(std::string_view utf8);

/// Groups near-duplicate bodies transitively and keeps the earliest article
/// of each group (ties: smallest id). Output order follows the input order.
DedupResult dedup_articles(std::span<const corpus::Article> articles, const DedupParams& p);

void save_dropped(const std::filesystem::path& path, std::span<const DroppedArticle> dropped);
std::vector<DroppedArticle> load_dropped(const std::filesystem::path& path);

}  // namespace quotus::dedup

namespace quotus::cluster {

struct QuoteCluster {
    std::string id;
    std::string transcript_id;
    TokenSpan span;
    /// Member occurrence ids, sorted.
    std::vector<std::string> members;

    bool operator==(const QuoteCluster&) const = default;
};

struct Edge {
    std::string outlet_id;
    std::string cluster_id;
    Timestamp timestamp = 0;

    bool operator==(const Edge&) const = default;
};

/// "<transcript_id>:<begin>-<end>".
std::string cluster_id(std::string_view transcript_id, const TokenSpan& span);

/// Connected components of the "shares >= min_overlap token positions"
/// relation within each transcript. Sorted by (transcript_id, span).
std::vector<QuoteCluster> cluster_matches(std::span<const align::QuoteMatch> matches, int min_overlap = 5);

/// One edge per (outlet, cluster) carrying the earliest citing article's
/// timestamp. Matches whose article is not in `articles` are ignored.
/// Sorted by (outlet_id, cluster_id).
std::vector<Edge> earliest_edges(std::span<const QuoteCluster> clusters, std::span<const align::QuoteMatch> matches,
                                 std::span<const corpus::Article> articles);

void save_clusters(const std::filesystem::path& path, std::span<const QuoteCluster> clusters);
std::vector<QuoteCluster> load_clusters(const std::filesystem::path& path);
void save_edges(const std::filesystem::path& path, std::span<const Edge> edges);
std::vector<Edge> load_edges(const std::filesystem::path& path);

}  // namespace quotus::cluster
