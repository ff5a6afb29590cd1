#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quotus/align.hpp"
#include "quotus/corpus.hpp"
#include "quotus/dedup_cluster.hpp"

namespace quotus::describe {

/// Share of articles whose title or body contains `keyword`. Throws
/// InputError when `articles` is empty.
double mention_fraction(std::span<const corpus::Article> articles, std::string_view keyword);

/// Mean normalized reaction rank per outlet. A cluster qualifies when at
/// least `min_citers` outlets of `subset` cite it (all outlets when `subset`
/// is empty); its citers sorted by time get ranks k/(n-1), tied timestamps
/// share the mean rank. Outlets in no qualifying cluster are absent.
std::map<std::string, double> reaction_ranks(std::span<const cluster::Edge> edges, std::size_t min_citers = 5,
                                             const std::set<std::string>& subset = {});

/// Article tokens covered by the union of the quote spans, divided by the
/// article length. 0 for an empty article.
double quoted_fraction(std::int64_t article_tokens, std::span<const TokenSpan> quote_spans);

struct OutletStats {
    std::string outlet_id;
    corpus::OutletLabel label = corpus::OutletLabel::Unlabeled;
    std::size_t articles = 0;
    double mention_fraction = 0.0;
    double mean_article_words = 0.0;
    /// Over the outlet's articles that carry at least one matched quote.
    std::optional<double> mean_quoted_fraction;
    std::optional<double> reaction_rank_mean;
};

struct CategoryAggregate {
    std::string category;
    std::string statistic;
    double mean = 0.0;
    /// Sample standard deviation over outlets divided by sqrt(n); 0 when n < 2.
    double std_error = 0.0;
    std::size_t n = 0;
};

struct DescribeParams {
    std::string keyword = "Obama";
    std::size_t min_citers = 5;
};

struct StatsInput {
    std::span<const corpus::Outlet> outlets;
    /// Every article before keyword filtering and deduplication.
    std::span<const corpus::Article> all_articles;
    /// Articles that went through matching.
    std::span<const corpus::Article> analyzed_articles;
    std::span<const align::QuoteMatch> matches;
    std::span<const cluster::Edge> edges;
};

/// One record per outlet with at least one article (others are skipped
/// with a warning), sorted by outlet id. Word counts use `tok`; quote spans
/// are recovered by re-extracting the quotes with `align`.
std::vector<OutletStats> outlet_stats(const StatsInput& in, const corpus::Tokenizer& tok,
                                      const align::AlignmentParams& align, const DescribeParams& p,
                                      Diagnostics* diag = nullptr);

/// Aggregates every statistic over the outlets of each labeled category.
std::vector<CategoryAggregate> aggregate(std::span<const OutletStats> stats);

void save_stats(const std::filesystem::path& path, std::span<const OutletStats> stats,
                std::span<const CategoryAggregate> aggregates);

}  // namespace quotus::describe
