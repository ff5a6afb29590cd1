#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quotus/corpus.hpp"
#include "quotus/dedup_cluster.hpp"

namespace quotus::report {

/// Per-token citation counts over one transcript.
struct TokenVolumeTrack {
    std::string transcript_id;
    std::vector<std::uint32_t> overall;
    /// Keyed by category name; each has the same length as `overall`.
    std::map<std::string, std::vector<std::uint32_t>> by_category;
};

/// Counts, for every token of a transcript with `num_tokens` tokens, the
/// edges whose cluster span covers it. Clusters of other transcripts are
/// ignored. An edge counts toward a category when its outlet maps to one in
/// `category_of`.
TokenVolumeTrack token_volume(const std::string& transcript_id, std::size_t num_tokens,
                              std::span<const cluster::QuoteCluster> clusters, std::span<const cluster::Edge> edges,
                              const std::map<std::string, std::string>& category_of);

/// Outlet id to label name for labeled outlets.
std::map<std::string, std::string> label_categories(std::span<const corpus::Outlet> outlets);

struct Point {
    std::string id;
    std::string group;
    double x = 0.0;
    double y = 0.0;
};

struct ClusterVariants {
    std::string cluster_id;
    std::string transcript_text;
    std::size_t citing_outlets = 0;
    /// Distinct quote texts with their occurrence counts, most frequent first.
    std::vector<std::pair<std::string, std::size_t>> variants;
};

/// A titled table of preformatted cells.
struct Table {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ReportContent {
    std::string title;
    std::vector<TokenVolumeTrack> tracks;
    std::vector<ClusterVariants> clusters;
    std::vector<Point> outlet_scatter;
    std::vector<Table> tables;
};

/// A single HTML document with inline CSS and SVG and no external
/// references. Output depends only on `content`.
std::string render_html(const ReportContent& content);

std::string escape_html(std::string_view text);

/// Fixed-precision formatting used in tables.
std::string format_number(double value, int digits = 3);

}  // namespace quotus::report
