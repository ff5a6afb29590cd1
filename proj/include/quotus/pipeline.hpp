#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quotus/align.hpp"
#include "quotus/bigraph.hpp"
#include "quotus/corpus.hpp"
#include "quotus/dedup_cluster.hpp"
#include "quotus/describe.hpp"

namespace quotus::pipeline {

enum class LatentSource { Auto, Model, Matrix };

struct PipelineConfig {
    std::filesystem::path transcripts;
    std::filesystem::path articles;
    std::filesystem::path outlets;
    std::filesystem::path workdir;
    std::uint64_t seed = 0;

    std::optional<std::string> speaker;
    std::optional<std::string> keyword;
    align::AlignmentParams alignment;
    dedup::DedupParams dedup;
    int min_overlap = 5;
    describe::DescribeParams describe;

    std::size_t ensemble_graphs = 200;
    /// 0 means 10 * |E|.
    std::size_t ensemble_swaps = 0;

    /// Exactly one of count and fraction applies; the fraction is of all
    /// matrix positions.
    std::optional<std::size_t> holdout_count;
    double holdout_fraction = 0.1;
    std::optional<std::uint64_t> holdout_seed;

    /// Explicit grid; when empty a log grid relative to sigma_max is used.
    std::vector<double> lambdas;
    std::size_t lambda_count = 10;
    double lambda_hi = 0.9;
    double lambda_lo = 0.05;
    std::size_t max_rank = 20;
    std::size_t max_iters = 500;
    double tol = 1e-9;

    std::size_t latent_rank = 3;
    LatentSource latent_source = LatentSource::Auto;
    std::size_t latent_top_k = 5;
    std::optional<std::filesystem::path> features;
    std::optional<double> dominant_margin;

    std::string report_title = "Quote citation report";
};

/// Parses JSON config text. Relative paths resolve against `base_dir`.
/// Unknown keys, wrong types and out-of-range values raise InputError.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

enum class Stage { Ingest, Match, Cluster, Graph, Describe, Surprise, Complete, Latent, Report };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

/// Runs one stage, reading prior artifacts from the workdir. A missing
/// artifact raises MissingStageError naming the stage that writes it.
void run_stage(Stage s, const PipelineConfig& cfg, Diagnostics& diag);

/// Artifact file names, relative to the workdir.
namespace artifact {
inline constexpr const char* outlets = "outlets.jsonl";
inline constexpr const char* transcripts = "transcripts.jsonl";
inline constexpr const char* articles_all = "articles_all.jsonl";
inline constexpr const char* articles = "articles.jsonl";
inline constexpr const char* matches = "matches.jsonl";
inline constexpr const char* dropped = "dropped.jsonl";
inline constexpr const char* clusters = "clusters.jsonl";
inline constexpr const char* edges = "edges.jsonl";
inline constexpr const char* graph = "graph.json";
inline constexpr const char* proportions = "proportions.jsonl";
inline constexpr const char* stats = "stats.jsonl";
inline constexpr const char* surprise = "surprise.jsonl";
inline constexpr const char* model = "model.txt";
inline constexpr const char* eval = "eval.json";
inline constexpr const char* embeddings = "embeddings.jsonl";
inline constexpr const char* rankings = "rankings.json";
inline constexpr const char* correlations = "correlations.jsonl";
inline constexpr const char* token_volume = "token_volume.json";
inline constexpr const char* cluster_variants = "cluster_variants.json";
inline constexpr const char* report = "report.html";
}  // namespace artifact

}  // namespace quotus::pipeline
