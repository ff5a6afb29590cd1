#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quotus/common.hpp"
#include "quotus/corpus.hpp"

namespace quotus::align {

struct AlignmentParams {
    int min_quote_words = 6;
    Timestamp max_lag = 7 * kSecondsPerDay;
    double sim_threshold = -0.4;
    double gap_penalty = -1.0;
    double mismatch_penalty = -1.0;
    double match_score = 0.0;
    /// Search every candidate transcript and keep the best score instead of
    /// accepting the newest one that clears the threshold.
    bool exhaustive = false;

    /// Throws InputError on out-of-range values.
    void validate() const;
};

struct QuoteOccurrence {
    std::string id;
    std::string article_id;
    std::string outlet_id;
    Timestamp article_timestamp = 0;
    std::string text;
    std::vector<std::string> tokens;
    /// Position of the quote inside the tokenized article body.
    TokenSpan article_span;
};

struct QuoteMatch {
    std::string occurrence_id;
    std::string article_id;
    std::string outlet_id;
    std::string transcript_id;
    TokenSpan span;
    double score = 0.0;
    std::string quote_text;

    bool operator==(const QuoteMatch&) const = default;
};

struct Alignment {
    TokenSpan span;
    double score = 0.0;

    bool operator==(const Alignment&) const = default;
};

/// Maximal double-quoted spans of the body (straight or typographic quotes),
/// in document order, keeping those with at least min_quote_words tokens.
/// An unmatched opening quote ends the scan with a warning.
std::vector<QuoteOccurrence> extract_quotes(const corpus::Article& article, const corpus::Tokenizer& tok,
                                            const AlignmentParams& p, Diagnostics* diag = nullptr);

/// Best local placement of the whole quote inside `text` (free leading and
/// trailing text). Scores are normalized by quote length; ties go to the
/// earliest start, then the shortest span. `offset` is added to the span.
/// Returns nothing when the best span is empty or scores below the threshold.
std::optional<Alignment> substring_align(std::span<const std::string> quote, std::span<const std::string> text,
                                         const AlignmentParams& p, std::int64_t offset = 0);

/// Aligns against every indexed run of the transcript and keeps the best.
std::optional<Alignment> substring_align(std::span<const std::string> quote, const corpus::Transcript& tr,
                                         const AlignmentParams& p);

/// Searches transcripts in [article time - max_lag, article time], newest
/// first. `transcripts` must be sorted by timestamp.
std::optional<QuoteMatch> match_occurrence(const QuoteOccurrence& q, std::span<const corpus::Transcript> transcripts,
                                           const AlignmentParams& p);

/// Extracts and matches quotes from every article. Output sorted by
/// occurrence id.
std::vector<QuoteMatch> match_articles(std::span<const corpus::Article> articles,
                                       std::span<const corpus::Transcript> transcripts, const corpus::Tokenizer& tok,
                                       const AlignmentParams& p, Diagnostics* diag = nullptr);

void save_matches(const std::filesystem::path& path, std::span<const QuoteMatch> matches);
std::vector<QuoteMatch> load_matches(const std::filesystem::path& path);

}  // namespace quotus::align
