#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quotus/common.hpp"

namespace quotus::corpus {

enum class OutletLabel { DeclaredConservative, SuspectedConservative, SuspectedLiberal, DeclaredLiberal, Unlabeled };

/// "dC", "sC", "sL", "dL", "unlabeled".
std::string_view to_string(OutletLabel label);
OutletLabel parse_label(std::string_view text);

struct Outlet {
    std::string id;
    std::string domain;
    OutletLabel label = OutletLabel::Unlabeled;

    bool operator==(const Outlet&) const = default;
};

struct Segment {
    std::string speaker;
    std::string text;
    /// Global token range occupied by this segment. Segments dropped by the
    /// speaker filter keep their range but their tokens are placeholders.
    TokenSpan tokens;
    bool indexed = true;

    bool operator==(const Segment&) const = default;
};

struct Transcript {
    std::string id;
    Timestamp timestamp = 0;
    std::vector<Segment> segments;
    /// One entry per global token index. Placeholder positions hold "".
    std::vector<std::string> tokens;

    /// Maximal runs of consecutive indexed segments, in order.
    std::vector<TokenSpan> indexed_runs() const;

    bool operator==(const Transcript&) const = default;
};

struct Article {
    std::string id;
    std::string outlet_id;
    Timestamp timestamp = 0;
    std::string title;
    std::string url;
    std::string body;

    bool operator==(const Article&) const = default;
};

struct Tokenizer {
    bool lowercase = true;
    bool strip_punctuation = true;

    /// Word characters are ASCII alphanumerics and any non-ASCII code point
    /// outside the Unicode punctuation ranges. An apostrophe (' or U+2019)
    /// between two word characters stays inside the word and is normalized
    /// to '. With strip_punctuation off, other punctuation characters become
    /// single-character tokens.
    std::vector<std::string> tokenize(std::string_view text) const;
};

/// Plain substring test on title and body. The empty keyword matches.
bool mentions(const Article& a, std::string_view keyword);

/// Throws InputError when `text` is not valid UTF-8.
void require_utf8(std::string_view text, std::string_view what);

std::vector<Outlet> load_outlets(const std::filesystem::path& path);

/// Sorted by timestamp (ties by id). Segments whose speaker differs from
/// `speaker_filter` become unindexed gaps.
std::vector<Transcript> load_transcripts(const std::filesystem::path& path,
                                         const std::optional<std::string>& speaker_filter,
                                         const Tokenizer& tok = {});

/// Sorted by timestamp (ties by id). When `keyword_filter` is set, articles
/// whose title and body both lack it are dropped. Every outlet_id must be a
/// key of `outlets`.
std::vector<Article> load_articles(const std::filesystem::path& path,
                                   const std::vector<Outlet>& outlets,
                                   const std::optional<std::string>& keyword_filter);

/// Tokenizes segments and assigns global indices.
void index_transcript(Transcript& tr, const std::optional<std::string>& speaker_filter,
                      const Tokenizer& tok);

void save_outlets(const std::filesystem::path& path, std::span<const Outlet> outlets);
void save_transcripts(const std::filesystem::path& path, std::span<const Transcript> transcripts);
void save_articles(const std::filesystem::path& path, std::span<const Article> articles);

/// Lookup from id to position.
template <typename Record>
std::map<std::string, std::size_t> index_by_id(std::span<const Record> records) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) out.emplace(records[i].id, i);
    return out;
}

}  // namespace quotus::corpus
