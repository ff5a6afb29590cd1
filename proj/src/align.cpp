#include "quotus/align.hpp"

#include <algorithm>
#include <limits>

#include "quotus/jsonl.hpp"

namespace quotus::align {

void AlignmentParams::validate() const {
    if (min_quote_words < 1) throw InputError("min_quote_words must be >= 1");
    if (max_lag <= 0) throw InputError("max_lag must be positive");
    if (sim_threshold > 0) throw InputError("sim_threshold must be <= 0");
    if (gap_penalty > 0 || mismatch_penalty > 0) throw InputError("penalties must be <= 0");
    if (match_score < 0) throw InputError("match_score must be >= 0");
}

namespace {

struct QuoteMark {
    std::size_t offset;
    std::size_t length;
    bool can_open;
    bool can_close;
};

// Straight quotes toggle; typographic ones have a fixed direction.
std::vector<QuoteMark> find_quote_marks(std::string_view body) {
    std::vector<QuoteMark> marks;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"') {
            marks.push_back({i, 1, true, true});
        } else if (body.compare(i, 3, "\xE2\x80\x9C") == 0 || body.compare(i, 3, "\xE2\x80\x9E") == 0) {
            marks.push_back({i, 3, true, false});
            i += 2;
        } else if (body.compare(i, 3, "\xE2\x80\x9D") == 0) {
            marks.push_back({i, 3, false, true});
            i += 2;
        }
    }
    return marks;
}

struct Cell {
    double score;
    std::int64_t start;
};

inline bool better(const Cell& a, const Cell& b) {
    return a.score > b.score || (a.score == b.score && a.start < b.start);
}

}  // namespace

std::vector<QuoteOccurrence> extract_quotes(const corpus::Article& article, const corpus::Tokenizer& tok,
                                            const AlignmentParams& p, Diagnostics* diag) {
    std::vector<QuoteOccurrence> out;
    const std::string_view body = article.body;
    const auto marks = find_quote_marks(body);

    std::size_t cursor = 0;
    std::int64_t tokens_before = 0;
    std::optional<QuoteMark> open;
    for (const auto& mark : marks) {
        if (!open) {
            if (!mark.can_open) continue;
            tokens_before += static_cast<std::int64_t>(tok.tokenize(body.substr(cursor, mark.offset - cursor)).size());
            open = mark;
            cursor = mark.offset + mark.length;
            continue;
        }
        if (!mark.can_close) continue;
        const auto text = body.substr(cursor, mark.offset - cursor);
        auto words = tok.tokenize(text);
        const auto count = static_cast<std::int64_t>(words.size());
        if (count >= p.min_quote_words) {
            QuoteOccurrence q;
            q.id = article.id + "#q" + std::to_string(out.size());
            q.article_id = article.id;
            q.outlet_id = article.outlet_id;
            q.article_timestamp = article.timestamp;
            q.text = std::string(text);
            q.tokens = std::move(words);
            q.article_span = {tokens_before, tokens_before + count};
            out.push_back(std::move(q));
        }
        tokens_before += count;
        cursor = mark.offset + mark.length;
        open.reset();
    }
    if (open)
        warn(diag, "article " + article.id + ": unbalanced quote at byte " + std::to_string(open->offset) +
                       ", tail ignored");
    return out;
}

std::optional<Alignment> substring_align(std::span<const std::string> quote, std::span<const std::string> text,
                                         const AlignmentParams& p, std::int64_t offset) {
    const auto m = quote.size();
    const auto n = text.size();
    if (m == 0 || n == 0) return std::nullopt;

    // Rows follow the quote, columns the text; row 0 is free so the quote may
    // start anywhere. Each cell keeps the earliest start among optimal paths.
    std::vector<Cell> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = {0.0, static_cast<std::int64_t>(j)};
    for (std::size_t i = 1; i <= m; ++i) {
        cur[0] = {prev[0].score + p.gap_penalty, 0};
        const auto& qi = quote[i - 1];
        for (std::size_t j = 1; j <= n; ++j) {
            Cell best{prev[j - 1].score + (qi == text[j - 1] ? p.match_score : p.mismatch_penalty), prev[j - 1].start};
            const Cell up{prev[j].score + p.gap_penalty, prev[j].start};
            const Cell left{cur[j - 1].score + p.gap_penalty, cur[j - 1].start};
            if (better(up, best)) best = up;
            if (better(left, best)) best = left;
            cur[j] = best;
        }
        std::swap(prev, cur);
    }

    std::optional<Alignment> result;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= n; ++j) {
        const auto& c = prev[j];
        const auto end = static_cast<std::int64_t>(j);
        if (c.start >= end) continue;
        if (!result || c.score > best_score || (c.score == best_score && c.start < result->span.begin - offset)) {
            best_score = c.score;
            result = Alignment{{c.start + offset, end + offset}, 0.0};
        }
    }
    if (!result) return std::nullopt;
    result->score = best_score / static_cast<double>(m);
    if (result->score < p.sim_threshold) return std::nullopt;
    return result;
}

std::optional<Alignment> substring_align(std::span<const std::string> quote, const corpus::Transcript& tr,
                                         const AlignmentParams& p) {
    std::optional<Alignment> best;
    const std::span<const std::string> all(tr.tokens);
    for (const auto& run : tr.indexed_runs()) {
        auto a = substring_align(quote, all.subspan(run.begin, run.length()), p, run.begin);
        if (a && (!best || a->score > best->score)) best = a;
    }
    return best;
}

std::optional<QuoteMatch> match_occurrence(const QuoteOccurrence& q, std::span<const corpus::Transcript> transcripts,
                                           const AlignmentParams& p) {
    if (static_cast<std::int64_t>(q.tokens.size()) < p.min_quote_words) return std::nullopt;
    const auto earliest = q.article_timestamp - p.max_lag;
    auto hi = std::upper_bound(transcripts.begin(), transcripts.end(), q.article_timestamp,
                               [](Timestamp t, const corpus::Transcript& tr) { return t < tr.timestamp; });

    std::optional<QuoteMatch> best;
    for (auto it = hi; it != transcripts.begin();) {
        --it;
        if (it->timestamp < earliest) break;
        auto a = substring_align(q.tokens, *it, p);
        if (!a) continue;
        if (!best || a->score > best->score) {
            best = QuoteMatch{q.id, q.article_id, q.outlet_id, it->id, a->span, a->score, q.text};
        }
        if (!p.exhaustive) break;
    }
    return best;
}

std::vector<QuoteMatch> match_articles(std::span<const corpus::Article> articles,
                                       std::span<const corpus::Transcript> transcripts, const corpus::Tokenizer& tok,
                                       const AlignmentParams& p, Diagnostics* diag) {
    std::vector<QuoteMatch> out;
    for (const auto& a : articles) {
        for (const auto& q : extract_quotes(a, tok, p, diag)) {
            if (auto m = match_occurrence(q, transcripts, p)) out.push_back(std::move(*m));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const QuoteMatch& a, const QuoteMatch& b) { return a.occurrence_id < b.occurrence_id; });
    return out;
}

void save_matches(const std::filesystem::path& path, std::span<const QuoteMatch> matches) {
    jsonl::Writer w(path);
    for (const auto& m : matches)
        w.write({{"occurrence_id", m.occurrence_id},
                 {"article_id", m.article_id},
                 {"outlet_id", m.outlet_id},
                 {"transcript_id", m.transcript_id},
                 {"span_start", m.span.begin},
                 {"span_end", m.span.end},
                 {"score", m.score},
                 {"quote_text", m.quote_text}});
    w.close();
}

std::vector<QuoteMatch> load_matches(const std::filesystem::path& path) {
    std::vector<QuoteMatch> out;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        QuoteMatch m;
        m.occurrence_id = jsonl::require_string(rec, "occurrence_id", line);
        m.article_id = jsonl::require_string(rec, "article_id", line);
        m.outlet_id = jsonl::require_string(rec, "outlet_id", line);
        m.transcript_id = jsonl::require_string(rec, "transcript_id", line);
        m.span = {jsonl::require_integer(rec, "span_start", line), jsonl::require_integer(rec, "span_end", line)};
        m.score = jsonl::require_number(rec, "score", line);
        m.quote_text = jsonl::require_string(rec, "quote_text", line);
        out.push_back(std::move(m));
    });
    return out;
}

}  // namespace quotus::align
