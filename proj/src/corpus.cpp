#include "quotus/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "quotus/jsonl.hpp"

namespace quotus {

Timestamp parse_iso8601(const std::string& text) {
    using namespace std::chrono;
    auto bad = [&] { return InputError("invalid ISO-8601 timestamp '" + text + "'"); };

    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    std::size_t pos = 0;
    auto digits = [&](int count, int& out) {
        if (pos + count > text.size()) throw bad();
        out = 0;
        for (int k = 0; k < count; ++k) {
            char c = text[pos++];
            if (c < '0' || c > '9') throw bad();
            out = out * 10 + (c - '0');
        }
    };
    auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c) throw bad();
        ++pos;
    };

    digits(4, y);
    expect('-');
    digits(2, mo);
    expect('-');
    digits(2, d);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw bad();

    long offset = 0;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != ' ') throw bad();
        ++pos;
        digits(2, h);
        expect(':');
        digits(2, mi);
        if (pos < text.size() && text[pos] == ':') {
            ++pos;
            digits(2, s);
            if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
                ++pos;
                const auto start = pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
                if (pos == start) throw bad();
            }
        }
        if (h > 23 || mi > 59 || s > 60) throw bad();
        if (pos < text.size()) {
            const char sign = text[pos];
            if (sign == 'Z') {
                ++pos;
            } else if (sign == '+' || sign == '-') {
                ++pos;
                int oh = 0, om = 0;
                digits(2, oh);
                if (pos < text.size() && text[pos] == ':') ++pos;
                digits(2, om);
                if (oh > 23 || om > 59) throw bad();
                offset = (oh * 3600L + om * 60L) * (sign == '+' ? 1 : -1);
            } else {
                throw bad();
            }
        }
        if (pos != text.size()) throw bad();
    }

    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * kSecondsPerDay + h * 3600L + mi * 60L + s - offset;
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    auto days = t / kSecondsPerDay;
    auto rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    return buf;
}

}  // namespace quotus

namespace quotus::corpus {

namespace {

struct CodePoint {
    char32_t value;
    std::size_t offset;
    std::size_t length;
};

// Returns false on malformed UTF-8.
bool decode_utf8(std::string_view text, std::vector<CodePoint>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            return false;
        }
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (b & 0x3F);
        }
        // Overlong encodings and surrogates.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        out.push_back({cp, i, len});
        i += len;
    }
    return true;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’'; }

bool is_word_char(char32_t c) {
    if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
    if (c <= 0xBF) return false;
    if (c == 0xD7 || c == 0xF7) return false;
    if (c >= 0x2000 && c <= 0x206F) return false;
    if (c >= 0x2E00 && c <= 0x2E7F) return false;
    if (c >= 0x3000 && c <= 0x303F) return false;
    if (c >= 0xFE30 && c <= 0xFE4F) return false;
    if (c >= 0xFF00 && c <= 0xFF0F) return false;
    return true;
}

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0xA0 ||
           (c >= 0x2000 && c <= 0x200B) || c == 0x3000;
}

OutletLabel label_at(const std::string& text, std::size_t line) {
    try {
        return parse_label(text);
    } catch (const InputError&) {
        throw InputError("invalid label '" + text + "' at line " + std::to_string(line));
    }
}

Timestamp timestamp_at(const jsonl::Json& rec, std::size_t line) {
    const auto text = jsonl::require_string(rec, "timestamp", line);
    try {
        return parse_iso8601(text);
    } catch (const InputError& e) {
        throw InputError(std::string(e.what()) + " at line " + std::to_string(line));
    }
}

}  // namespace

bool mentions(const Article& a, std::string_view keyword) {
    return a.body.find(keyword) != std::string::npos || a.title.find(keyword) != std::string::npos;
}

std::string_view to_string(OutletLabel label) {
    switch (label) {
        case OutletLabel::DeclaredConservative: return "dC";
        case OutletLabel::SuspectedConservative: return "sC";
        case OutletLabel::SuspectedLiberal: return "sL";
        case OutletLabel::DeclaredLiberal: return "dL";
        case OutletLabel::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

OutletLabel parse_label(std::string_view text) {
    if (text == "dC") return OutletLabel::DeclaredConservative;
    if (text == "sC") return OutletLabel::SuspectedConservative;
    if (text == "sL") return OutletLabel::SuspectedLiberal;
    if (text == "dL") return OutletLabel::DeclaredLiberal;
    if (text == "unlabeled") return OutletLabel::Unlabeled;
    throw InputError("invalid label '" + std::string(text) + "'");
}

std::vector<TokenSpan> Transcript::indexed_runs() const {
    std::vector<TokenSpan> runs;
    bool open = false;
    for (const auto& seg : segments) {
        if (!seg.indexed) {
            open = false;
            continue;
        }
        if (seg.tokens.length() == 0) continue;
        if (open)
            runs.back().end = seg.tokens.end;
        else
            runs.push_back(seg.tokens);
        open = true;
    }
    return runs;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
    std::vector<CodePoint> cps;
    if (!decode_utf8(text, cps)) throw InputError("invalid UTF-8 in tokenizer input");

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const auto& cp = cps[k];
        if (is_word_char(cp.value)) {
            if (cp.value < 0x80) {
                char c = static_cast<char>(cp.value);
                if (lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                current.push_back(c);
            } else {
                current.append(text.substr(cp.offset, cp.length));
            }
            continue;
        }
        if (is_apostrophe(cp.value) && !current.empty() && k + 1 < cps.size() && is_word_char(cps[k + 1].value)) {
            current.push_back('\'');
            continue;
        }
        flush();
        if (!strip_punctuation && !is_space(cp.value)) tokens.emplace_back(text.substr(cp.offset, cp.length));
    }
    flush();
    return tokens;
}

void require_utf8(std::string_view text, std::string_view what) {
    std::vector<CodePoint> cps;
    if (!decode_utf8(text, cps)) throw InputError("invalid UTF-8 in " + std::string(what));
}

std::vector<Outlet> load_outlets(const std::filesystem::path& path) {
    std::vector<Outlet> outlets;
    std::set<std::string> ids, domains;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        Outlet o;
        o.id = jsonl::require_string(rec, "id", line);
        o.domain = jsonl::require_string(rec, "domain", line);
        o.label = label_at(jsonl::require_string(rec, "label", line), line);
        if (o.domain.empty()) throw InputError("empty domain at line " + std::to_string(line));
        if (!ids.insert(o.id).second) throw InputError("duplicate outlet id '" + o.id + "' at line " + std::to_string(line));
        if (!domains.insert(o.domain).second)
            throw InputError("duplicate outlet domain '" + o.domain + "' at line " + std::to_string(line));
        outlets.push_back(std::move(o));
    });
    std::sort(outlets.begin(), outlets.end(), [](const Outlet& a, const Outlet& b) { return a.id < b.id; });
    return outlets;
}

void index_transcript(Transcript& tr, const std::optional<std::string>& speaker_filter, const Tokenizer& tok) {
    tr.tokens.clear();
    for (auto& seg : tr.segments) {
        auto words = tok.tokenize(seg.text);
        seg.indexed = !speaker_filter || seg.speaker == *speaker_filter;
        seg.tokens.begin = static_cast<std::int64_t>(tr.tokens.size());
        for (auto& w : words) tr.tokens.push_back(seg.indexed ? std::move(w) : std::string());
        seg.tokens.end = static_cast<std::int64_t>(tr.tokens.size());
    }
}

std::vector<Transcript> load_transcripts(const std::filesystem::path& path,
                                         const std::optional<std::string>& speaker_filter, const Tokenizer& tok) {
    std::vector<Transcript> out;
    std::set<std::string> ids;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        Transcript tr;
        tr.id = jsonl::require_string(rec, "id", line);
        tr.timestamp = timestamp_at(rec, line);
        for (const auto& s : jsonl::require_array(rec, "segments", line)) {
            if (!s.is_object()) throw InputError("malformed segment at line " + std::to_string(line));
            Segment seg;
            seg.speaker = jsonl::require_string(s, "speaker", line);
            seg.text = jsonl::require_string(s, "text", line);
            require_utf8(seg.text, "segment text at line " + std::to_string(line));
            tr.segments.push_back(std::move(seg));
        }
        if (!ids.insert(tr.id).second)
            throw InputError("duplicate transcript id '" + tr.id + "' at line " + std::to_string(line));
        index_transcript(tr, speaker_filter, tok);
        out.push_back(std::move(tr));
    });
    std::sort(out.begin(), out.end(), [](const Transcript& a, const Transcript& b) {
        return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
    });
    return out;
}

std::vector<Article> load_articles(const std::filesystem::path& path, const std::vector<Outlet>& outlets,
                                   const std::optional<std::string>& keyword_filter) {
    std::set<std::string> known;
    for (const auto& o : outlets) known.insert(o.id);

    std::vector<Article> out;
    std::set<std::string> ids, unknown;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        Article a;
        a.id = jsonl::require_string(rec, "id", line);
        a.outlet_id = jsonl::require_string(rec, "outlet_id", line);
        a.timestamp = timestamp_at(rec, line);
        a.title = jsonl::require_string(rec, "title", line);
        a.url = jsonl::require_string(rec, "url", line);
        a.body = jsonl::require_string(rec, "body", line);
        if (a.body.empty()) throw InputError("empty body at line " + std::to_string(line));
        require_utf8(a.body, "article body at line " + std::to_string(line));
        require_utf8(a.title, "article title at line " + std::to_string(line));
        if (!ids.insert(a.id).second)
            throw InputError("duplicate article id '" + a.id + "' at line " + std::to_string(line));
        if (!known.contains(a.outlet_id)) unknown.insert(a.outlet_id);
        if (keyword_filter && !mentions(a, *keyword_filter)) return;
        out.push_back(std::move(a));
    });
    if (!unknown.empty()) {
        std::string msg = "articles reference unknown outlets:";
        for (const auto& id : unknown) msg += " " + id;
        throw InputError(msg);
    }
    std::sort(out.begin(), out.end(), [](const Article& a, const Article& b) {
        return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
    });
    return out;
}

void save_outlets(const std::filesystem::path& path, std::span<const Outlet> outlets) {
    jsonl::Writer w(path);
    for (const auto& o : outlets)
        w.write({{"id", o.id}, {"domain", o.domain}, {"label", std::string(to_string(o.label))}});
    w.close();
}

void save_transcripts(const std::filesystem::path& path, std::span<const Transcript> transcripts) {
    jsonl::Writer w(path);
    for (const auto& tr : transcripts) {
        jsonl::OrderedJson segs = jsonl::OrderedJson::array();
        for (const auto& s : tr.segments) segs.push_back({{"speaker", s.speaker}, {"text", s.text}});
        w.write({{"id", tr.id}, {"timestamp", format_iso8601(tr.timestamp)}, {"segments", std::move(segs)}});
    }
    w.close();
}

void save_articles(const std::filesystem::path& path, std::span<const Article> articles) {
    jsonl::Writer w(path);
    for (const auto& a : articles)
        w.write({{"id", a.id},
                 {"outlet_id", a.outlet_id},
                 {"timestamp", format_iso8601(a.timestamp)},
                 {"title", a.title},
                 {"url", a.url},
                 {"body", a.body}});
    w.close();
}

}  // namespace quotus::corpus
