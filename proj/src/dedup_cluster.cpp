#include "quotus/dedup_cluster.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "quotus/jsonl.hpp"

namespace quotus {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

}  // namespace

namespace dedup {

void DedupParams::validate() const {
    if (!(max_norm_distance >= 0.0 && max_norm_distance <= 1.0))
        throw InputError("max_norm_distance must lie in [0, 1]");
    if (window < 0) throw InputError("dedup window must be non-negative");
}

std::u32string to_u32(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : 4;
        if (i + len > s.size()) len = s.size() - i;
        char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
        for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::size_t bounded_levenshtein(std::u32string_view a, std::u32string_view b, std::size_t max_distance) {
    if (a.size() < b.size()) std::swap(a, b);
    const std::size_t n = a.size(), m = b.size();
    if (n - m > max_distance) return max_distance + 1;
    const std::size_t k = max_distance;
    const std::size_t inf = max_distance + 1;

    // Diagonal band |i - j| <= k; cells outside the band are treated as inf.
    std::vector<std::size_t> prev(m + 1, inf), cur(m + 1, inf);
    for (std::size_t j = 0; j <= std::min(m, k); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t lo = i > k ? i - k : 0;
        const std::size_t hi = std::min(m, i + k);
        std::fill(cur.begin(), cur.end(), inf);
        std::size_t row_min = inf;
        if (lo == 0) {
            cur[0] = i <= k ? i : inf;
            row_min = cur[0];
        }
        for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
            std::size_t v = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            v = std::min(v, prev[j] + 1);
            v = std::min(v, cur[j - 1] + 1);
            cur[j] = std::min(v, inf);
            row_min = std::min(row_min, cur[j]);
        }
        if (row_min > k) return inf;
        std::swap(prev, cur);
    }
    return std::min(prev[m], inf);
}

double normalized_levenshtein(std::u32string_view a, std::u32string_view b) {
    const auto longest = std::max(a.size(), b.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

DedupResult dedup_articles(std::span<const corpus::Article> articles, const DedupParams& p) {
    p.validate();
    const auto n = articles.size();
    std::vector<std::u32string> bodies;
    bodies.reserve(n);
    for (const auto& a : articles) bodies.push_back(to_u32(a.body));

    std::vector<std::size_t> by_time(n);
    std::iota(by_time.begin(), by_time.end(), 0);
    std::sort(by_time.begin(), by_time.end(), [&](std::size_t x, std::size_t y) {
        return std::tie(articles[x].timestamp, articles[x].id) < std::tie(articles[y].timestamp, articles[y].id);
    });

    // A length ratio below 1 - max_norm_distance already forces the
    // normalized distance above the threshold.
    const double min_ratio = 1.0 - p.max_norm_distance;
    UnionFind uf(n);
    for (std::size_t xi = 0; xi < n; ++xi) {
        const auto x = by_time[xi];
        for (std::size_t yi = xi + 1; yi < n; ++yi) {
            const auto y = by_time[yi];
            if (articles[y].timestamp - articles[x].timestamp > p.window) break;
            const auto lx = bodies[x].size(), ly = bodies[y].size();
            const auto longest = std::max(lx, ly);
            if (longest == 0) {
                uf.unite(x, y);
                continue;
            }
            if (static_cast<double>(std::min(lx, ly)) < min_ratio * static_cast<double>(longest)) continue;
            const auto budget = static_cast<std::size_t>(p.max_norm_distance * static_cast<double>(longest));
            const auto d = bounded_levenshtein(bodies[x], bodies[y], budget);
            if (d <= budget && static_cast<double>(d) / static_cast<double>(longest) <= p.max_norm_distance)
                uf.unite(x, y);
        }
    }

    // by_time is ordered by (timestamp, id), so the first member seen per
    // root is the survivor.
    std::map<std::size_t, std::size_t> survivor;
    for (auto x : by_time) survivor.try_emplace(uf.find(x), x);

    DedupResult out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto keep = survivor.at(uf.find(i));
        if (keep == i)
            out.kept.push_back(articles[i]);
        else
            out.dropped.push_back({articles[i].id, articles[keep].id});
    }
    return out;
}

void save_dropped(const std::filesystem::path& path, std::span<const DroppedArticle> dropped) {
    jsonl::Writer w(path);
    for (const auto& d : dropped) w.write({{"dropped_id", d.dropped_id}, {"kept_id", d.kept_id}});
    w.close();
}

std::vector<DroppedArticle> load_dropped(const std::filesystem::path& path) {
    std::vector<DroppedArticle> out;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        out.push_back({jsonl::require_string(rec, "dropped_id", line), jsonl::require_string(rec, "kept_id", line)});
    });
    return out;
}

}  // namespace dedup

namespace cluster {

std::string cluster_id(std::string_view transcript_id, const TokenSpan& span) {
    return std::string(transcript_id) + ":" + std::to_string(span.begin) + "-" + std::to_string(span.end);
}

std::vector<QuoteCluster> cluster_matches(std::span<const align::QuoteMatch> matches, int min_overlap) {
    // Sort by (transcript, begin) so overlap candidates are contiguous; the
    // components do not depend on this order.
    std::vector<std::size_t> order(matches.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = matches[a];
        const auto& y = matches[b];
        return std::tie(x.transcript_id, x.span, x.occurrence_id) < std::tie(y.transcript_id, y.span, y.occurrence_id);
    });

    UnionFind uf(matches.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& a = matches[order[i]];
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const auto& b = matches[order[j]];
            if (b.transcript_id != a.transcript_id || b.span.begin >= a.span.end) break;
            if (overlap(a.span, b.span) >= min_overlap) uf.unite(order[i], order[j]);
        }
    }

    std::map<std::size_t, QuoteCluster> groups;
    for (auto idx : order) {
        const auto& m = matches[idx];
        auto [it, fresh] = groups.try_emplace(uf.find(idx));
        auto& c = it->second;
        if (fresh) {
            c.transcript_id = m.transcript_id;
            c.span = m.span;
        } else {
            c.span.begin = std::min(c.span.begin, m.span.begin);
            c.span.end = std::max(c.span.end, m.span.end);
        }
        c.members.push_back(m.occurrence_id);
    }

    std::vector<QuoteCluster> out;
    out.reserve(groups.size());
    for (auto& [root, c] : groups) {
        std::sort(c.members.begin(), c.members.end());
        c.id = cluster_id(c.transcript_id, c.span);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const QuoteCluster& a, const QuoteCluster& b) {
        return std::tie(a.transcript_id, a.span) < std::tie(b.transcript_id, b.span);
    });
    return out;
}

std::vector<Edge> earliest_edges(std::span<const QuoteCluster> clusters, std::span<const align::QuoteMatch> matches,
                                 std::span<const corpus::Article> articles) {
    std::map<std::string, const QuoteCluster*> cluster_of;
    for (const auto& c : clusters)
        for (const auto& m : c.members) cluster_of.emplace(m, &c);
    std::map<std::string, Timestamp> article_time;
    for (const auto& a : articles) article_time.emplace(a.id, a.timestamp);

    std::map<std::pair<std::string, std::string>, Timestamp> first;
    for (const auto& m : matches) {
        auto at = article_time.find(m.article_id);
        auto ct = cluster_of.find(m.occurrence_id);
        if (at == article_time.end() || ct == cluster_of.end()) continue;
        auto [it, fresh] = first.try_emplace({m.outlet_id, ct->second->id}, at->second);
        if (!fresh) it->second = std::min(it->second, at->second);
    }

    std::vector<Edge> out;
    out.reserve(first.size());
    for (const auto& [key, ts] : first) out.push_back({key.first, key.second, ts});
    return out;
}

void save_clusters(const std::filesystem::path& path, std::span<const QuoteCluster> clusters) {
    jsonl::Writer w(path);
    for (const auto& c : clusters)
        w.write({{"cluster_id", c.id},
                 {"transcript_id", c.transcript_id},
                 {"span_start", c.span.begin},
                 {"span_end", c.span.end},
                 {"member_occurrence_ids", c.members}});
    w.close();
}

std::vector<QuoteCluster> load_clusters(const std::filesystem::path& path) {
    std::vector<QuoteCluster> out;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        QuoteCluster c;
        c.id = jsonl::require_string(rec, "cluster_id", line);
        c.transcript_id = jsonl::require_string(rec, "transcript_id", line);
        c.span = {jsonl::require_integer(rec, "span_start", line), jsonl::require_integer(rec, "span_end", line)};
        for (const auto& m : jsonl::require_array(rec, "member_occurrence_ids", line)) {
            if (!m.is_string()) throw InputError("member ids must be strings at line " + std::to_string(line));
            c.members.push_back(m.get<std::string>());
        }
        out.push_back(std::move(c));
    });
    return out;
}

void save_edges(const std::filesystem::path& path, std::span<const Edge> edges) {
    jsonl::Writer w(path);
    for (const auto& e : edges)
        w.write({{"outlet_id", e.outlet_id}, {"cluster_id", e.cluster_id}, {"timestamp", format_iso8601(e.timestamp)}});
    w.close();
}

std::vector<Edge> load_edges(const std::filesystem::path& path) {
    std::vector<Edge> out;
    jsonl::for_each_record(path, [&](const jsonl::Json& rec, std::size_t line) {
        Edge e;
        e.outlet_id = jsonl::require_string(rec, "outlet_id", line);
        e.cluster_id = jsonl::require_string(rec, "cluster_id", line);
        const auto ts = jsonl::require_string(rec, "timestamp", line);
        try {
            e.timestamp = parse_iso8601(ts);
        } catch (const InputError& err) {
            throw InputError(std::string(err.what()) + " at line " + std::to_string(line));
        }
        out.push_back(std::move(e));
    });
    return out;
}

}  // namespace cluster

}  // namespace quotus
