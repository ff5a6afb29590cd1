#include "quotus/describe.hpp"

#include <algorithm>
#include <cmath>

#include "quotus/jsonl.hpp"

namespace quotus::describe {

double mention_fraction(std::span<const corpus::Article> articles, std::string_view keyword) {
    if (articles.empty()) throw InputError("mention fraction of an outlet without articles");
    const auto hits = std::count_if(articles.begin(), articles.end(),
                                    [&](const corpus::Article& a) { return corpus::mentions(a, keyword); });
    return static_cast<double>(hits) / static_cast<double>(articles.size());
}

std::map<std::string, double> reaction_ranks(std::span<const cluster::Edge> edges, std::size_t min_citers,
                                             const std::set<std::string>& subset) {
    std::map<std::string, std::vector<const cluster::Edge*>> by_cluster;
    for (const auto& e : edges)
        if (subset.empty() || subset.count(e.outlet_id)) by_cluster[e.cluster_id].push_back(&e);

    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (auto& [cid, citers] : by_cluster) {
        const auto n = citers.size();
        if (n < std::max<std::size_t>(min_citers, 2)) continue;
        std::sort(citers.begin(), citers.end(), [](const cluster::Edge* a, const cluster::Edge* b) {
            return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->outlet_id < b->outlet_id;
        });
        const double denom = static_cast<double>(n - 1);
        for (std::size_t k = 0; k < n;) {
            std::size_t end = k;
            while (end < n && citers[end]->timestamp == citers[k]->timestamp) ++end;
            const double rank = 0.5 * static_cast<double>(k + end - 1) / denom;
            for (std::size_t q = k; q < end; ++q) {
                auto& s = sums[citers[q]->outlet_id];
                s.first += rank;
                ++s.second;
            }
            k = end;
        }
    }
    std::map<std::string, double> out;
    for (const auto& [id, s] : sums) out.emplace(id, s.first / static_cast<double>(s.second));
    return out;
}

double quoted_fraction(std::int64_t article_tokens, std::span<const TokenSpan> quote_spans) {
    if (article_tokens <= 0) return 0.0;
    std::vector<TokenSpan> spans(quote_spans.begin(), quote_spans.end());
    std::sort(spans.begin(), spans.end());
    std::int64_t covered = 0, reach = 0;
    for (const auto& s : spans) {
        const auto lo = std::max({s.begin, reach, std::int64_t{0}});
        const auto hi = std::min(s.end, article_tokens);
        if (hi > lo) covered += hi - lo;
        reach = std::max(reach, s.end);
    }
    return static_cast<double>(covered) / static_cast<double>(article_tokens);
}

std::vector<OutletStats> outlet_stats(const StatsInput& in, const corpus::Tokenizer& tok,
                                      const align::AlignmentParams& align, const DescribeParams& p,
                                      Diagnostics* diag) {
    std::map<std::string, std::vector<corpus::Article>> all_of;
    for (const auto& a : in.all_articles) all_of[a.outlet_id].push_back(a);

    std::map<std::string, std::vector<const align::QuoteMatch*>> matches_of;
    for (const auto& m : in.matches) matches_of[m.article_id].push_back(&m);

    std::map<std::string, std::pair<double, std::size_t>> quoted;
    for (const auto& a : in.analyzed_articles) {
        auto it = matches_of.find(a.id);
        if (it == matches_of.end()) continue;
        std::set<std::string> matched;
        for (const auto* m : it->second) matched.insert(m->occurrence_id);
        std::vector<TokenSpan> spans;
        for (const auto& q : align::extract_quotes(a, tok, align))
            if (matched.count(q.id)) spans.push_back(q.article_span);
        const auto words = static_cast<std::int64_t>(tok.tokenize(a.body).size());
        auto& s = quoted[a.outlet_id];
        s.first += quoted_fraction(words, spans);
        ++s.second;
    }

    std::set<std::string> labeled;
    for (const auto& o : in.outlets)
        if (o.label != corpus::OutletLabel::Unlabeled) labeled.insert(o.id);
    const auto reaction = reaction_ranks(in.edges, p.min_citers, labeled);

    std::vector<OutletStats> out;
    for (const auto& o : in.outlets) {
        auto it = all_of.find(o.id);
        if (it == all_of.end()) {
            warn(diag, "outlet " + o.id + " has no articles; skipped in statistics");
            continue;
        }
        OutletStats s;
        s.outlet_id = o.id;
        s.label = o.label;
        s.articles = it->second.size();
        s.mention_fraction = mention_fraction(it->second, p.keyword);
        double words = 0.0;
        for (const auto& a : it->second) words += static_cast<double>(tok.tokenize(a.body).size());
        s.mean_article_words = words / static_cast<double>(s.articles);
        if (auto q = quoted.find(o.id); q != quoted.end())
            s.mean_quoted_fraction = q->second.first / static_cast<double>(q->second.second);
        if (auto r = reaction.find(o.id); r != reaction.end()) s.reaction_rank_mean = r->second;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const OutletStats& a, const OutletStats& b) { return a.outlet_id < b.outlet_id; });
    return out;
}

namespace {

CategoryAggregate summarize(std::string category, std::string statistic, const std::vector<double>& xs) {
    CategoryAggregate agg{std::move(category), std::move(statistic), 0.0, 0.0, xs.size()};
    if (xs.empty()) return agg;
    for (double x : xs) agg.mean += x;
    agg.mean /= static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - agg.mean) * (x - agg.mean);
        const auto n = static_cast<double>(xs.size());
        agg.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return agg;
}

}  // namespace

std::vector<CategoryAggregate> aggregate(std::span<const OutletStats> stats) {
    using corpus::OutletLabel;
    std::vector<CategoryAggregate> out;
    for (auto label : {OutletLabel::DeclaredConservative, OutletLabel::SuspectedConservative,
                       OutletLabel::SuspectedLiberal, OutletLabel::DeclaredLiberal}) {
        std::vector<double> mention, words, quoted, reaction;
        for (const auto& s : stats) {
            if (s.label != label) continue;
            mention.push_back(s.mention_fraction);
            words.push_back(s.mean_article_words);
            if (s.mean_quoted_fraction) quoted.push_back(*s.mean_quoted_fraction);
            if (s.reaction_rank_mean) reaction.push_back(*s.reaction_rank_mean);
        }
        const std::string name(corpus::to_string(label));
        out.push_back(summarize(name, "mention_fraction", mention));
        out.push_back(summarize(name, "mean_article_words", words));
        out.push_back(summarize(name, "mean_quoted_fraction", quoted));
        out.push_back(summarize(name, "reaction_rank_mean", reaction));
    }
    return out;
}

void save_stats(const std::filesystem::path& path, std::span<const OutletStats> stats,
                std::span<const CategoryAggregate> aggregates) {
    jsonl::Writer w(path);
    for (const auto& s : stats) {
        jsonl::OrderedJson rec{{"kind", "outlet"},
                               {"outlet_id", s.outlet_id},
                               {"label", corpus::to_string(s.label)},
                               {"articles", s.articles},
                               {"mention_fraction", s.mention_fraction},
                               {"mean_article_words", s.mean_article_words}};
        rec["mean_quoted_fraction"] = s.mean_quoted_fraction ? jsonl::OrderedJson(*s.mean_quoted_fraction) : nullptr;
        rec["reaction_rank_mean"] = s.reaction_rank_mean ? jsonl::OrderedJson(*s.reaction_rank_mean) : nullptr;
        w.write(rec);
    }
    for (const auto& a : aggregates)
        w.write({{"kind", "category"},
                 {"category", a.category},
                 {"statistic", a.statistic},
                 {"mean", a.mean},
                 {"stderr", a.std_error},
                 {"n", a.n}});
    w.close();
}

}  // namespace quotus::describe
