#include "quotus/bigraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace quotus::bigraph {

namespace {

inline std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) { return (std::uint64_t{u} << 32) | v; }

// Per-cluster count of citers in each category; [v * k + c].
std::vector<std::uint32_t> citers_per_category(const BipartiteGraph& g, const CategoryAssignment& cats,
                                               std::size_t k) {
    std::vector<std::uint32_t> counts(g.num_clusters() * k, 0);
    for (const auto& [u, v] : g.edges()) {
        const int c = cats.category_of(u);
        if (c != CategoryAssignment::kNone) ++counts[v * k + static_cast<std::size_t>(c)];
    }
    return counts;
}

// M(b|a) for every pair; nullopt when a has no edges.
std::vector<std::vector<std::optional<double>>> all_scores(const BipartiteGraph& g, const CategoryAssignment& cats) {
    const auto k = cats.names().size();
    const auto counts = citers_per_category(g, cats, k);
    std::vector<std::vector<double>> sums(k, std::vector<double>(k, 0.0));
    std::vector<std::size_t> out_edges(k, 0);
    for (const auto& [u, v] : g.edges()) {
        const int a = cats.category_of(u);
        if (a == CategoryAssignment::kNone) continue;
        ++out_edges[static_cast<std::size_t>(a)];
        const double inv_in = 1.0 / static_cast<double>(g.citers_of(v).size());
        for (std::size_t b = 0; b < k; ++b) {
            auto hits = counts[v * k + b];
            if (static_cast<std::size_t>(a) == b) --hits;  // u itself
            sums[static_cast<std::size_t>(a)][b] += hits * inv_in;
        }
    }
    std::vector<std::vector<std::optional<double>>> out(k, std::vector<std::optional<double>>(k));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            if (out_edges[a] > 0) out[a][b] = sums[a][b] / static_cast<double>(out_edges[a]);
    return out;
}

}  // namespace

BipartiteGraph::BipartiteGraph(std::size_t num_outlets, std::size_t num_clusters, EdgeList edges)
    : edges_(std::move(edges)), out_adj_(num_outlets), in_adj_(num_clusters) {
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto [u, v] = edges_[i];
        if (u >= num_outlets || v >= num_clusters) throw InputError("edge endpoint out of range");
        if (i > 0 && edges_[i - 1] == edges_[i]) throw InputError("duplicate edge");
        out_adj_[u].push_back(v);
        in_adj_[v].push_back(u);
    }
    for (auto& adj : in_adj_) std::sort(adj.begin(), adj.end());
    outlet_ids_.resize(num_outlets);
    cluster_ids_.resize(num_clusters);
    for (std::size_t i = 0; i < num_outlets; ++i) outlet_ids_[i] = "o" + std::to_string(i);
    for (std::size_t j = 0; j < num_clusters; ++j) cluster_ids_[j] = "c" + std::to_string(j);
}

BipartiteGraph BipartiteGraph::from_edges(std::span<const cluster::Edge> edges,
                                          std::span<const std::string> extra_outlets) {
    std::set<std::string> outlets(extra_outlets.begin(), extra_outlets.end());
    std::set<std::string> clusters;
    for (const auto& e : edges) {
        outlets.insert(e.outlet_id);
        clusters.insert(e.cluster_id);
    }
    std::vector<std::string> oids(outlets.begin(), outlets.end());
    std::vector<std::string> cids(clusters.begin(), clusters.end());
    auto pos = [](const std::vector<std::string>& ids, const std::string& id) {
        return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    EdgeList list;
    list.reserve(edges.size());
    for (const auto& e : edges) list.emplace_back(pos(oids, e.outlet_id), pos(cids, e.cluster_id));
    BipartiteGraph g(oids.size(), cids.size(), std::move(list));
    g.outlet_ids_ = std::move(oids);
    g.cluster_ids_ = std::move(cids);
    return g;
}

bool BipartiteGraph::has_edge(std::size_t u, std::size_t v) const {
    const auto& adj = out_adj_[u];
    return std::binary_search(adj.begin(), adj.end(), static_cast<std::uint32_t>(v));
}

std::vector<std::size_t> BipartiteGraph::outlet_degrees() const {
    std::vector<std::size_t> d;
    d.reserve(out_adj_.size());
    for (const auto& a : out_adj_) d.push_back(a.size());
    return d;
}

std::vector<std::size_t> BipartiteGraph::cluster_degrees() const {
    std::vector<std::size_t> d;
    d.reserve(in_adj_.size());
    for (const auto& a : in_adj_) d.push_back(a.size());
    return d;
}

std::optional<std::size_t> BipartiteGraph::outlet_index(const std::string& id) const {
    auto it = std::lower_bound(outlet_ids_.begin(), outlet_ids_.end(), id);
    if (it == outlet_ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - outlet_ids_.begin());
}

int CategoryAssignment::category(const std::string& name) {
    if (auto c = find(name)) return *c;
    names_.push_back(name);
    return static_cast<int>(names_.size() - 1);
}

std::optional<int> CategoryAssignment::find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

std::vector<std::size_t> CategoryAssignment::members(int category) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < category_of_.size(); ++i)
        if (category_of_[i] == category) out.push_back(i);
    return out;
}

double proportion_score(const BipartiteGraph& g, const CategoryAssignment& cats, int a, int b) {
    if (cats.num_outlets() != g.num_outlets()) throw InputError("category assignment does not match graph");
    std::size_t out_edges = 0;
    double sum = 0.0;
    for (const auto& [u, v] : g.edges()) {
        if (cats.category_of(u) != a) continue;
        ++out_edges;
        const auto citers = g.citers_of(v);
        std::size_t hits = 0;
        for (auto w : citers)
            if (w != u && cats.category_of(w) == b) ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(citers.size());
    }
    if (out_edges == 0) {
        const auto& names = cats.names();
        const auto name = a >= 0 && static_cast<std::size_t>(a) < names.size() ? names[a] : std::to_string(a);
        throw InputError("category " + name + " has no edges");
    }
    return sum / static_cast<double>(out_edges);
}

BipartiteGraph rewire(const BipartiteGraph& g, std::size_t swaps, std::uint64_t seed) {
    auto edges = g.edges();
    if (edges.size() < 2) return g;

    std::unordered_set<std::uint64_t> present;
    present.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) present.insert(edge_key(u, v));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    for (std::size_t attempt = 0; attempt < swaps; ++attempt) {
        const auto i = pick(rng);
        const auto j = pick(rng);
        auto& e1 = edges[i];
        auto& e2 = edges[j];
        if (e1.first == e2.first || e1.second == e2.second) continue;
        const auto k1 = edge_key(e2.first, e1.second);
        const auto k2 = edge_key(e1.first, e2.second);
        if (present.contains(k1) || present.contains(k2)) continue;
        present.erase(edge_key(e1.first, e1.second));
        present.erase(edge_key(e2.first, e2.second));
        present.insert(k1);
        present.insert(k2);
        std::swap(e1.first, e2.first);
    }

    BipartiteGraph out(g.num_outlets(), g.num_clusters(), std::move(edges));
    out.copy_ids_from(g);
    return out;
}

SurpriseResult summarize(double m_original, std::span<const double> null_scores) {
    const auto n = null_scores.size();
    if (n < 2) throw std::runtime_error("degenerate null distribution");
    const auto [lo, hi] = std::minmax_element(null_scores.begin(), null_scores.end());
    if (*lo == *hi) throw std::runtime_error("degenerate null distribution");
    double mean = 0.0;
    for (double x : null_scores) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : null_scores) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw std::runtime_error("degenerate null distribution");
    return {m_original, mean, var, (m_original - mean) / std::sqrt(var)};
}

SurpriseResult surprise(const BipartiteGraph& g, const CategoryAssignment& cats, int a, int b,
                        const EnsembleParams& params) {
    const double m = proportion_score(g, cats, a, b);
    const auto swaps = params.swaps_for(g);
    std::vector<double> null_scores(params.num_graphs);
    for (std::size_t k = 0; k < params.num_graphs; ++k)
        null_scores[k] = proportion_score(rewire(g, swaps, params.seed + k), cats, a, b);
    return summarize(m, null_scores);
}

SurpriseTable surprise_table(const BipartiteGraph& g, const CategoryAssignment& cats, const EnsembleParams& params) {
    if (cats.num_outlets() != g.num_outlets()) throw InputError("category assignment does not match graph");
    const auto k = cats.names().size();
    SurpriseTable t;
    t.m_original = all_scores(g, cats);
    t.m_null.assign(k, std::vector<std::vector<double>>(k));
    const auto swaps = params.swaps_for(g);
    for (std::size_t r = 0; r < params.num_graphs; ++r) {
        const auto scores = all_scores(rewire(g, swaps, params.seed + r), cats);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                if (scores[a][b]) t.m_null[a][b].push_back(*scores[a][b]);
    }
    return t;
}

void BipartiteGraph::copy_ids_from(const BipartiteGraph& other) {
    if (other.num_outlets() != num_outlets() || other.num_clusters() != num_clusters())
        throw InputError("node counts differ");
    outlet_ids_ = other.outlet_ids_;
    cluster_ids_ = other.cluster_ids_;
}

}  // namespace quotus::bigraph
