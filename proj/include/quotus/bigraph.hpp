#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quotus/dedup_cluster.hpp"

namespace quotus::bigraph {

/// Outlets (left) cite quote clusters (right). Edges are unique.
class BipartiteGraph {
public:
    using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

    BipartiteGraph() = default;
    /// Throws InputError on out-of-range endpoints or duplicate edges.
    BipartiteGraph(std::size_t num_outlets, std::size_t num_clusters, EdgeList edges);

    /// Nodes are the sorted distinct ids found in `edges`, plus any extra
    /// outlet ids supplied (outlets without edges keep a row).
    static BipartiteGraph from_edges(std::span<const cluster::Edge> edges,
                                     std::span<const std::string> extra_outlets = {});

    std::size_t num_outlets() const { return out_adj_.size(); }
    std::size_t num_clusters() const { return in_adj_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    /// Sorted by (outlet, cluster).
    const EdgeList& edges() const { return edges_; }
    /// Clusters cited by outlet u, ascending.
    std::span<const std::uint32_t> cited_by(std::size_t u) const { return out_adj_[u]; }
    /// Outlets citing cluster v, ascending (the inbound edges i(v)).
    std::span<const std::uint32_t> citers_of(std::size_t v) const { return in_adj_[v]; }
    bool has_edge(std::size_t u, std::size_t v) const;

    std::vector<std::size_t> outlet_degrees() const;
    std::vector<std::size_t> cluster_degrees() const;

    const std::vector<std::string>& outlet_ids() const { return outlet_ids_; }
    const std::vector<std::string>& cluster_ids() const { return cluster_ids_; }
    std::optional<std::size_t> outlet_index(const std::string& id) const;

    /// Copies node ids from a graph with the same node counts.
    void copy_ids_from(const BipartiteGraph& other);

    bool operator==(const BipartiteGraph& o) const {
        return num_outlets() == o.num_outlets() && num_clusters() == o.num_clusters() && edges_ == o.edges_;
    }

private:
    EdgeList edges_;
    std::vector<std::vector<std::uint32_t>> out_adj_;
    std::vector<std::vector<std::uint32_t>> in_adj_;
    std::vector<std::string> outlet_ids_;
    std::vector<std::string> cluster_ids_;
};

/// Disjoint outlet categories; not every outlet needs one.
class CategoryAssignment {
public:
    static constexpr int kNone = -1;

    explicit CategoryAssignment(std::size_t num_outlets = 0) : category_of_(num_outlets, kNone) {}

    /// Returns the category index, creating it on first use.
    int category(const std::string& name);
    std::optional<int> find(const std::string& name) const;
    void assign(std::size_t outlet, int category) { category_of_.at(outlet) = category; }

    int category_of(std::size_t outlet) const { return category_of_[outlet]; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t num_outlets() const { return category_of_.size(); }
    std::vector<std::size_t> members(int category) const;

private:
    std::vector<int> category_of_;
    std::vector<std::string> names_;
};

/// Average over edges (u, v) with u in A of the fraction of v's citers that
/// are in B and differ from u. Throws InputError when A has no edges.
double proportion_score(const BipartiteGraph& g, const CategoryAssignment& cats, int a, int b);

/// `swaps` double-edge swap attempts. Attempts whose endpoints coincide or
/// whose replacement edges already exist are skipped and still counted.
BipartiteGraph rewire(const BipartiteGraph& g, std::size_t swaps, std::uint64_t seed);

struct EnsembleParams {
    std::size_t num_graphs = 200;
    /// 0 means 10 * |E|.
    std::size_t swaps_per_graph = 0;
    std::uint64_t seed = 0;

    std::size_t swaps_for(const BipartiteGraph& g) const {
        return swaps_per_graph ? swaps_per_graph : 10 * g.num_edges();
    }
};

struct SurpriseResult {
    double m_original = 0.0;
    double m_null_mean = 0.0;
    double m_null_var = 0.0;
    double surprise = 0.0;
};

/// Standardized deviation of M(B|A) from the rewiring ensemble. Ensemble
/// graph k is rewired from `g` with seed `params.seed + k`. Variance is the
/// unbiased (n - 1) estimate. Throws std::runtime_error("degenerate null
/// distribution") when it is zero.
SurpriseResult surprise(const BipartiteGraph& g, const CategoryAssignment& cats, int a, int b,
                        const EnsembleParams& params);

/// Scores M(B|A) on `g` and every ensemble graph for all category pairs at
/// once; element [a][b] of each returned matrix. Pairs whose A has no edges
/// are reported as nullopt.
struct SurpriseTable {
    std::vector<std::vector<std::optional<double>>> m_original;
    std::vector<std::vector<std::vector<double>>> m_null;
};
SurpriseTable surprise_table(const BipartiteGraph& g, const CategoryAssignment& cats, const EnsembleParams& params);

/// Mean, unbiased variance, and surprise for a null sample. Throws on
/// zero variance or fewer than two samples.
SurpriseResult summarize(double m_original, std::span<const double> null_scores);

}  // namespace quotus::bigraph
