#include "quotus/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "quotus/complete.hpp"
#include "quotus/jsonl.hpp"
#include "quotus/latent.hpp"
#include "quotus/report.hpp"

namespace quotus::pipeline {

namespace fs = std::filesystem;
using jsonl::Json;
using jsonl::OrderedJson;

namespace {

// Reads the fields of one config object, rejecting keys nobody asked for.
class Section {
public:
    Section(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw InputError("config: " + where() + " must be an object");
    }

    bool has(const std::string& key) const {
        return obj_.contains(key) && !obj_.at(key).is_null();
    }

    std::optional<Section> section(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return std::optional<Section>(std::in_place, obj_.at(key), qualified(key));
    }

    void get(const std::string& key, double& out) {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number()) throw InputError("config: " + qualified(key) + " must be a number");
        out = v.get<double>();
    }

    void get(const std::string& key, bool& out) {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) throw InputError("config: " + qualified(key) + " must be a boolean");
        out = v.get<bool>();
    }

    void get(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_string()) throw InputError("config: " + qualified(key) + " must be a string");
        out = v.get<std::string>();
    }

    template <typename Int>
        requires std::is_integral_v<Int>
    void get(const std::string& key, Int& out) {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw InputError("config: " + qualified(key) + " must be a non-negative integer");
        out = static_cast<Int>(v.get<std::uint64_t>());
    }

    template <typename T>
    void get(const std::string& key, std::optional<T>& out) {
        if (!has(key)) return;
        T value{};
        get(key, value);
        out = value;
    }

    void get(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_array()) throw InputError("config: " + qualified(key) + " must be an array of numbers");
        out.clear();
        for (const auto& x : v) {
            if (!x.is_number()) throw InputError("config: " + qualified(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
    }

private:
    std::string where() const { return path_.empty() ? "top level" : path_; }
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json& obj_;
    std::string path_;
};

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"paths", {"transcripts", "articles", "outlets", "workdir"}},
        {"corpus", {"speaker", "keyword"}},
        {"alignment",
         {"min_quote_words", "max_lag_days", "sim_threshold", "gap_penalty", "mismatch_penalty", "match_score",
          "exhaustive"}},
        {"dedup", {"max_norm_distance", "window_days"}},
        {"cluster", {"min_overlap"}},
        {"describe", {"keyword", "min_citers"}},
        {"ensemble", {"num_graphs", "swaps_per_graph"}},
        {"holdout", {"count", "fraction", "seed"}},
        {"completion", {"lambdas", "lambda_count", "lambda_hi", "lambda_lo", "max_rank", "max_iters", "tol"}},
        {"latent", {"rank", "source", "top_k", "features", "dominant_margin"}},
        {"report", {"title"}},
    };
    return keys;
}

void check_keys(const Json& root) {
    if (!root.is_object()) throw InputError("config: top level must be an object");
    for (const auto& [key, value] : root.items()) {
        if (key == "seed") continue;
        auto it = schema().find(key);
        if (it == schema().end()) throw InputError("config: unknown key " + key);
        if (!value.is_object()) throw InputError("config: " + key + " must be an object");
        for (const auto& [sub, v] : value.items())
            if (!it->second.count(sub)) throw InputError("config: unknown key " + key + "." + sub);
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void read_days(Section& s, const std::string& key, Timestamp& out) {
    std::optional<double> days;
    s.get(key, days);
    if (!days) return;
    if (!std::isfinite(*days) || *days < 0) throw InputError("config: " + key + " must be a non-negative number");
    out = static_cast<Timestamp>(std::llround(*days * static_cast<double>(kSecondsPerDay)));
}

void validate(const PipelineConfig& c) {
    c.alignment.validate();
    c.dedup.validate();
    if (c.min_overlap < 1) throw InputError("config: cluster.min_overlap must be positive");
    if (c.ensemble_graphs < 2) throw InputError("config: ensemble.num_graphs must be at least 2");
    if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0))
        throw InputError("config: holdout.fraction must lie in (0, 1)");
    for (double l : c.lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("config: completion.lambdas must be non-negative");
    if (c.lambdas.empty() && c.lambda_count == 0) throw InputError("config: completion.lambda_count must be positive");
    if (!(c.lambda_hi > 0.0 && c.lambda_lo > 0.0)) throw InputError("config: lambda fractions must be positive");
    if (c.max_rank == 0) throw InputError("config: completion.max_rank must be positive");
    if (c.max_iters == 0) throw InputError("config: completion.max_iters must be positive");
    if (!(c.tol >= 0.0)) throw InputError("config: completion.tol must be non-negative");
    if (c.latent_rank == 0) throw InputError("config: latent.rank must be positive");
    if (c.dominant_margin && !(*c.dominant_margin >= 0.0))
        throw InputError("config: latent.dominant_margin must be non-negative");
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("config: malformed JSON: ") + e.what());
    }

    check_keys(root);
    PipelineConfig c;
    {
        Section top(root, "");
        if (!top.has("seed")) throw InputError("config: missing seed");
        top.get("seed", c.seed);

        if (auto s = top.section("paths")) {
            std::string p;
            auto path_field = [&](const char* key, fs::path& out) {
                p.clear();
                s->get(key, p);
                if (!p.empty()) out = resolve(base_dir, p);
            };
            path_field("transcripts", c.transcripts);
            path_field("articles", c.articles);
            path_field("outlets", c.outlets);
            path_field("workdir", c.workdir);
        }
        if (auto s = top.section("corpus")) {
            s->get("speaker", c.speaker);
            s->get("keyword", c.keyword);
        }
        if (auto s = top.section("alignment")) {
            s->get("min_quote_words", c.alignment.min_quote_words);
            read_days(*s, "max_lag_days", c.alignment.max_lag);
            s->get("sim_threshold", c.alignment.sim_threshold);
            s->get("gap_penalty", c.alignment.gap_penalty);
            s->get("mismatch_penalty", c.alignment.mismatch_penalty);
            s->get("match_score", c.alignment.match_score);
            s->get("exhaustive", c.alignment.exhaustive);
        }
        if (auto s = top.section("dedup")) {
            s->get("max_norm_distance", c.dedup.max_norm_distance);
            read_days(*s, "window_days", c.dedup.window);
        }
        if (auto s = top.section("cluster")) s->get("min_overlap", c.min_overlap);
        if (auto s = top.section("describe")) {
            s->get("keyword", c.describe.keyword);
            s->get("min_citers", c.describe.min_citers);
        }
        if (auto s = top.section("ensemble")) {
            s->get("num_graphs", c.ensemble_graphs);
            s->get("swaps_per_graph", c.ensemble_swaps);
        }
        if (auto s = top.section("holdout")) {
            s->get("count", c.holdout_count);
            s->get("fraction", c.holdout_fraction);
            s->get("seed", c.holdout_seed);
        }
        if (auto s = top.section("completion")) {
            s->get("lambdas", c.lambdas);
            s->get("lambda_count", c.lambda_count);
            s->get("lambda_hi", c.lambda_hi);
            s->get("lambda_lo", c.lambda_lo);
            s->get("max_rank", c.max_rank);
            s->get("max_iters", c.max_iters);
            s->get("tol", c.tol);
        }
        if (auto s = top.section("latent")) {
            s->get("rank", c.latent_rank);
            std::string source = "auto";
            s->get("source", source);
            if (source == "auto")
                c.latent_source = LatentSource::Auto;
            else if (source == "model")
                c.latent_source = LatentSource::Model;
            else if (source == "matrix")
                c.latent_source = LatentSource::Matrix;
            else
                throw InputError("config: latent.source must be auto, model or matrix");
            s->get("top_k", c.latent_top_k);
            std::string features;
            s->get("features", features);
            if (!features.empty()) c.features = resolve(base_dir, features);
            s->get("dominant_margin", c.dominant_margin);
        }
        if (auto s = top.section("report")) s->get("title", c.report_title);
    }
    validate(c);
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw InputError("config file not found: " + path.string());
    return parse_config(jsonl::read_text(path), path.parent_path());
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Ingest: return "ingest";
        case Stage::Match: return "match";
        case Stage::Cluster: return "cluster";
        case Stage::Graph: return "graph";
        case Stage::Describe: return "describe";
        case Stage::Surprise: return "surprise";
        case Stage::Complete: return "complete";
        case Stage::Latent: return "latent";
        case Stage::Report: return "report";
    }
    return "";
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::Ingest,   Stage::Match,    Stage::Cluster,
                                           Stage::Graph,    Stage::Describe, Stage::Surprise,
                                           Stage::Complete, Stage::Latent,   Stage::Report};
    return stages;
}

std::optional<Stage> parse_stage(std::string_view name) {
    for (auto s : all_stages())
        if (stage_name(s) == name) return s;
    return std::nullopt;
}

namespace {

fs::path need(const PipelineConfig& c, const char* file, Stage producer) {
    auto p = c.workdir / file;
    if (!fs::exists(p)) throw MissingStageError(std::string(stage_name(producer)));
    return p;
}

void write_json(const fs::path& p, const OrderedJson& j) { jsonl::write_text(p, j.dump(2) + "\n"); }

const corpus::Tokenizer kTokenizer{};

std::vector<corpus::Outlet> workdir_outlets(const PipelineConfig& c) {
    return corpus::load_outlets(need(c, artifact::outlets, Stage::Ingest));
}

std::vector<corpus::Transcript> workdir_transcripts(const PipelineConfig& c) {
    return corpus::load_transcripts(need(c, artifact::transcripts, Stage::Ingest), c.speaker, kTokenizer);
}

std::vector<corpus::Article> workdir_articles(const PipelineConfig& c, const char* file,
                                              const std::vector<corpus::Outlet>& outlets) {
    return corpus::load_articles(need(c, file, Stage::Ingest), outlets, std::nullopt);
}

struct Clustered {
    std::vector<corpus::Article> kept;
    std::vector<align::QuoteMatch> matches;
    std::vector<cluster::QuoteCluster> clusters;
    std::vector<cluster::Edge> edges;
};

// Articles and matches that survived deduplication, plus clusters and edges.
Clustered load_clustered(const PipelineConfig& c, const std::vector<corpus::Outlet>& outlets) {
    Clustered out;
    out.clusters = cluster::load_clusters(need(c, artifact::clusters, Stage::Cluster));
    out.edges = cluster::load_edges(need(c, artifact::edges, Stage::Cluster));
    std::set<std::string> dropped;
    for (const auto& d : dedup::load_dropped(need(c, artifact::dropped, Stage::Cluster))) dropped.insert(d.dropped_id);
    for (auto& a : workdir_articles(c, artifact::articles, outlets))
        if (!dropped.count(a.id)) out.kept.push_back(std::move(a));
    for (auto& m : align::load_matches(need(c, artifact::matches, Stage::Match)))
        if (!dropped.count(m.article_id)) out.matches.push_back(std::move(m));
    return out;
}

std::vector<std::string> outlet_ids(const std::vector<corpus::Outlet>& outlets) {
    std::vector<std::string> ids;
    for (const auto& o : outlets) ids.push_back(o.id);
    return ids;
}

std::vector<std::string> cluster_ids(const std::vector<cluster::QuoteCluster>& clusters) {
    std::vector<std::string> ids;
    for (const auto& cl : clusters) ids.push_back(cl.id);
    return ids;
}

std::vector<std::pair<std::string, std::string>> edge_pairs(const std::vector<cluster::Edge>& edges) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : edges) out.emplace_back(e.outlet_id, e.cluster_id);
    return out;
}

const std::vector<corpus::OutletLabel> kLabels{corpus::OutletLabel::DeclaredConservative,
                                               corpus::OutletLabel::SuspectedConservative,
                                               corpus::OutletLabel::SuspectedLiberal,
                                               corpus::OutletLabel::DeclaredLiberal};

bigraph::CategoryAssignment label_assignment(const bigraph::BipartiteGraph& g,
                                             const std::vector<corpus::Outlet>& outlets) {
    bigraph::CategoryAssignment cats(g.num_outlets());
    for (auto l : kLabels) cats.category(std::string(corpus::to_string(l)));
    for (const auto& o : outlets) {
        if (o.label == corpus::OutletLabel::Unlabeled) continue;
        if (auto idx = g.outlet_index(o.id)) cats.assign(*idx, *cats.find(std::string(corpus::to_string(o.label))));
    }
    return cats;
}

bigraph::BipartiteGraph citation_graph(const std::vector<cluster::Edge>& edges,
                                       const std::vector<corpus::Outlet>& outlets) {
    const auto ids = outlet_ids(outlets);
    return bigraph::BipartiteGraph::from_edges(edges, ids);
}

void run_ingest(const PipelineConfig& c, Diagnostics& diag) {
    for (const auto* p : {&c.transcripts, &c.articles, &c.outlets}) {
        if (p->empty()) throw InputError("config: paths must name transcripts, articles and outlets");
        if (!fs::exists(*p)) throw InputError("input file not found: " + p->string());
    }
    const auto outlets = corpus::load_outlets(c.outlets);
    const auto transcripts = corpus::load_transcripts(c.transcripts, c.speaker, kTokenizer);
    const auto articles = corpus::load_articles(c.articles, outlets, std::nullopt);
    std::vector<corpus::Article> filtered;
    for (const auto& a : articles)
        if (!c.keyword || corpus::mentions(a, *c.keyword)) filtered.push_back(a);
    if (filtered.empty()) warn(&diag, "no articles left after keyword filtering");

    corpus::save_outlets(c.workdir / artifact::outlets, outlets);
    corpus::save_transcripts(c.workdir / artifact::transcripts, transcripts);
    corpus::save_articles(c.workdir / artifact::articles_all, articles);
    corpus::save_articles(c.workdir / artifact::articles, filtered);
}

void run_match(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto transcripts = workdir_transcripts(c);
    const auto articles = workdir_articles(c, artifact::articles, outlets);
    const auto matches = align::match_articles(articles, transcripts, kTokenizer, c.alignment, &diag);
    align::save_matches(c.workdir / artifact::matches, matches);
}

void run_cluster(const PipelineConfig& c, Diagnostics&) {
    const auto outlets = workdir_outlets(c);
    const auto articles = workdir_articles(c, artifact::articles, outlets);
    auto matches = align::load_matches(need(c, artifact::matches, Stage::Match));

    const auto deduped = dedup::dedup_articles(articles, c.dedup);
    std::set<std::string> dropped;
    for (const auto& d : deduped.dropped) dropped.insert(d.dropped_id);
    std::erase_if(matches, [&](const align::QuoteMatch& m) { return dropped.count(m.article_id) > 0; });

    const auto clusters = cluster::cluster_matches(matches, c.min_overlap);
    const auto edges = cluster::earliest_edges(clusters, matches, deduped.kept);
    dedup::save_dropped(c.workdir / artifact::dropped, deduped.dropped);
    cluster::save_clusters(c.workdir / artifact::clusters, clusters);
    cluster::save_edges(c.workdir / artifact::edges, edges);
}

void run_graph(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto edges = cluster::load_edges(need(c, artifact::edges, Stage::Cluster));
    const auto g = citation_graph(edges, outlets);
    const auto cats = label_assignment(g, outlets);

    std::map<std::string, corpus::OutletLabel> label_of;
    for (const auto& o : outlets) label_of.emplace(o.id, o.label);
    const auto out_deg = g.outlet_degrees();
    const auto in_deg = g.cluster_degrees();

    OrderedJson j;
    j["num_outlets"] = g.num_outlets();
    j["num_clusters"] = g.num_clusters();
    j["num_edges"] = g.num_edges();
    OrderedJson outs = OrderedJson::array();
    for (std::size_t u = 0; u < g.num_outlets(); ++u)
        outs.push_back({{"id", g.outlet_ids()[u]},
                        {"label", corpus::to_string(label_of.at(g.outlet_ids()[u]))},
                        {"degree", out_deg[u]}});
    j["outlets"] = std::move(outs);
    OrderedJson cls = OrderedJson::array();
    for (std::size_t v = 0; v < g.num_clusters(); ++v) cls.push_back({{"id", g.cluster_ids()[v]}, {"degree", in_deg[v]}});
    j["clusters"] = std::move(cls);
    write_json(c.workdir / artifact::graph, j);

    jsonl::Writer w(c.workdir / artifact::proportions);
    const auto& names = cats.names();
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = 0; b < names.size(); ++b) {
            try {
                const double m = bigraph::proportion_score(g, cats, static_cast<int>(a), static_cast<int>(b));
                w.write({{"A", names[a]}, {"B", names[b]}, {"m", m}});
            } catch (const InputError& e) {
                if (b == 0) warn(&diag, e.what());
            }
        }
    }
    w.close();
}

void run_describe(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto all_articles = workdir_articles(c, artifact::articles_all, outlets);
    const auto cl = load_clustered(c, outlets);
    describe::StatsInput in{outlets, all_articles, cl.kept, cl.matches, cl.edges};
    const auto stats = describe::outlet_stats(in, kTokenizer, c.alignment, c.describe, &diag);
    const auto agg = describe::aggregate(stats);
    describe::save_stats(c.workdir / artifact::stats, stats, agg);
}

void run_surprise(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto edges = cluster::load_edges(need(c, artifact::edges, Stage::Cluster));
    const auto g = citation_graph(edges, outlets);
    const auto cats = label_assignment(g, outlets);
    bigraph::EnsembleParams params{c.ensemble_graphs, c.ensemble_swaps, c.seed};
    const auto table = bigraph::surprise_table(g, cats, params);

    jsonl::Writer w(c.workdir / artifact::surprise);
    const auto& names = cats.names();
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = 0; b < names.size(); ++b) {
            const auto& m = table.m_original[a][b];
            if (!m) continue;
            OrderedJson rec{{"A", names[a]}, {"B", names[b]}, {"m_original", *m}};
            try {
                const auto r = bigraph::summarize(*m, table.m_null[a][b]);
                rec["m_null_mean"] = r.m_null_mean;
                rec["m_null_std"] = std::sqrt(r.m_null_var);
                rec["surprise"] = r.surprise;
            } catch (const std::runtime_error& e) {
                warn(&diag, "surprise " + names[b] + "|" + names[a] + ": " + e.what());
                rec["m_null_mean"] = nullptr;
                rec["m_null_std"] = nullptr;
                rec["surprise"] = nullptr;
            }
            rec["num_graphs"] = params.num_graphs;
            rec["swaps"] = params.swaps_for(g);
            rec["seed"] = params.seed;
            w.write(rec);
        }
    }
    w.close();
}

OrderedJson eval_json(const complete::EvalReport& r) {
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},       {"mcc", r.mcc},
            {"threshold", r.threshold}, {"tp", r.counts.tp},  {"fp", r.counts.fp}, {"tn", r.counts.tn},
            {"fn", r.counts.fn}};
}

void run_complete(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto clusters = cluster::load_clusters(need(c, artifact::clusters, Stage::Cluster));
    const auto edges = cluster::load_edges(need(c, artifact::edges, Stage::Cluster));
    const auto rows = outlet_ids(outlets);
    const auto cols = cluster_ids(clusters);
    if (rows.empty() || cols.empty()) throw InputError("complete: empty citation matrix");

    const std::size_t cells = rows.size() * cols.size();
    const std::size_t holdout =
        c.holdout_count.value_or(static_cast<std::size_t>(std::floor(c.holdout_fraction * static_cast<double>(cells))));
    const std::uint64_t holdout_seed = c.holdout_seed.value_or(c.seed);
    const auto pairs = edge_pairs(edges);
    const auto built = complete::build_matrix(pairs, rows, cols, holdout, holdout_seed);

    const double sigma = complete::max_singular_value(built.matrix, c.seed);
    const auto lambdas = c.lambdas.empty() ? complete::lambda_grid(sigma, c.lambda_count, c.lambda_hi, c.lambda_lo)
                                           : c.lambdas;
    complete::SoftImputeParams base;
    base.max_rank = c.max_rank;
    base.max_iters = c.max_iters;
    base.tol = c.tol;
    base.seed = c.seed;
    const auto tuned = complete::tune_lambda(built.matrix, lambdas, base, built.split.dev, built.split.test, &diag);
    complete::save_model(c.workdir / artifact::model, tuned.model);

    const auto baselines = complete::compute_baselines(built.matrix);
    const auto pop = complete::tune_and_evaluate(
        complete::baseline_scores(baselines, complete::BaselineMode::Popularity), built.split.dev, built.split.test);
    const auto pop_prop =
        complete::tune_and_evaluate(complete::baseline_scores(baselines, complete::BaselineMode::PopularityPropensity),
                                    built.split.dev, built.split.test);

    OrderedJson j;
    OrderedJson grid = OrderedJson::array();
    for (double l : lambdas) grid.push_back(l);
    j["config"] = {{"seed", c.seed},           {"holdout_count", holdout}, {"holdout_seed", holdout_seed},
                   {"lambdas", grid},          {"max_rank", c.max_rank},   {"max_iters", c.max_iters},
                   {"tol", c.tol}};
    j["matrix"] = {{"rows", rows.size()},
                   {"cols", cols.size()},
                   {"positives", built.matrix.positives().size()},
                   {"dev", built.split.dev.size()},
                   {"test", built.split.test.size()},
                   {"sigma_max", sigma}};
    auto model = eval_json(tuned.test);
    model["lambda"] = tuned.model.lambda;
    model["rank"] = tuned.model.rank();
    j["model"] = std::move(model);
    j["baselines"] = {{"popularity", eval_json(pop)}, {"popularity_propensity", eval_json(pop_prop)}};
    OrderedJson path = OrderedJson::array();
    for (const auto& e : tuned.path)
        path.push_back({{"lambda", e.lambda},
                        {"rank", e.rank},
                        {"nuclear_norm", e.nuclear_norm},
                        {"dev_mcc", e.dev_mcc},
                        {"threshold", e.threshold},
                        {"iterations", e.iterations},
                        {"converged", e.converged}});
    j["path"] = std::move(path);
    write_json(c.workdir / artifact::eval, j);
}

OrderedJson coordinates(const Eigen::MatrixXd& m, Eigen::Index row) {
    OrderedJson out = OrderedJson::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) out.push_back(m(row, k));
    return out;
}

void run_latent(const PipelineConfig& c, Diagnostics& diag) {
    const auto outlets = workdir_outlets(c);
    const auto transcripts = workdir_transcripts(c);
    const auto clusters = cluster::load_clusters(need(c, artifact::clusters, Stage::Cluster));
    const auto edges = cluster::load_edges(need(c, artifact::edges, Stage::Cluster));
    const auto rows = outlet_ids(outlets);
    const auto cols = cluster_ids(clusters);
    if (rows.empty() || cols.empty()) throw InputError("latent: empty citation matrix");

    bool use_model = c.latent_source == LatentSource::Model;
    if (c.latent_source == LatentSource::Auto) use_model = fs::exists(c.workdir / artifact::model);

    latent::LatentSpace ls;
    if (use_model) {
        const auto model = complete::load_model(need(c, artifact::model, Stage::Complete));
        if (static_cast<std::size_t>(model.U.rows()) != rows.size() ||
            static_cast<std::size_t>(model.V.rows()) != cols.size())
            throw InputError("latent: model shape does not match the citation matrix; rerun complete");
        ls = latent::from_model(model, std::min(c.latent_rank, model.rank()), &diag);
    } else {
        const auto pairs = edge_pairs(edges);
        const auto built = complete::build_matrix(pairs, rows, cols, 0, c.seed);
        const auto r = std::min({c.latent_rank, rows.size(), cols.size()});
        ls = latent::decompose(built.matrix, r, &diag);
    }
    if (ls.rank() == 0) warn(&diag, "latent space is empty");

    std::vector<std::string> labels{"negation"};
    Eigen::MatrixXd raw(1, static_cast<Eigen::Index>(cols.size()));
    raw.row(0) = latent::negation_indicator(clusters, transcripts).transpose();
    if (c.features) {
        if (!fs::exists(*c.features)) throw InputError("features file not found: " + c.features->string());
        const auto records = latent::load_feature_records(*c.features);
        std::vector<std::string> names;
        const auto values = latent::feature_values(records, cols, names, c.dominant_margin);
        Eigen::MatrixXd stacked(raw.rows() + values.rows(), raw.cols());
        stacked << raw, values;
        raw = std::move(stacked);
        labels.insert(labels.end(), names.begin(), names.end());
    }
    const auto features = latent::make_feature_matrix("features", labels, raw);

    jsonl::Writer emb(c.workdir / artifact::embeddings);
    for (std::size_t i = 0; i < rows.size(); ++i)
        emb.write({{"entity_id", rows[i]}, {"kind", "outlet"}, {"coordinates", coordinates(ls.U, static_cast<Eigen::Index>(i))}});
    for (std::size_t j = 0; j < cols.size(); ++j)
        emb.write({{"entity_id", cols[j]}, {"kind", "cluster"}, {"coordinates", coordinates(ls.V, static_cast<Eigen::Index>(j))}});
    if (ls.rank() > 0) {
        const auto L = latent::project_features(features, ls);
        for (std::size_t f = 0; f < labels.size(); ++f)
            emb.write({{"entity_id", labels[f]}, {"kind", "feature"}, {"coordinates", coordinates(L, static_cast<Eigen::Index>(f))}});
    }
    emb.close();

    jsonl::Writer corr(c.workdir / artifact::correlations);
    for (std::size_t f = 0; f < labels.size(); ++f) {
        std::vector<double> values(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            values[j] = raw(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j));
        for (std::size_t d = 0; d < ls.rank(); ++d) {
            OrderedJson rec{{"feature", labels[f]}, {"dimension", d}};
            try {
                const auto r = latent::correlate(values, d, ls);
                rec["rho"] = r.rho;
                rec["p_value"] = r.p_value;
                rec["n"] = r.n;
            } catch (const InputError& e) {
                if (d == 0) warn(&diag, "feature " + labels[f] + ": " + e.what());
                rec["rho"] = nullptr;
                rec["p_value"] = nullptr;
                rec["n"] = cols.size();
            }
            corr.write(rec);
        }
    }
    corr.close();

    OrderedJson rankings;
    rankings["source"] = use_model ? "model" : "matrix";
    OrderedJson sv = OrderedJson::array();
    for (Eigen::Index k = 0; k < ls.S.size(); ++k) sv.push_back(ls.S(k));
    rankings["singular_values"] = std::move(sv);
    OrderedJson dims = OrderedJson::array();
    auto list = [](std::span<const latent::RankedOutlet> xs) {
        OrderedJson a = OrderedJson::array();
        for (const auto& x : xs) a.push_back({{"outlet_id", x.outlet_id}, {"score", x.score}});
        return a;
    };
    for (std::size_t d = 0; d < ls.rank(); ++d) {
        const auto ranked = latent::rank_outlets(ls, d, rows);
        const auto ex = latent::extract_ranking(ranked, c.latent_top_k);
        dims.push_back({{"dimension", d},
                        {"top", list(ex.top)},
                        {"middle", list(ex.middle)},
                        {"bottom", list(ex.bottom)},
                        {"all", list(ranked)}});
    }
    rankings["dimensions"] = std::move(dims);
    write_json(c.workdir / artifact::rankings, rankings);
}

std::string join_tokens(const corpus::Transcript& t, const TokenSpan& span) {
    std::string out;
    for (auto k = std::max<std::int64_t>(span.begin, 0);
         k < std::min<std::int64_t>(span.end, static_cast<std::int64_t>(t.tokens.size())); ++k) {
        const auto& tok = t.tokens[static_cast<std::size_t>(k)];
        if (tok.empty()) continue;
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

std::vector<Json> read_jsonl(const fs::path& p) {
    std::vector<Json> out;
    jsonl::for_each_record(p, [&](const Json& rec, std::size_t) { out.push_back(rec); });
    return out;
}

std::string cell(const Json& v, int digits = 3) {
    if (v.is_null()) return "n/a";
    if (v.is_number_float()) return report::format_number(v.get<double>(), digits);
    if (v.is_number()) return std::to_string(v.get<std::int64_t>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void run_report(const PipelineConfig& c, Diagnostics&) {
    const auto outlets = workdir_outlets(c);
    const auto transcripts = workdir_transcripts(c);
    const auto cl = load_clustered(c, outlets);
    const auto embeddings = read_jsonl(need(c, artifact::embeddings, Stage::Latent));
    const auto categories = report::label_categories(outlets);

    report::ReportContent content;
    content.title = c.report_title;

    OrderedJson tracks = OrderedJson::array();
    for (const auto& t : transcripts) {
        auto track = report::token_volume(t.id, t.tokens.size(), cl.clusters, cl.edges, categories);
        OrderedJson by_cat = OrderedJson::object();
        for (const auto& [name, ys] : track.by_category) by_cat[name] = ys;
        tracks.push_back({{"transcript_id", t.id}, {"tokens", t.tokens.size()}, {"overall", track.overall},
                          {"by_category", std::move(by_cat)}});
        content.tracks.push_back(std::move(track));
    }
    write_json(c.workdir / artifact::token_volume, OrderedJson{{"tracks", std::move(tracks)}});

    std::map<std::string, const align::QuoteMatch*> match_of;
    for (const auto& m : cl.matches) match_of.emplace(m.occurrence_id, &m);
    std::map<std::string, const corpus::Transcript*> transcript_of;
    for (const auto& t : transcripts) transcript_of.emplace(t.id, &t);
    std::map<std::string, std::size_t> citers;
    for (const auto& e : cl.edges) ++citers[e.cluster_id];

    OrderedJson variants_json = OrderedJson::array();
    for (const auto& q : cl.clusters) {
        report::ClusterVariants v;
        v.cluster_id = q.id;
        if (auto t = transcript_of.find(q.transcript_id); t != transcript_of.end())
            v.transcript_text = join_tokens(*t->second, q.span);
        v.citing_outlets = citers.count(q.id) ? citers.at(q.id) : 0;
        std::map<std::string, std::size_t> counts;
        for (const auto& id : q.members)
            if (auto m = match_of.find(id); m != match_of.end()) ++counts[m->second->quote_text];
        v.variants.assign(counts.begin(), counts.end());
        std::stable_sort(v.variants.begin(), v.variants.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        OrderedJson vs = OrderedJson::array();
        for (const auto& [text, n] : v.variants) vs.push_back({{"text", text}, {"occurrences", n}});
        variants_json.push_back({{"cluster_id", v.cluster_id},
                                 {"transcript_id", q.transcript_id},
                                 {"span_start", q.span.begin},
                                 {"span_end", q.span.end},
                                 {"transcript_text", v.transcript_text},
                                 {"citing_outlets", v.citing_outlets},
                                 {"variants", std::move(vs)}});
        content.clusters.push_back(std::move(v));
    }
    write_json(c.workdir / artifact::cluster_variants, variants_json);

    std::map<std::string, std::string> label_of;
    for (const auto& o : outlets) label_of.emplace(o.id, std::string(corpus::to_string(o.label)));
    for (const auto& e : embeddings) {
        if (e.at("kind") != "outlet") continue;
        const auto& xs = e.at("coordinates");
        if (xs.size() < 2) continue;
        const auto id = e.at("entity_id").get<std::string>();
        content.outlet_scatter.push_back({id, label_of[id], xs[0].get<double>(), xs[1].get<double>()});
    }

    if (fs::exists(c.workdir / artifact::stats)) {
        report::Table outlets_table{"Outlet statistics",
                                    {"outlet", "label", "articles", "mention fraction", "words per article",
                                     "quoted fraction", "reaction rank"},
                                    {}};
        report::Table cat_table{"Category statistics (mean and standard error over outlets)",
                                {"category", "statistic", "mean", "stderr", "n"},
                                {}};
        for (const auto& r : read_jsonl(c.workdir / artifact::stats)) {
            if (r.at("kind") == "outlet")
                outlets_table.rows.push_back({cell(r.at("outlet_id")), cell(r.at("label")), cell(r.at("articles")),
                                              cell(r.at("mention_fraction")), cell(r.at("mean_article_words"), 1),
                                              cell(r.at("mean_quoted_fraction")), cell(r.at("reaction_rank_mean"))});
            else
                cat_table.rows.push_back({cell(r.at("category")), cell(r.at("statistic")), cell(r.at("mean")),
                                          cell(r.at("stderr")), cell(r.at("n"))});
        }
        content.tables.push_back(std::move(outlets_table));
        content.tables.push_back(std::move(cat_table));
    }
    if (fs::exists(c.workdir / artifact::surprise)) {
        report::Table t{"Surprise of B given A", {"A", "B", "M", "null mean", "null std", "surprise"}, {}};
        for (const auto& r : read_jsonl(c.workdir / artifact::surprise))
            t.rows.push_back({cell(r.at("A")), cell(r.at("B")), cell(r.at("m_original")), cell(r.at("m_null_mean")),
                              cell(r.at("m_null_std")), cell(r.at("surprise"), 2)});
        content.tables.push_back(std::move(t));
    }
    if (fs::exists(c.workdir / artifact::eval)) {
        const auto j = Json::parse(jsonl::read_text(c.workdir / artifact::eval));
        report::Table t{"Held-out prediction (test set)", {"method", "precision", "recall", "F1", "MCC"}, {}};
        auto row = [&](const std::string& name, const Json& r) {
            t.rows.push_back({name, cell(r.at("precision")), cell(r.at("recall")), cell(r.at("f1")), cell(r.at("mcc"))});
        };
        row("popularity", j.at("baselines").at("popularity"));
        row("popularity + propensity", j.at("baselines").at("popularity_propensity"));
        row("matrix completion (rank " + cell(j.at("model").at("rank")) + ")", j.at("model"));
        content.tables.push_back(std::move(t));
    }
    if (fs::exists(c.workdir / artifact::rankings)) {
        const auto j = Json::parse(jsonl::read_text(c.workdir / artifact::rankings));
        for (const auto& d : j.at("dimensions")) {
            report::Table t{"Outlets along latent dimension " + std::to_string(d.at("dimension").get<int>() + 1),
                            {"position", "outlet", "score"},
                            {}};
            for (const char* part : {"top", "middle", "bottom"})
                for (const auto& x : d.at(part)) t.rows.push_back({part, cell(x.at("outlet_id")), cell(x.at("score"))});
            content.tables.push_back(std::move(t));
        }
    }
    if (fs::exists(c.workdir / artifact::correlations)) {
        report::Table t{"Feature correlations with latent dimensions", {"feature", "dimension", "rho", "p-value", "n"}, {}};
        for (const auto& r : read_jsonl(c.workdir / artifact::correlations))
            t.rows.push_back({cell(r.at("feature")), std::to_string(r.at("dimension").get<int>() + 1), cell(r.at("rho")),
                              cell(r.at("p_value"), 6), cell(r.at("n"))});
        content.tables.push_back(std::move(t));
    }

    jsonl::write_text(c.workdir / artifact::report, report::render_html(content));
}

}  // namespace

void run_stage(Stage s, const PipelineConfig& c, Diagnostics& diag) {
    if (c.workdir.empty()) throw InputError("no workdir: set paths.workdir or pass --workdir");
    switch (s) {
        case Stage::Ingest: return run_ingest(c, diag);
        case Stage::Match: return run_match(c, diag);
        case Stage::Cluster: return run_cluster(c, diag);
        case Stage::Graph: return run_graph(c, diag);
        case Stage::Describe: return run_describe(c, diag);
        case Stage::Surprise: return run_surprise(c, diag);
        case Stage::Complete: return run_complete(c, diag);
        case Stage::Latent: return run_latent(c, diag);
        case Stage::Report: return run_report(c, diag);
    }
}

}  // namespace quotus::pipeline
