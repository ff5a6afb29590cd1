// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "quotus/align.hpp"
#include "quotus/bigraph.hpp"
#include "quotus/complete.hpp"
#include "quotus/dedup_cluster.hpp"
#include "quotus/latent.hpp"

using namespace quotus;
namespace fs = std::filesystem;
using Tokens = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

Tokens numbered(std::size_t n) {
    Tokens t;
    for (std::size_t k = 0; k < n; ++k) t.push_back("t" + std::to_string(k));
    return t;
}

// Substitutes `edits` interior tokens of a verbatim quote with unseen words.
Tokens substituted(const Tokens& text, std::size_t at, std::size_t n, std::size_t edits) {
    Tokens q(text.begin() + static_cast<std::ptrdiff_t>(at), text.begin() + static_cast<std::ptrdiff_t>(at + n));
    for (std::size_t k = 0; k < edits; ++k) q[1 + k] = "zz" + std::to_string(k);
    return q;
}

// 1 ----------------------------------------------------------------------

Outcome alignment_oracle() {
    std::mt19937_64 rng(101);
    align::AlignmentParams p;
    std::size_t mismatches = 0, accepted = 0;
    double impl_seconds = 0.0;
    const auto t_all = Clock::now();
    for (int trial = 0; trial < 500; ++trial) {
        const auto text = testing::random_words(rng, testing::uniform(rng, 1, 60), 15);
        const auto len = testing::uniform(rng, 1, std::min<std::size_t>(12, text.size()));
        const auto at = testing::uniform(rng, 0, text.size() - len);
        Tokens q(text.begin() + static_cast<std::ptrdiff_t>(at), text.begin() + static_cast<std::ptrdiff_t>(at + len));
        for (std::size_t e = 0, edits = testing::uniform(rng, 0, 4); e < edits; ++e) {
            const auto kind = testing::uniform(rng, 0, 2);
            const auto pos = testing::uniform(rng, 0, q.size() - 1);
            if (kind == 0) {
                q[pos] = "x" + std::to_string(testing::uniform(rng, 0, 30));
            } else if (kind == 1 && q.size() < 12) {
                q.insert(q.begin() + static_cast<std::ptrdiff_t>(pos), "x" + std::to_string(testing::uniform(rng, 0, 30)));
            } else if (kind == 2 && q.size() > 1) {
                q.erase(q.begin() + static_cast<std::ptrdiff_t>(pos));
            }
        }
        const auto t0 = Clock::now();
        const auto hit = align::substring_align(q, text, p);
        impl_seconds += seconds_since(t0);
        const auto want = oracle::best_window(q, text, p.gap_penalty, p.mismatch_penalty, p.match_score);
        const bool want_accept = want && want->score >= p.sim_threshold;
        if (want_accept) ++accepted;
        bool ok = bool(hit) == want_accept;
        if (ok && hit)
            ok = hit->score == want->score && hit->span.begin == want->begin && hit->span.end == want->end;
        if (!ok) ++mismatches;
    }
    const double total = seconds_since(t_all);
    return {mismatches == 0 && impl_seconds < 10.0,
            std::to_string(500 - mismatches) + "/500 decisions and scores equal (" + std::to_string(accepted) +
                " accepted), substring_align " + fmt(impl_seconds) + " s, with oracle " + fmt(total) + " s"};
}

// 2 ----------------------------------------------------------------------

Outcome threshold_boundary() {
    const auto text = numbered(60);
    align::AlignmentParams p;
    std::vector<std::size_t> failing;
    bool floor_ok = true;
    for (std::size_t n = 6; n <= 15; ++n) {
        const auto c = static_cast<std::size_t>(std::ceil(0.4 * static_cast<double>(n) - 1e-9));
        const bool at_ceil = bool(align::substring_align(substituted(text, 20, n, c), text, p));
        const bool past_ceil = bool(align::substring_align(substituted(text, 20, n, c + 1), text, p));
        if (!at_ceil || past_ceil) failing.push_back(n);
        const auto f = static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(n) + 1e-9));
        floor_ok = floor_ok && align::substring_align(substituted(text, 20, n, f), text, p) &&
                   !align::substring_align(substituted(text, 20, n, f + 1), text, p);
    }
    std::string detail;
    if (failing.empty()) {
        detail = "ceil(0.4|q|) accepted and one more rejected for |q| = 6..15";
    } else {
        detail = "ceil(0.4|q|) edits rejected for |q| =";
        for (auto n : failing) detail += " " + std::to_string(n);
        detail += " (score -ceil(0.4|q|)/|q| < -0.4 there); floor(0.4|q|) boundary ";
        detail += floor_ok ? "holds for all |q|" : "also fails";
    }
    return {failing.empty(), detail};
}

// 3 ----------------------------------------------------------------------

align::QuoteMatch span_match(const std::string& id, std::int64_t b, std::int64_t e, const std::string& tr = "t") {
    align::QuoteMatch m;
    m.occurrence_id = id;
    m.article_id = id;
    m.outlet_id = "o";
    m.transcript_id = tr;
    m.span = {b, e};
    return m;
}

Outcome clustering() {
    const auto chain = cluster::cluster_matches(
        std::vector{span_match("a", 0, 10), span_match("b", 8, 18), span_match("c", 16, 26)});
    const auto four = cluster::cluster_matches(std::vector{span_match("a", 10, 20), span_match("b", 16, 26)});
    const auto five = cluster::cluster_matches(
        std::vector{span_match("a", 0, 10), span_match("b", 5, 15), span_match("c", 10, 20)});

    std::mt19937_64 rng(303);
    std::vector<align::QuoteMatch> ms;
    for (int k = 0; k < 80; ++k) {
        const auto b = static_cast<std::int64_t>(testing::uniform(rng, 0, 300));
        ms.push_back(span_match("m" + std::to_string(k), b, b + static_cast<std::int64_t>(testing::uniform(rng, 6, 16)),
                                "t" + std::to_string(testing::uniform(rng, 0, 2))));
    }
    const auto base = cluster::cluster_matches(ms);
    int stable = 0;
    for (int p = 0; p < 20; ++p) {
        std::shuffle(ms.begin(), ms.end(), rng);
        if (cluster::cluster_matches(ms) == base) ++stable;
    }

    const bool chain_ok = chain.size() == 1;
    const bool four_ok = four.size() == 2;
    const bool perm_ok = stable == 20;
    std::string detail = "chain [0,10),[8,18),[16,26) -> " + std::to_string(chain.size()) + " cluster(s)";
    if (!chain_ok) detail += " (neighbours share 2 tokens, below the 5-token rule)";
    detail += "; 4-token overlap -> " + std::to_string(four.size()) + " clusters";
    detail += "; 5-token chain [0,10),[5,15),[10,20) -> " + std::to_string(five.size()) + " cluster(s)";
    detail += "; " + std::to_string(stable) + "/20 permutations identical";
    return {chain_ok && four_ok && perm_ok, detail};
}

// 4 ----------------------------------------------------------------------

bigraph::BipartiteGraph random_graph(std::mt19937_64& rng, std::size_t outlets, std::size_t clusters, double p) {
    bigraph::BipartiteGraph::EdgeList edges;
    for (std::uint32_t u = 0; u < outlets; ++u)
        for (std::uint32_t v = 0; v < clusters; ++v)
            if (testing::uniform_real(rng) < p) edges.emplace_back(u, v);
    return bigraph::BipartiteGraph(outlets, clusters, edges);
}

Outcome rewiring() {
    bool degrees_ok = true;
    double overlap_sum = 0.0;
    std::size_t edge_sum = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(400 + seed);
        const auto g = random_graph(rng, 50, 500, 0.04);
        const auto r = bigraph::rewire(g, 10 * g.num_edges(), seed);
        degrees_ok = degrees_ok && r.outlet_degrees() == g.outlet_degrees() && r.cluster_degrees() == g.cluster_degrees();
        std::vector<std::pair<std::uint32_t, std::uint32_t>> common;
        std::set_intersection(g.edges().begin(), g.edges().end(), r.edges().begin(), r.edges().end(),
                              std::back_inserter(common));
        overlap_sum += static_cast<double>(common.size()) / static_cast<double>(g.num_edges());
        edge_sum += g.num_edges();
    }
    const double overlap = overlap_sum / 10.0;
    return {degrees_ok && overlap < 0.6,
            std::string("degree sequences ") + (degrees_ok ? "preserved" : "CHANGED") + " on 10 seeds (mean |E| " +
                std::to_string(edge_sum / 10) + "), mean edge overlap " + fmt(overlap)};
}

// 5 ----------------------------------------------------------------------

Outcome surprise_calibration() {
    const auto t0 = Clock::now();
    std::vector<double> null_s;
    std::size_t degenerate = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(500 + trial);
        const auto g = random_graph(rng, 40, 150, 0.06);
        std::vector<std::size_t> order(40);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        bigraph::CategoryAssignment cats(40);
        const int a = cats.category("A"), b = cats.category("B");
        for (std::size_t k = 0; k < 12; ++k) cats.assign(order[k], a);
        for (std::size_t k = 12; k < 24; ++k) cats.assign(order[k], b);
        try {
            null_s.push_back(bigraph::surprise(g, cats, a, b, {100, 0, 7000 + trial * 1000}).surprise);
        } catch (const std::exception&) {
            ++degenerate;
        }
    }
    double mean = 0.0, sd = 0.0;
    for (double s : null_s) mean += s / static_cast<double>(null_s.size());
    for (double s : null_s) sd += (s - mean) * (s - mean);
    sd = std::sqrt(sd / static_cast<double>(null_s.size() - 1));

    // Planted: A and B outlets cite half of the clusters at 3x the rate of the
    // other half, the remaining outlets the reverse, so cluster degrees match.
    int planted_hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(900 + seed);
        const std::size_t n_out = 60, n_cl = 300;
        bigraph::CategoryAssignment cats(n_out);
        const int a = cats.category("A"), b = cats.category("B");
        for (std::size_t u = 0; u < 15; ++u) cats.assign(u, a);
        for (std::size_t u = 15; u < 30; ++u) cats.assign(u, b);
        bigraph::BipartiteGraph::EdgeList edges;
        const double base = 0.03;
        for (std::uint32_t v = 0; v < n_cl; ++v) {
            const bool joint = v % 2 == 0;
            for (std::uint32_t u = 0; u < n_out; ++u) {
                const double p = joint == (u < 30) ? 3.0 * base : base;
                if (testing::uniform_real(rng) < p) edges.emplace_back(u, v);
            }
        }
        const bigraph::BipartiteGraph g(n_out, n_cl, edges);
        if (bigraph::surprise(g, cats, a, b, {100, 0, 20000 + seed * 1000}).surprise > 2.0) ++planted_hits;
    }
    const double secs = seconds_since(t0);
    const bool ok = degenerate == 0 && mean >= -0.3 && mean <= 0.3 && sd >= 0.7 && sd <= 1.4 && planted_hits >= 19 &&
                    secs < 120.0;
    return {ok, "null mean " + fmt(mean) + ", sd " + fmt(sd) + " over " + std::to_string(null_s.size()) +
                    " trials; planted S > 2 in " + std::to_string(planted_hits) + "/20 seeds; " + fmt(secs) + " s"};
}

// 6 ----------------------------------------------------------------------

double fixed_point_residual(const complete::QuoteMatrix& m, const complete::CompletionModel& model) {
    const complete::Matrix mask = m.dense_mask();
    const complete::Matrix z = model.dense();
    const complete::Matrix filled =
        mask.cwiseProduct(m.dense_normalized()) + (complete::Matrix::Ones(z.rows(), z.cols()) - mask).cwiseProduct(z);
    return (oracle::soft_threshold_svd(filled, model.lambda) - z).norm();
}

Outcome solver() {
    // Two distinct overlapping row patterns: a rank-2 binary matrix.
    std::vector<complete::Cell> pos;
    for (std::uint32_t i = 0; i < 30; ++i)
        for (std::uint32_t j = 0; j < 40; ++j)
            if (i % 2 == 0 ? j < 25 : j >= 15) pos.push_back({i, j});
    const auto built = complete::build_matrix(30, 40, pos, 360, 606);
    const auto& m = built.matrix;

    complete::SoftImputeParams p;
    p.lambda = 0.5;
    p.max_rank = 30;
    p.max_iters = 20000;
    p.tol = 1e-15;
    const auto model = complete::soft_impute(m, p);
    const complete::Matrix want = oracle::proximal_gradient(m.dense_normalized(), m.dense_mask(), p.lambda);
    const double dist = (model.dense() - want).norm();
    bool monotone = true;
    for (std::size_t k = 1; k < model.objective.size(); ++k)
        monotone = monotone && model.objective[k] <= model.objective[k - 1] + 1e-10;
    const double residual = fixed_point_residual(m, model);

    const double sigma = complete::max_singular_value(m);
    auto zp = p;
    zp.lambda = sigma;
    const auto zero = complete::soft_impute(m, zp);
    const bool zero_ok = zero.rank() == 0 && zero.dense().norm() == 0.0 &&
                         oracle::soft_threshold_svd(m.dense_normalized(), sigma * (1 + 1e-12)).norm() == 0.0;

    const bool ok = dist <= 1e-4 && monotone && zero_ok && residual < 1e-6;
    return {ok, "||Z - Z_oracle||_F = " + fmt(dist) + " (rank " + std::to_string(model.rank()) + ", " +
                    std::to_string(model.iterations) + " iterations), objective " +
                    (monotone ? "non-increasing" : "INCREASED") + ", lambda = sigma_max gives " +
                    (zero_ok ? "zero" : "NONZERO") + ", fixed-point residual " + fmt(residual)};
}

// 7 ----------------------------------------------------------------------

struct LiftRun {
    double completion = 0.0;
    double baseline = 0.0;
    double positive_rate = 0.0;
};

LiftRun predictive_lift_seed(std::uint64_t seed) {
    const std::size_t rows = 100, cols = 2000, rank = 3;
    std::mt19937_64 rng(700 + seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    complete::Matrix u(rows, rank), v(cols, rank);
    for (auto& x : u.reshaped()) x = normal(rng);
    for (auto& x : v.reshaped()) x = normal(rng);
    const complete::Matrix logits = 1.2 * u * v.transpose();

    // Offset giving a 2% mean citation probability.
    auto mean_prob = [&](double offset) {
        return (1.0 / (1.0 + (-(logits.array() + offset)).exp())).mean();
    };
    double lo = -30.0, hi = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_prob(mid) < 0.02 ? lo : hi) = mid;
    }
    const double offset = 0.5 * (lo + hi);

    std::vector<complete::Cell> pos;
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j)
            if (testing::uniform_real(rng) < 1.0 / (1.0 + std::exp(-(logits(i, j) + offset)))) pos.push_back({i, j});
    const auto built = complete::build_matrix(rows, cols, pos, 20000, 7700 + seed);

    complete::SoftImputeParams base;
    base.max_rank = 20;
    base.max_iters = 300;
    base.tol = 1e-7;
    base.seed = seed;
    const auto grid = complete::lambda_grid(complete::max_singular_value(built.matrix, seed), 10);
    const auto tuned = complete::tune_lambda(built.matrix, grid, base, built.split.dev, built.split.test);
    const auto baseline = complete::tune_and_evaluate(
        complete::baseline_scores(complete::compute_baselines(built.matrix), complete::BaselineMode::PopularityPropensity),
        built.split.dev, built.split.test);
    return {tuned.test.mcc, baseline.mcc, static_cast<double>(pos.size()) / static_cast<double>(rows * cols)};
}

Outcome predictive_lift() {
    const auto t0 = Clock::now();
    int wins = 0;
    std::string runs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = predictive_lift_seed(seed);
        const bool win = r.completion > 0.0 && r.completion >= 1.5 * r.baseline;
        wins += win;
        runs += (seed ? "; " : "") + fmt(r.completion) + " vs " + fmt(r.baseline) + " (" + fmt(100 * r.positive_rate, 2) +
                "% pos)";
    }
    const double secs = seconds_since(t0);
    return {wins >= 4 && secs < 300.0, std::to_string(wins) + "/5 seeds at >= 1.5x baseline MCC [" + runs + "]; " +
                                           fmt(secs) + " s"};
}

// 8 ----------------------------------------------------------------------

Outcome latent_recovery() {
    const std::vector<std::size_t> out_sizes{15, 20, 25}, cl_sizes{150, 150, 150};
    bool all_pure = true;
    std::string purity;
    double projection_err = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(800 + seed);
        std::vector<int> out_block, cl_block;
        for (int b = 0; b < 3; ++b) {
            out_block.insert(out_block.end(), out_sizes[b], b);
            cl_block.insert(cl_block.end(), cl_sizes[b], b);
        }
        std::vector<complete::Cell> pos;
        for (std::uint32_t i = 0; i < out_block.size(); ++i)
            for (std::uint32_t j = 0; j < cl_block.size(); ++j)
                if (testing::uniform_real(rng) < (out_block[i] == cl_block[j] ? 0.3 : 0.03)) pos.push_back({i, j});
        const complete::QuoteMatrix m(out_block.size(), cl_block.size(), pos, {});
        const auto ls = latent::decompose(m, 3);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < out_block.size(); ++i) ids.push_back("o" + std::to_string(1000 + i));

        // Every pair of blocks must lie on opposite sides of zero on some leading dimension.
        std::vector<std::vector<int>> sign(3, std::vector<int>(3, 0));  // [block][dim]: +1, -1, or 0 if mixed
        for (std::size_t d = 0; d < 3; ++d) {
            const auto ranked = latent::rank_outlets(ls, d, ids);
            std::vector<std::set<int>> seen(3);
            for (const auto& r : ranked) {
                const auto i = static_cast<std::size_t>(std::stoi(r.outlet_id.substr(1)) - 1000);
                seen[out_block[i]].insert(r.score > 0 ? 1 : r.score < 0 ? -1 : 0);
            }
            for (int b = 0; b < 3; ++b) sign[b][d] = seen[b].size() == 1 ? *seen[b].begin() : 0;
        }
        int separated = 0;
        for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y) {
                bool any = false;
                for (int d = 0; d < 3; ++d) any = any || (sign[x][d] != 0 && sign[x][d] == -sign[y][d]);
                separated += any;
            }
        all_pure = all_pure && separated == 3;
        purity += (seed ? " " : "") + std::to_string(separated) + "/3";

        complete::Matrix raw(4, static_cast<Eigen::Index>(cl_block.size()));
        for (auto& x : raw.reshaped()) x = testing::uniform_real(rng);
        const auto f = latent::make_feature_matrix("random", {"a", "b", "c", "d"}, raw);
        const complete::Matrix l = latent::project_features(f, ls);
        projection_err = std::max(projection_err, (l * ls.S.asDiagonal() - f.F * ls.V).cwiseAbs().maxCoeff());
    }

    std::mt19937_64 rng(888);
    double spearman_err = 0.0;
    int compared = 0;
    while (compared < 1000) {
        const auto n = testing::uniform(rng, 3, 60);
        std::vector<double> x, y;
        for (std::size_t k = 0; k < n; ++k) {
            x.push_back(static_cast<double>(testing::uniform(rng, 0, 9)));
            y.push_back(testing::uniform(rng, 0, 1) ? testing::uniform_real(rng) : static_cast<double>(testing::uniform(rng, 0, 4)));
        }
        auto constant = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
        };
        if (constant(x) || constant(y)) continue;
        spearman_err = std::max(spearman_err, std::abs(latent::spearman(x, y).rho - oracle::spearman(x, y)));
        ++compared;
    }
    const bool ok = all_pure && projection_err <= 1e-10 && spearman_err <= 1e-12;
    return {ok, "block pairs separated by sign per seed: " + purity + "; max |L S - F V| = " + fmt(projection_err) +
                    "; max Spearman error " + fmt(spearman_err) + " on 1000 pairs"};
}

// 9 ----------------------------------------------------------------------

int run_all(const fs::path& config, const fs::path& log) {
    const std::string cmd = std::string("\"") + QUOTUS_BIN + "\" all --config \"" + config.string() + "\" >\"" +
                            log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
    std::vector<nlohmann::json> out;
    std::istringstream in(testing::read_file(p));
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(nlohmann::json::parse(line));
    return out;
}

Outcome end_to_end() {
    const fs::path fixture = fs::path(QUOTUS_FIXTURES) / "mini";
    testing::TempDir a("accept"), b("accept");
    for (const auto* dir : {&a, &b})
        for (const auto& e : fs::directory_iterator(fixture)) fs::copy_file(e.path(), *dir / e.path().filename().string());

    const auto t0 = Clock::now();
    const int code_a = run_all(a / "config.json", a / "log.txt");
    const int code_b = run_all(b / "config.json", b / "log.txt");
    const double secs = seconds_since(t0);
    if (code_a != 0 || code_b != 0)
        return {false, "quotus all exited with " + std::to_string(code_a) + "/" + std::to_string(code_b) + ": " +
                           testing::read_file(a / "log.txt")};

    std::size_t files = 0, differing = 0;
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a / "work")) names_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b / "work")) names_b.insert(e.path().filename().string());
    for (const auto& name : names_a) {
        ++files;
        if (!names_b.count(name) ||
            testing::read_file(a / "work" / name) != testing::read_file(b / "work" / name))
            ++differing;
    }
    const bool identical = differing == 0 && names_a == names_b;

    const auto expected = nlohmann::json::parse(testing::read_file(fixture / "expected.json"));
    const fs::path work = a / "work";
    const auto inputs_ok = read_jsonl(fixture / "transcripts.jsonl").size() >= 5 &&
                           read_jsonl(fixture / "articles.jsonl").size() >= 200 &&
                           read_jsonl(fixture / "outlets.jsonl").size() >= 12;

    std::set<std::tuple<std::string, std::string, std::int64_t, std::int64_t>> got_clusters, want_clusters;
    for (const auto& c : read_jsonl(work / "clusters.jsonl"))
        got_clusters.emplace(c["cluster_id"], c["transcript_id"], c["span_start"], c["span_end"]);
    for (const auto& c : expected["clusters"])
        want_clusters.emplace(c["cluster_id"], c["transcript_id"], c["span_start"], c["span_end"]);

    std::set<std::tuple<std::string, std::string, std::string>> got_edges, want_edges;
    for (const auto& e : read_jsonl(work / "edges.jsonl")) got_edges.emplace(e["outlet_id"], e["cluster_id"], e["timestamp"]);
    for (const auto& e : expected["edges"]) want_edges.emplace(e["outlet_id"], e["cluster_id"], e["timestamp"]);

    std::set<std::pair<std::string, std::string>> got_dropped, want_dropped;
    for (const auto& d : read_jsonl(work / "dropped.jsonl")) got_dropped.emplace(d["dropped_id"], d["kept_id"]);
    for (const auto& d : expected["dropped"]) want_dropped.emplace(d["dropped_id"], d["kept_id"]);

    const auto tracks = nlohmann::json::parse(testing::read_file(work / "token_volume.json"))["tracks"];
    const bool tracks_ok = tracks == expected["tracks"];

    const bool counts_ok = got_clusters == want_clusters && got_edges == want_edges && got_dropped == want_dropped;
    return {identical && inputs_ok && counts_ok && tracks_ok,
            std::to_string(files - differing) + "/" + std::to_string(files) + " artifacts byte-identical; clusters " +
                std::to_string(got_clusters.size()) + "/" + std::to_string(want_clusters.size()) + ", edges " +
                std::to_string(got_edges.size()) + "/" + std::to_string(want_edges.size()) + ", drops " +
                std::to_string(got_dropped.size()) + "/" + std::to_string(want_dropped.size()) +
                (counts_ok ? " match" : " DIFFER") + ", token-volume tracks " + (tracks_ok ? "match" : "DIFFER") +
                "; two runs " + fmt(secs) + " s"};
}

// 10 ---------------------------------------------------------------------

Outcome metric_oracle() {
    std::mt19937_64 rng(1010);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = testing::uniform(rng, 1, 300);
        const double rate = testing::uniform_real(rng);
        std::vector<double> scores;
        std::vector<std::uint8_t> labels;
        std::vector<int> pred, lab;
        for (std::size_t k = 0; k < n; ++k) {
            scores.push_back(testing::uniform_real(rng));
            labels.push_back(testing::uniform_real(rng) < rate);
            pred.push_back(scores.back() >= 0.5);
            lab.push_back(labels.back());
        }
        const auto r = complete::evaluate(scores, labels, 0.5);
        const auto o = oracle::metrics(pred, lab);
        for (auto [x, y] : {std::pair{r.precision, o.precision}, {r.recall, o.recall}, {r.f1, o.f1}, {r.mcc, o.mcc}})
            worst = std::max(worst, std::abs(x - y));
    }
    return {worst <= 1e-12, "max |difference| " + fmt(worst) + " over 1000 vectors"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"alignment oracle equivalence", alignment_oracle},
        {"threshold boundary", threshold_boundary},
        {"clustering", clustering},
        {"rewiring", rewiring},
        {"surprise calibration", surprise_calibration},
        {"solver correctness", solver},
        {"predictive lift", predictive_lift},
        {"latent recovery", latent_recovery},
        {"end-to-end determinism", end_to_end},
        {"metric oracle", metric_oracle},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << k + 1 << "] " << criteria[k].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures ? 1 : 0;
}
