#include "quotus/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace quotus::report {

TokenVolumeTrack token_volume(const std::string& transcript_id, std::size_t num_tokens,
                              std::span<const cluster::QuoteCluster> clusters, std::span<const cluster::Edge> edges,
                              const std::map<std::string, std::string>& category_of) {
    TokenVolumeTrack track{transcript_id, std::vector<std::uint32_t>(num_tokens, 0), {}};
    std::set<std::string> names;
    for (const auto& [outlet, cat] : category_of) names.insert(cat);
    for (const auto& name : names) track.by_category.emplace(name, std::vector<std::uint32_t>(num_tokens, 0));

    std::map<std::string, TokenSpan> span_of;
    for (const auto& c : clusters)
        if (c.transcript_id == transcript_id) span_of.emplace(c.id, c.span);

    const auto n = static_cast<std::int64_t>(num_tokens);
    for (const auto& e : edges) {
        auto it = span_of.find(e.cluster_id);
        if (it == span_of.end()) continue;
        const auto lo = std::clamp<std::int64_t>(it->second.begin, 0, n);
        const auto hi = std::clamp<std::int64_t>(it->second.end, 0, n);
        std::vector<std::uint32_t>* cat = nullptr;
        if (auto c = category_of.find(e.outlet_id); c != category_of.end()) cat = &track.by_category.at(c->second);
        for (auto k = lo; k < hi; ++k) {
            ++track.overall[static_cast<std::size_t>(k)];
            if (cat) ++(*cat)[static_cast<std::size_t>(k)];
        }
    }
    return track;
}

std::map<std::string, std::string> label_categories(std::span<const corpus::Outlet> outlets) {
    std::map<std::string, std::string> out;
    for (const auto& o : outlets)
        if (o.label != corpus::OutletLabel::Unlabeled) out.emplace(o.id, std::string(corpus::to_string(o.label)));
    return out;
}

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string format_number(double value, int digits) {
    if (!std::isfinite(value)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos) s = digits > 0 ? "0." + std::string(digits, '0') : "0";
    return s;
}

namespace {

const char* color_for(const std::string& group) {
    if (group == "dC") return "#b2182b";
    if (group == "sC") return "#ef8a62";
    if (group == "sL") return "#67a9cf";
    if (group == "dL") return "#2166ac";
    return "#777777";
}

constexpr const char* kStyle = R"(body{font-family:sans-serif;margin:2em;color:#222}
h1{font-size:1.5em}h2{font-size:1.2em;margin-top:2em}
table{border-collapse:collapse;margin:0.5em 0;font-size:0.9em}
td,th{border:1px solid #ccc;padding:2px 6px;text-align:left;vertical-align:top}
th{background:#f0f0f0}.legend span{margin-right:1em}svg{background:#fafafa;border:1px solid #ddd}
)";

void render_table(std::string& html, const Table& t) {
    html += "<h2>" + escape_html(t.title) + "</h2>\n<table>\n<tr>";
    for (const auto& h : t.header) html += "<th>" + escape_html(h) + "</th>";
    html += "</tr>\n";
    for (const auto& row : t.rows) {
        html += "<tr>";
        for (const auto& cell : row) html += "<td>" + escape_html(cell) + "</td>";
        html += "</tr>\n";
    }
    html += "</table>\n";
}

void render_track(std::string& html, const TokenVolumeTrack& t) {
    constexpr double width = 900, height = 160;
    const auto n = t.overall.size();
    std::uint32_t peak = 1;
    for (auto v : t.overall) peak = std::max(peak, v);
    html += "<h3>" + escape_html(t.transcript_id) + " (" + std::to_string(n) + " tokens, peak " +
            std::to_string(peak) + ")</h3>\n";
    html += "<svg width=\"900\" height=\"160\" viewBox=\"0 0 900 160\">\n";
    auto polyline = [&](const std::vector<std::uint32_t>& ys, const char* color) {
        html += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"";
        html += color;
        html += "\" points=\"";
        for (std::size_t k = 0; k < n; ++k) {
            const double x = n > 1 ? width * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
            const double y = height - 5 - (height - 10) * ys[k] / peak;
            html += format_number(x, 1) + "," + format_number(y, 1) + " ";
        }
        html += "\"/>\n";
    };
    polyline(t.overall, "#000000");
    for (const auto& [name, ys] : t.by_category) polyline(ys, color_for(name));
    html += "</svg>\n";
}

void render_scatter(std::string& html, std::span<const Point> points) {
    constexpr double size = 500, pad = 30;
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const double span_x = hi_x > lo_x ? hi_x - lo_x : 1.0;
    const double span_y = hi_y > lo_y ? hi_y - lo_y : 1.0;
    auto sx = [&](double x) { return pad + (size - 2 * pad) * (x - lo_x) / span_x; };
    auto sy = [&](double y) { return size - pad - (size - 2 * pad) * (y - lo_y) / span_y; };
    html += "<svg width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n";
    html += "<line x1=\"" + format_number(sx(0), 1) + "\" y1=\"0\" x2=\"" + format_number(sx(0), 1) +
            "\" y2=\"500\" stroke=\"#ccc\"/>\n";
    html += "<line x1=\"0\" y1=\"" + format_number(sy(0), 1) + "\" x2=\"500\" y2=\"" + format_number(sy(0), 1) +
            "\" stroke=\"#ccc\"/>\n";
    for (const auto& p : points) {
        html += "<circle r=\"4\" cx=\"" + format_number(sx(p.x), 1) + "\" cy=\"" + format_number(sy(p.y), 1) +
                "\" fill=\"" + color_for(p.group) + "\"><title>" + escape_html(p.id) + " (" + escape_html(p.group) +
                ")</title></circle>\n";
    }
    html += "</svg>\n";
}

void render_legend(std::string& html) {
    html += "<p class=\"legend\">";
    for (const char* g : {"dC", "sC", "sL", "dL", "unlabeled"})
        html += std::string("<span style=\"color:") + color_for(g) + "\">&#9632; " + g + "</span>";
    html += "<span>&#9632; all outlets</span></p>\n";
}

}  // namespace

std::string render_html(const ReportContent& c) {
    std::string html = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" +
                       escape_html(c.title) + "</title>\n<style>\n" + kStyle + "</style>\n</head>\n<body>\n";
    html += "<h1>" + escape_html(c.title) + "</h1>\n";

    html += "<h2>Token volume</h2>\n";
    render_legend(html);
    for (const auto& t : c.tracks) render_track(html, t);

    if (!c.outlet_scatter.empty()) {
        html += "<h2>Outlets in the latent space (dimensions 1 and 2)</h2>\n";
        render_scatter(html, c.outlet_scatter);
    }

    for (const auto& t : c.tables) render_table(html, t);

    html += "<h2>Quote clusters</h2>\n";
    for (const auto& cl : c.clusters) {
        html += "<h3>" + escape_html(cl.cluster_id) + " (" + std::to_string(cl.citing_outlets) +
                " outlets)</h3>\n<p>" + escape_html(cl.transcript_text) + "</p>\n<table>\n<tr><th>variant</th><th>occurrences</th></tr>\n";
        for (const auto& [text, count] : cl.variants)
            html += "<tr><td>" + escape_html(text) + "</td><td>" + std::to_string(count) + "</td></tr>\n";
        html += "</table>\n";
    }
    html += "</body>\n</html>\n";
    return html;
}

}  // namespace quotus::report
