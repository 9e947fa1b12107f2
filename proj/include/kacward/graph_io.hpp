#pragma once

// Text formats for embedded graphs and coupling files. Graph files may carry
// dual positions and rhombus half-angles.
//
// Graph file:
//
//     vertices <count>
//     <id> <re> <im>
//     edges <count>
//     <id_a> <id_b> [theta]
//     faces <count>
//     <k> <v_1> ... <v_k>            counterclockwise, bounded faces only
//     dual_vertices <count>          optional
//     <face_index> <re> <im>
//
// Blank lines and lines starting with '#' are ignored. Sections appear in
// this order; `theta` is either given on every edge or on none.

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kacward/errors.hpp"
#include "kacward/isoradial.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"

namespace kacward {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct GraphFile {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<FaceCycle> faces;
    std::map<std::size_t, Point> dual_positions;
    std::map<Edge, double> theta;

    bool has_dual() const { return !dual_positions.empty(); }
    bool has_theta() const { return !theta.empty(); }
};

inline GraphFile parse_graph(std::istream& in) {
    GraphFile out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + msg);
    };
    enum class Section { None, Vertices, Edges, Faces, Dual };
    Section section = Section::None;
    std::size_t pending = 0;
    int order = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string head;
        if (!(ss >> head) || head[0] == '#') continue;
        if (pending == 0) {
            static const std::map<std::string, std::pair<Section, int>> kSections = {
                {"vertices", {Section::Vertices, 1}},
                {"edges", {Section::Edges, 2}},
                {"faces", {Section::Faces, 3}},
                {"dual_vertices", {Section::Dual, 4}},
            };
            auto it = kSections.find(head);
            if (it == kSections.end()) fail("expected a section header, got '" + head + "'");
            if (it->second.second <= order) fail("section '" + head + "' out of order");
            order = it->second.second;
            section = it->second.first;
            if (!(ss >> pending)) fail("section '" + head + "' needs a count");
            continue;
        }
        std::istringstream row(line);
        switch (section) {
            case Section::Vertices: {
                Vertex v{};
                double re = 0, im = 0;
                if (!(row >> v.id >> re >> im)) fail("vertex row needs id re im");
                v.position = {re, im};
                out.vertices.push_back(v);
                break;
            }
            case Section::Edges: {
                Edge e{};
                if (!(row >> e.a >> e.b)) fail("edge row needs two vertex ids");
                std::string token;
                if (row >> token) {
                    std::istringstream ts(token);
                    double t = 0;
                    if (!(ts >> t) || !ts.eof()) fail("bad theta '" + token + "'");
                    out.theta[Edge::of(e.a, e.b)] = t;
                }
                out.edges.push_back(e);
                break;
            }
            case Section::Faces: {
                std::size_t k = 0;
                if (!(row >> k)) fail("face row needs a length");
                FaceCycle cycle(k);
                for (auto& v : cycle) {
                    if (!(row >> v)) fail("face row shorter than its declared length");
                }
                out.faces.push_back(std::move(cycle));
                break;
            }
            case Section::Dual: {
                std::size_t f = 0;
                double re = 0, im = 0;
                if (!(row >> f >> re >> im)) fail("dual vertex row needs face re im");
                out.dual_positions[f] = {re, im};
                break;
            }
            case Section::None: fail("data outside a section");
        }
        std::string extra;
        if (row >> extra) fail("trailing data '" + extra + "'");
        --pending;
    }
    if (pending > 0) fail("section ended with " + std::to_string(pending) + " rows missing");
    if (!out.theta.empty() && out.theta.size() != out.edges.size()) {
        throw Error(ErrorCode::ParseError, "theta given on some edges but not all");
    }
    return out;
}

inline GraphFile load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return parse_graph(in);
}

inline EmbeddedGraph to_graph(const GraphFile& file) { return build_graph(file.vertices, file.edges, file.faces); }

inline void write_graph(std::ostream& out, const EmbeddedGraph& g, const std::map<std::size_t, Point>& dual_positions = {},
                        const std::map<Edge, double>& theta = {}) {
    out << "vertices " << g.num_vertices() << '\n';
    for (const Vertex& v : g.vertices()) {
        out << v.id << ' ' << format_double(v.position.real()) << ' ' << format_double(v.position.imag()) << '\n';
    }
    out << "edges " << g.num_edges() << '\n';
    for (const Edge& e : g.edges()) {
        out << e.a << ' ' << e.b;
        if (auto it = theta.find(e); it != theta.end()) out << ' ' << format_double(it->second);
        out << '\n';
    }
    out << "faces " << g.faces().size() << '\n';
    for (const FaceCycle& f : g.faces()) {
        out << f.size();
        for (VertexId v : f) out << ' ' << v;
        out << '\n';
    }
    if (!dual_positions.empty()) {
        out << "dual_vertices " << dual_positions.size() << '\n';
        for (const auto& [f, p] : dual_positions) {
            out << f << ' ' << format_double(p.real()) << ' ' << format_double(p.imag()) << '\n';
        }
    }
}

/// Serializes an isoradial graph with circumcenters for every face and the
/// per-edge half-angle annotation.
inline void write_isoradial(std::ostream& out, const IsoradialGraph& g) {
    std::map<std::size_t, Point> centers;
    for (const Vertex& v : g.dual.graph().vertices()) centers.emplace(static_cast<std::size_t>(v.id), v.position);
    // Faces without a dual edge still get their circumcenter.
    for (std::size_t f = 0; f < g.graph->faces().size(); ++f) {
        if (centers.contains(f)) continue;
        const auto poly = g.graph->face_polygon(f);
        centers.emplace(f, detail::circumcenter(poly[0], poly[1], poly[2]));
    }
    write_graph(out, *g.graph, centers, g.theta);
}

/// Rebuilds an isoradial graph from a file carrying theta annotations.
inline IsoradialGraph isoradial_from_file(const GraphFile& file) {
    if (!file.has_theta()) throw Error(ErrorCode::ParseError, "graph file has no theta annotation");
    auto graph = share(to_graph(file));
    auto dual = make_dual(graph, file.dual_positions);
    double k = INFINITY, K = 0.0;
    std::map<Edge, double> theta;
    for (const auto& [e, t] : file.theta) {
        theta.emplace(e, t);
        k = std::min(k, t);
        K = std::max(K, t);
    }
    return IsoradialGraph{std::move(graph), std::move(theta), std::move(dual), k, K};
}

/// Couplings file: `couplings <count>` followed by `<id_a> <id_b> <J>` rows.
inline std::map<Edge, double> parse_couplings(std::istream& in) {
    std::map<Edge, double> out;
    std::string line;
    std::size_t line_no = 0, pending = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string head;
        if (!(ss >> head) || head[0] == '#') continue;
        if (!header) {
            if (head != "couplings" || !(ss >> pending)) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'couplings <count>'");
            }
            header = true;
            continue;
        }
        std::istringstream row(line);
        VertexId a = 0, b = 0;
        double j = 0;
        if (pending == 0 || !(row >> a >> b >> j)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad coupling row");
        }
        out[Edge::of(a, b)] = j;
        --pending;
    }
    if (!header || pending > 0) throw Error(ErrorCode::ParseError, "incomplete couplings file");
    return out;
}

/// Row-major dump, one row per line, entries as "re im" pairs.
inline void dump_matrix(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k > 0) out << "  ";
            out << format_double(m(i, k).real()) << ' ' << format_double(m(i, k).imag());
        }
        out << '\n';
    }
}

}  // namespace kacward
