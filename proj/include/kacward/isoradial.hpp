#pragma once

// Isoradial graphs with unit circumradius: regular-lattice generators,
// rhombic-tiling input, rhombus half-angles and self-dual Z-invariant
// couplings tanh J_e = tan(theta_e / 2).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kacward/errors.hpp"
#include "kacward/ising.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"

namespace kacward {

struct IsoradialGraph {
    GraphPtr graph;
    std::map<Edge, double> theta;  // rhombus half-angle per primal edge
    DualEmbedding dual;
    double k = 0.0;  // measured min theta
    double K = 0.0;  // measured max theta

    Subtiling subtiling() const { return full_subtiling(graph); }

    /// Half-angle of the dual edge e*, pi/2 - theta_e.
    double dual_theta(Edge dual_edge) const { return std::numbers::pi / 2 - theta.at(dual.primal_edge(dual_edge)); }
};

namespace detail {

inline constexpr double kIsoradialTol = 1e-9;

struct PointKey {
    long long x;
    long long y;
    auto operator<=>(const PointKey&) const = default;
};

inline PointKey key_of(Point p) { return {std::llround(p.real() * 1e8), std::llround(p.imag() * 1e8)}; }

inline Point circumcenter(Point a, Point b, Point c) {
    const double d = 2.0 * (a.real() * (b.imag() - c.imag()) + b.real() * (c.imag() - a.imag()) +
                            c.real() * (a.imag() - b.imag()));
    const double ux = (std::norm(a) * (b.imag() - c.imag()) + std::norm(b) * (c.imag() - a.imag()) +
                       std::norm(c) * (a.imag() - b.imag())) / d;
    const double uy = (std::norm(a) * (c.real() - b.real()) + std::norm(b) * (a.real() - c.real()) +
                       std::norm(c) * (b.real() - a.real())) / d;
    return {ux, uy};
}

}  // namespace detail

/// Assembles an isoradial graph from face polygons whose vertices all lie on
/// circles of radius 1 around a circumcenter inside the face. Vertex ids are
/// assigned row by row (increasing Im, then Re).
inline IsoradialGraph isoradial_from_faces(std::vector<std::vector<Point>> polygons) {
    std::map<std::pair<long long, long long>, Point> unique;
    for (auto& poly : polygons) {
        if (geometry::signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
        for (Point p : poly) {
            const auto key = detail::key_of(p);
            unique.emplace(std::pair{key.y, key.x}, p);
        }
    }
    std::map<detail::PointKey, VertexId> ids;
    std::vector<Vertex> vertices;
    for (const auto& [key, p] : unique) {
        const auto id = static_cast<VertexId>(vertices.size());
        ids.emplace(detail::key_of(p), id);
        vertices.push_back({id, p});
    }
    std::vector<FaceCycle> faces;
    std::vector<Edge> edges;
    std::map<std::size_t, Point> centers;
    for (const auto& poly : polygons) {
        if (poly.size() < 3) throw Error(ErrorCode::InvalidFace, "face with fewer than 3 corners");
        FaceCycle cycle;
        for (Point p : poly) cycle.push_back(ids.at(detail::key_of(p)));
        for (std::size_t i = 0; i < cycle.size(); ++i) edges.push_back(Edge::of(cycle[i], cycle[(i + 1) % cycle.size()]));
        const Point c = detail::circumcenter(poly[0], poly[1], poly[2]);
        for (Point p : poly) {
            if (std::abs(std::abs(p - c) - 1.0) > detail::kIsoradialTol) {
                throw Error(ErrorCode::NotRhombic, "face " + std::to_string(faces.size()) + " is not inscribed in a unit circle");
            }
        }
        if (!geometry::point_in_polygon(poly, c)) {
            throw Error(ErrorCode::NotRhombic, "circumcenter of face " + std::to_string(faces.size()) + " lies outside the face");
        }
        centers.emplace(faces.size(), c);
        faces.push_back(std::move(cycle));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    auto graph = share(build_graph(std::move(vertices), std::move(edges), std::move(faces)));

    std::map<Edge, double> theta;
    double k = INFINITY, K = 0.0;
    for (const Edge& e : graph->edges()) {
        const Point a = graph->position(e.a);
        const Point b = graph->position(e.b);
        const double t = std::acos(std::clamp(std::abs(b - a) / 2.0, -1.0, 1.0));
        // The rhombus side runs from an endpoint to the adjacent circumcenter.
        for (const DirectedEdge de : {DirectedEdge{e.a, e.b}, DirectedEdge{e.b, e.a}}) {
            const int f = graph->left_face(de);
            if (f < 0) continue;
            const Point tail = graph->position(de.tail);
            const double side_angle = std::abs(std::arg((centers.at(static_cast<std::size_t>(f)) - tail) /
                                                        (graph->position(de.head) - tail)));
            if (std::abs(side_angle - t) > 1e-7) {
                throw Error(ErrorCode::NotRhombic, "edge " + detail::edge_name(e) + " half-angle mismatch");
            }
        }
        theta.emplace(e, t);
        k = std::min(k, t);
        K = std::max(K, t);
    }
    auto dual = make_dual(graph, centers);
    return IsoradialGraph{std::move(graph), std::move(theta), std::move(dual), k, K};
}

/// n x n block of squares with side sqrt(2); theta = pi/4 on every edge.
inline IsoradialGraph square_patch(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "square_patch needs n >= 1");
    const double s = std::numbers::sqrt2;
    std::vector<std::vector<Point>> faces;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            faces.push_back({s * Point(a, b), s * Point(a + 1, b), s * Point(a + 1, b + 1), s * Point(a, b + 1)});
        }
    }
    return isoradial_from_faces(std::move(faces));
}

/// Parallelogram of n x n lattice rhombi, each split into two equilateral
/// triangles of side sqrt(3); theta = pi/6. n = 1 is a pair of triangles.
inline IsoradialGraph triangular_patch(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "triangular_patch needs n >= 1");
    const Point u = std::sqrt(3.0);
    const Point v = std::sqrt(3.0) * std::polar(1.0, std::numbers::pi / 3);
    std::vector<std::vector<Point>> faces;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            const Point p = static_cast<double>(a) * u + static_cast<double>(b) * v;
            faces.push_back({p, p + u, p + v});
            faces.push_back({p + u, p + u + v, p + v});
        }
    }
    return isoradial_from_faces(std::move(faces));
}

/// Parallelogram of n x n unit hexagons; theta = pi/3. n = 1 is one cell.
inline IsoradialGraph hexagonal_patch(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "hexagonal_patch needs n >= 1");
    const Point u = std::sqrt(3.0);
    const Point v = std::sqrt(3.0) * std::polar(1.0, std::numbers::pi / 3);
    std::vector<std::vector<Point>> faces;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            const Point c = static_cast<double>(a) * u + static_cast<double>(b) * v;
            std::vector<Point> hex;
            for (int k = 0; k < 6; ++k) hex.push_back(c + std::polar(1.0, std::numbers::pi / 6 + k * std::numbers::pi / 3));
            faces.push_back(std::move(hex));
        }
    }
    return isoradial_from_faces(std::move(faces));
}

/// One rhombus: corners in cyclic order, corners 0 and 2 primal, 1 and 3 dual.
struct Rhombus {
    std::array<Point, 4> corners;
};

struct RhombicTiling {
    std::vector<Rhombus> rhombi;
    std::optional<std::pair<double, double>> angle_bounds;  // declared k, K
};

/// Builds the isoradial graph whose bounded faces are the dual corners fully
/// surrounded by rhombi. Positions are rescaled to unit rhombus side.
inline IsoradialGraph rhombic_graph(const RhombicTiling& tiling) {
    if (tiling.rhombi.empty()) throw Error(ErrorCode::NotRhombic, "no rhombi");
    const double side = std::abs(tiling.rhombi.front().corners[1] - tiling.rhombi.front().corners[0]);
    if (!(side > 0.0)) throw Error(ErrorCode::NotRhombic, "degenerate rhombus");
    std::map<detail::PointKey, char> role;  // 'p' primal, 'd' dual
    std::map<detail::PointKey, std::pair<Point, std::vector<std::size_t>>> at_dual;
    std::vector<std::array<Point, 4>> scaled;
    for (std::size_t r = 0; r < tiling.rhombi.size(); ++r) {
        std::array<Point, 4> c = tiling.rhombi[r].corners;
        for (int s = 0; s < 4; ++s) {
            const double len = std::abs(c[(s + 1) % 4] - c[s]);
            if (std::abs(len - side) > detail::kIsoradialTol * side) {
                throw Error(ErrorCode::NotRhombic, "rhombus " + std::to_string(r) + " has unequal sides");
            }
        }
        if (std::abs((c[0] + c[2]) - (c[1] + c[3])) > detail::kIsoradialTol * side) {
            throw Error(ErrorCode::NotRhombic, "rhombus " + std::to_string(r) + " diagonals do not bisect");
        }
        for (auto& p : c) p /= side;
        for (int s = 0; s < 4; ++s) {
            const char want = s % 2 == 0 ? 'p' : 'd';
            auto [it, fresh] = role.emplace(detail::key_of(c[s]), want);
            if (!fresh && it->second != want) {
                throw Error(ErrorCode::NotRhombic, "corner of rhombus " + std::to_string(r) + " is both primal and dual");
            }
        }
        for (int s : {1, 3}) {
            auto& slot = at_dual[detail::key_of(c[s])];
            slot.first = c[s];
            slot.second.push_back(r);
        }
        scaled.push_back(c);
    }
    std::vector<std::vector<Point>> faces;
    for (const auto& [key, entry] : at_dual) {
        const Point center = entry.first;
        double total = 0.0;
        std::vector<Point> corners;
        for (std::size_t r : entry.second) {
            const auto& c = scaled[r];
            const int s = detail::key_of(c[1]) == key ? 1 : 3;
            const Point prev = c[(s + 3) % 4];
            const Point next = c[(s + 1) % 4];
            total += std::abs(std::arg((next - center) / (prev - center)));
            corners.push_back(prev);
            corners.push_back(next);
        }
        if (std::abs(total - 2.0 * std::numbers::pi) > 1e-7) continue;
        std::sort(corners.begin(), corners.end(), [&](Point a, Point b) { return std::arg(a - center) < std::arg(b - center); });
        corners.erase(std::unique(corners.begin(), corners.end(),
                                  [](Point a, Point b) { return detail::key_of(a) == detail::key_of(b); }),
                      corners.end());
        faces.push_back(std::move(corners));
    }
    if (faces.empty()) throw Error(ErrorCode::NotRhombic, "no dual corner is surrounded by rhombi");
    IsoradialGraph g = isoradial_from_faces(std::move(faces));
    if (tiling.angle_bounds) {
        const auto [lo, hi] = *tiling.angle_bounds;
        for (const auto& [e, t] : g.theta) {
            if (t < lo - 1e-12 || t > hi + 1e-12) {
                throw Error(ErrorCode::AngleOutOfBounds, "edge " + detail::edge_name(e) + " has theta " + std::to_string(t) +
                                                             " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
        }
    }
    return g;
}

/// Reads the rhombic tiling format:
///
///     rhombi <count>
///     <re0> <im0> <re1> <im1> <re2> <im2> <re3> <im3>
///     ...
///     angle_bounds <k> <K>        (optional)
///
/// Blank lines and lines starting with '#' are ignored.
inline RhombicTiling parse_rhombic(std::istream& in) {
    RhombicTiling tiling;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) { throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + msg); };
    std::size_t pending = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string head;
        if (!(ss >> head) || head[0] == '#') continue;
        if (pending > 0) {
            std::istringstream row(line);
            std::array<double, 8> v{};
            for (double& x : v) {
                if (!(row >> x)) fail("expected 8 coordinates");
            }
            tiling.rhombi.push_back({{Point(v[0], v[1]), Point(v[2], v[3]), Point(v[4], v[5]), Point(v[6], v[7])}});
            --pending;
        } else if (head == "rhombi") {
            if (!(ss >> pending)) fail("rhombi needs a count");
        } else if (head == "angle_bounds") {
            double lo = 0, hi = 0;
            if (!(ss >> lo >> hi)) fail("angle_bounds needs two values");
            if (!(0.0 < lo && lo <= hi && hi < std::numbers::pi)) fail("angle bounds must satisfy 0 < k <= K < pi");
            tiling.angle_bounds = std::pair{lo, hi};
        } else {
            fail("unknown section '" + head + "'");
        }
    }
    if (pending > 0) fail("file ended with " + std::to_string(pending) + " rhombi missing");
    return tiling;
}

inline IsoradialGraph rhombic_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return rhombic_graph(parse_rhombic(in));
}

/// J_e = artanh(tan(theta_e / 2)). Edges with theta_e >= pi/2 have no
/// finite coupling and are rejected.
inline CouplingSystem zinvariant_couplings(const IsoradialGraph& g) {
    std::map<Edge, double> values;
    for (const auto& [e, t] : g.theta) {
        if (!(t > 0.0) || t >= std::numbers::pi / 2) {
            throw Error(ErrorCode::AngleOutOfBounds, "edge " + detail::edge_name(e) + " has theta " + std::to_string(t) +
                                                         "; tan(theta/2) must be below 1");
        }
        values.emplace(e, std::atanh(std::tan(t / 2)));
    }
    return make_couplings(std::move(values));
}

/// sqrt(tan(theta_e / 2)) on both orientations of every primal edge.
inline DirectedWeights zinvariant_factorization(const IsoradialGraph& g) {
    DirectedWeights out;
    for (const auto& [e, t] : g.theta) {
        const double w = std::sqrt(std::tan(t / 2));
        out.emplace(DirectedEdge{e.a, e.b}, w);
        out.emplace(DirectedEdge{e.b, e.a}, w);
    }
    return out;
}

/// sqrt(tan(theta_{e*} / 2)) on the edges of a dual (sub)graph; factorizes
/// exp(-2 J_e) under the Z-invariant couplings.
inline DirectedWeights zinvariant_dual_factorization(const IsoradialGraph& g, const EmbeddedGraph& dual_graph) {
    DirectedWeights out;
    for (const Edge& es : dual_graph.edges()) {
        const double w = std::sqrt(std::tan(g.dual_theta(es) / 2));
        out.emplace(DirectedEdge{es.a, es.b}, w);
        out.emplace(DirectedEdge{es.b, es.a}, w);
    }
    return out;
}

}  // namespace kacward
