#pragma once

// Straight-line embedded planar graphs with their subtilings and duals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kacward/errors.hpp"

namespace kacward {

using Point = std::complex<double>;
using VertexId = int;

struct Vertex {
    VertexId id;
    Point position;
};

/// Undirected edge, stored with a < b.
struct Edge {
    VertexId a;
    VertexId b;

    static Edge of(VertexId u, VertexId v) { return u < v ? Edge{u, v} : Edge{v, u}; }
    auto operator<=>(const Edge&) const = default;
};

struct DirectedEdge {
    VertexId tail;
    VertexId head;

    DirectedEdge reversed() const { return {head, tail}; }
    Edge undirected() const { return Edge::of(tail, head); }
    auto operator<=>(const DirectedEdge&) const = default;
};

inline DirectedEdge operator-(const DirectedEdge& e) { return e.reversed(); }

using FaceCycle = std::vector<VertexId>;

namespace geometry {

inline constexpr double kCollinearEps = 1e-12;

inline double cross(Point u, Point v) { return u.real() * v.imag() - u.imag() * v.real(); }
inline double dot(Point u, Point v) { return u.real() * v.real() + u.imag() * v.imag(); }

/// Sign of the orientation of (a, b, c): +1 counterclockwise, -1 clockwise,
/// 0 when collinear up to a relative tolerance.
inline int orientation(Point a, Point b, Point c) {
    const double value = cross(b - a, c - a);
    const double scale = std::abs(b - a) * std::abs(c - a);
    if (std::abs(value) <= kCollinearEps * std::max(scale, 1e-300)) return 0;
    return value > 0 ? 1 : -1;
}

/// p collinear with [a, b] and strictly between the endpoints.
inline bool strictly_inside_segment(Point a, Point b, Point p) {
    if (orientation(a, b, p) != 0) return false;
    const double t = dot(p - a, b - a) / std::norm(b - a);
    return t > kCollinearEps && t < 1.0 - kCollinearEps;
}

/// Do two segments with four distinct endpoints meet anywhere?
inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    return strictly_inside_segment(p1, p2, q1) || strictly_inside_segment(p1, p2, q2) ||
           strictly_inside_segment(q1, q2, p1) || strictly_inside_segment(q1, q2, p2);
}

/// Principal argument in (-pi, pi]. std::arg may return -pi for a
/// negative real with a negative-zero imaginary part.
inline double principal_arg(Point z) {
    const double a = std::arg(z);
    return a <= -std::numbers::pi ? std::numbers::pi : a;
}

inline double signed_area(std::span<const Point> polygon) {
    double area = 0.0;
    for (std::size_t k = 0; k < polygon.size(); ++k) {
        area += cross(polygon[k], polygon[(k + 1) % polygon.size()]);
    }
    return 0.5 * area;
}

inline bool point_in_polygon(std::span<const Point> polygon, Point p) {
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Point a = polygon[i];
        const Point b = polygon[j];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            const double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (p.real() < x) inside = !inside;
        }
    }
    return inside;
}

}  // namespace geometry

/// Turning angle from direction `from` to direction `to`, in (-pi, pi].
inline double turning_angle(Point from, Point to) {
    if (from == Point{} || to == Point{}) {
        throw Error(ErrorCode::DegenerateEdge, "zero-length edge in turning angle");
    }
    // atan2 of cross and dot is exact for parallel directions and exactly
    // antisymmetric under swapping the two arguments.
    return geometry::principal_arg(Point(geometry::dot(from, to), geometry::cross(from, to)));
}

class EmbeddedGraph {
public:
    EmbeddedGraph() = default;

    std::span<const Vertex> vertices() const { return vertices_; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const FaceCycle> faces() const { return faces_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_directed_edges() const { return directed_.size(); }

    bool has_vertex(VertexId id) const { return index_.contains(id); }
    bool has_edge(Edge e) const { return edge_index_.contains(e); }

    Point position(VertexId id) const { return vertices_[vertex_index(id)].position; }

    std::size_t vertex_index(VertexId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw Error(ErrorCode::UnknownVertex, "vertex " + std::to_string(id));
        return it->second;
    }

    std::size_t edge_index(Edge e) const {
        auto it = edge_index_.find(e);
        if (it == edge_index_.end()) {
            throw Error(ErrorCode::MissingWeight,
                        "edge {" + std::to_string(e.a) + "," + std::to_string(e.b) + "} not in graph");
        }
        return it->second;
    }

    /// All directed edges in canonical order: by tail id, then by direction
    /// angle in (-pi, pi] increasing (counterclockwise).
    std::span<const DirectedEdge> directed_edges() const { return directed_; }

    std::size_t directed_index(DirectedEdge e) const {
        auto it = directed_index_.find(e);
        if (it == directed_index_.end()) {
            throw Error(ErrorCode::MissingWeight, "directed edge (" + std::to_string(e.tail) + "->" +
                                                      std::to_string(e.head) + ") not in graph");
        }
        return it->second;
    }

    /// Out(z) in counterclockwise order starting just above angle -pi.
    std::span<const DirectedEdge> out_edges(VertexId z) const {
        const auto& [first, count] = out_range_[vertex_index(z)];
        return std::span<const DirectedEdge>(directed_).subspan(first, count);
    }

    /// Canonical index of the first out-edge of z; Out(z) is contiguous.
    std::size_t out_offset(VertexId z) const { return out_range_[vertex_index(z)].first; }

    std::size_t degree(VertexId z) const { return out_range_[vertex_index(z)].second; }

    std::size_t max_degree() const {
        std::size_t best = 0;
        for (const auto& r : out_range_) best = std::max(best, r.second);
        return best;
    }

    Point direction(DirectedEdge e) const { return position(e.head) - position(e.tail); }

    double turning_angle(DirectedEdge from, DirectedEdge to) const {
        return kacward::turning_angle(direction(from), direction(to));
    }

    /// Index of the bounded face on the left of e, or -1 for the unbounded
    /// side (or a region not listed as a face).
    int left_face(DirectedEdge e) const { return left_face_[directed_index(e)]; }

    std::vector<Point> face_polygon(std::size_t face) const {
        std::vector<Point> poly;
        for (VertexId v : faces_.at(face)) poly.push_back(position(v));
        return poly;
    }

    friend EmbeddedGraph build_graph(std::vector<Vertex> vertices, std::vector<Edge> edges,
                                     std::vector<FaceCycle> faces);

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<FaceCycle> faces_;
    std::map<VertexId, std::size_t> index_;
    std::map<Edge, std::size_t> edge_index_;
    std::vector<DirectedEdge> directed_;
    std::map<DirectedEdge, std::size_t> directed_index_;
    std::vector<std::pair<std::size_t, std::size_t>> out_range_;
    std::vector<int> left_face_;
};

namespace detail {

inline std::string edge_name(Edge e) { return "{" + std::to_string(e.a) + "," + std::to_string(e.b) + "}"; }

}  // namespace detail

/// Validates and assembles an embedded graph. Faces are bounded faces given
/// as counterclockwise vertex cycles; they are checked against the rotation
/// system induced by the embedding.
inline EmbeddedGraph build_graph(std::vector<Vertex> vertices, std::vector<Edge> edges,
                                 std::vector<FaceCycle> faces) {
    EmbeddedGraph g;
    std::sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        if (!g.index_.emplace(vertices[k].id, k).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate vertex id " + std::to_string(vertices[k].id));
        }
        if (!std::isfinite(vertices[k].position.real()) || !std::isfinite(vertices[k].position.imag())) {
            throw Error(ErrorCode::InvalidArgument, "non-finite position for vertex " + std::to_string(vertices[k].id));
        }
    }
    {
        std::map<std::pair<double, double>, VertexId> seen;
        for (const auto& v : vertices) {
            auto [it, fresh] = seen.emplace(std::pair{v.position.real(), v.position.imag()}, v.id);
            if (!fresh) {
                throw Error(ErrorCode::InvalidArgument, "vertices " + std::to_string(it->second) + " and " +
                                                            std::to_string(v.id) + " share a position");
            }
        }
    }
    g.vertices_ = std::move(vertices);

    std::set<Edge> edge_set;
    for (Edge raw : edges) {
        if (raw.a == raw.b) throw Error(ErrorCode::NotSimple, "loop at vertex " + std::to_string(raw.a));
        for (VertexId v : {raw.a, raw.b}) {
            if (!g.index_.contains(v)) {
                throw Error(ErrorCode::DanglingEdge, "edge " + detail::edge_name(raw) + " references unknown vertex " +
                                                         std::to_string(v));
            }
        }
        const Edge e = Edge::of(raw.a, raw.b);
        if (!edge_set.insert(e).second) throw Error(ErrorCode::NotSimple, "repeated edge " + detail::edge_name(e));
    }
    g.edges_.assign(edge_set.begin(), edge_set.end());
    for (std::size_t k = 0; k < g.edges_.size(); ++k) g.edge_index_.emplace(g.edges_[k], k);

    std::vector<std::vector<DirectedEdge>> out(g.vertices_.size());
    for (const Edge& e : g.edges_) {
        out[g.index_.at(e.a)].push_back({e.a, e.b});
        out[g.index_.at(e.b)].push_back({e.b, e.a});
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k].empty()) {
            throw Error(ErrorCode::IsolatedVertex, "vertex " + std::to_string(g.vertices_[k].id) + " has degree 0");
        }
    }

    // Pairwise crossing test. Edges sharing an endpoint may only overlap
    // when collinear and pointing the same way.
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        const Edge e = g.edges_[i];
        const Point p1 = g.position(e.a), p2 = g.position(e.b);
        for (std::size_t j = i + 1; j < g.edges_.size(); ++j) {
            const Edge f = g.edges_[j];
            const Point q1 = g.position(f.a), q2 = g.position(f.b);
            bool bad = false;
            VertexId shared = -1;
            if (e.a == f.a || e.a == f.b) shared = e.a;
            if (e.b == f.a || e.b == f.b) shared = e.b;
            if (shared >= 0) {
                const Point s = g.position(shared);
                const Point u = (shared == e.a ? p2 : p1) - s;
                const Point w = (shared == f.a ? q2 : q1) - s;
                bad = geometry::orientation(s, s + u, s + w) == 0 && geometry::dot(u, w) > 0;
            } else {
                bad = geometry::segments_intersect(p1, p2, q1, q2);
            }
            if (bad) {
                throw Error(ErrorCode::CrossingEdges,
                            "edges " + detail::edge_name(e) + " and " + detail::edge_name(f) + " intersect");
            }
        }
    }

    for (std::size_t k = 0; k < out.size(); ++k) {
        auto& list = out[k];
        const Point origin = g.vertices_[k].position;
        std::sort(list.begin(), list.end(), [&](const DirectedEdge& a, const DirectedEdge& b) {
            return geometry::principal_arg(g.position(a.head) - origin) <
                   geometry::principal_arg(g.position(b.head) - origin);
        });
        g.out_range_.emplace_back(g.directed_.size(), list.size());
        g.directed_.insert(g.directed_.end(), list.begin(), list.end());
    }
    for (std::size_t k = 0; k < g.directed_.size(); ++k) g.directed_index_.emplace(g.directed_[k], k);
    g.left_face_.assign(g.directed_.size(), -1);

    for (std::size_t f = 0; f < faces.size(); ++f) {
        const FaceCycle& cycle = faces[f];
        const std::string name = "face " + std::to_string(f);
        if (cycle.size() < 3) throw Error(ErrorCode::InvalidFace, name + " has fewer than 3 vertices");
        std::vector<Point> poly;
        for (VertexId v : cycle) {
            if (!g.index_.contains(v)) throw Error(ErrorCode::InvalidFace, name + " uses unknown vertex " + std::to_string(v));
            poly.push_back(g.position(v));
        }
        if (geometry::signed_area(poly) <= 0) throw Error(ErrorCode::InvalidFace, name + " is not counterclockwise");
        const std::size_t n = cycle.size();
        for (std::size_t k = 0; k < n; ++k) {
            const DirectedEdge step{cycle[k], cycle[(k + 1) % n]};
            auto it = g.directed_index_.find(step);
            if (it == g.directed_index_.end()) {
                throw Error(ErrorCode::InvalidFace, name + " steps along non-edge " + detail::edge_name(step.undirected()));
            }
            if (g.left_face_[it->second] != -1) {
                throw Error(ErrorCode::InvalidFace, name + " reuses a directed edge of face " +
                                                        std::to_string(g.left_face_[it->second]));
            }
            g.left_face_[it->second] = static_cast<int>(f);
            // With the face on the left, the walk continues along the edge
            // clockwise-adjacent to the reversed edge at the head.
            const DirectedEdge next{cycle[(k + 1) % n], cycle[(k + 2) % n]};
            const auto around = g.out_edges(step.head);
            const std::size_t back = g.directed_index_.at(step.reversed()) - g.out_offset(step.head);
            const DirectedEdge expected = around[(back + around.size() - 1) % around.size()];
            if (expected != next) {
                throw Error(ErrorCode::InvalidFace, name + " is not a face of the embedding at vertex " +
                                                        std::to_string(step.head));
            }
        }
    }
    g.faces_ = std::move(faces);
    return g;
}

using GraphPtr = std::shared_ptr<const EmbeddedGraph>;

inline GraphPtr share(EmbeddedGraph g) { return std::make_shared<const EmbeddedGraph>(std::move(g)); }

/// Face-induced subgraph of an ambient graph together with its boundary.
class Subtiling {
public:
    Subtiling(GraphPtr ambient, std::vector<std::size_t> face_ids, EmbeddedGraph induced,
              std::vector<VertexId> boundary)
        : ambient_(std::move(ambient)),
          face_ids_(std::move(face_ids)),
          graph_(std::move(induced)),
          boundary_(std::move(boundary)) {}

    const EmbeddedGraph& ambient() const { return *ambient_; }
    const GraphPtr& ambient_ptr() const { return ambient_; }
    const EmbeddedGraph& graph() const { return graph_; }
    std::span<const std::size_t> face_ids() const { return face_ids_; }
    std::span<const VertexId> boundary() const { return boundary_; }

    bool is_boundary(VertexId z) const { return std::binary_search(boundary_.begin(), boundary_.end(), z); }

    std::vector<VertexId> interior() const {
        std::vector<VertexId> out;
        for (const auto& v : graph_.vertices()) {
            if (!is_boundary(v.id)) out.push_back(v.id);
        }
        return out;
    }

private:
    GraphPtr ambient_;
    std::vector<std::size_t> face_ids_;
    EmbeddedGraph graph_;
    std::vector<VertexId> boundary_;
};

inline Subtiling subtiling(GraphPtr ambient, std::vector<std::size_t> face_ids) {
    if (face_ids.empty()) throw Error(ErrorCode::UnknownFace, "empty face selection");
    std::sort(face_ids.begin(), face_ids.end());
    face_ids.erase(std::unique(face_ids.begin(), face_ids.end()), face_ids.end());
    const auto faces = ambient->faces();
    std::set<VertexId> vertex_ids;
    std::set<Edge> edge_set;
    std::vector<FaceCycle> cycles;
    for (std::size_t f : face_ids) {
        if (f >= faces.size()) throw Error(ErrorCode::UnknownFace, "face " + std::to_string(f));
        const FaceCycle& cycle = faces[f];
        cycles.push_back(cycle);
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            vertex_ids.insert(cycle[k]);
            edge_set.insert(Edge::of(cycle[k], cycle[(k + 1) % cycle.size()]));
        }
    }
    std::vector<Vertex> verts;
    for (VertexId v : vertex_ids) verts.push_back({v, ambient->position(v)});
    EmbeddedGraph induced = build_graph(std::move(verts), {edge_set.begin(), edge_set.end()}, std::move(cycles));

    std::vector<VertexId> boundary;
    for (VertexId z : vertex_ids) {
        for (const DirectedEdge& e : ambient->out_edges(z)) {
            const int lf = ambient->left_face(e);
            if (lf < 0 || !std::binary_search(face_ids.begin(), face_ids.end(), static_cast<std::size_t>(lf))) {
                boundary.push_back(z);
                break;
            }
        }
    }
    return Subtiling(std::move(ambient), std::move(face_ids), std::move(induced), std::move(boundary));
}

/// Subtiling made of every bounded face of the ambient graph.
inline Subtiling full_subtiling(GraphPtr ambient) {
    std::vector<std::size_t> ids(ambient->faces().size());
    for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = k;
    return subtiling(std::move(ambient), std::move(ids));
}

/// Planar dual restricted to bounded faces. Dual vertex ids are primal face
/// indices; a dual face exists for every primal vertex surrounded by
/// bounded faces.
class DualEmbedding {
public:
    DualEmbedding(GraphPtr primal, GraphPtr dual, std::map<Edge, Edge> to_dual, std::map<VertexId, std::size_t> face_of_vertex)
        : primal_(std::move(primal)), dual_(std::move(dual)), to_dual_(std::move(to_dual)), face_of_vertex_(std::move(face_of_vertex)) {
        for (const auto& [p, d] : to_dual_) to_primal_.emplace(d, p);
    }

    const EmbeddedGraph& primal() const { return *primal_; }
    const EmbeddedGraph& graph() const { return *dual_; }
    const GraphPtr& graph_ptr() const { return dual_; }

    bool has_dual(Edge primal_edge) const { return to_dual_.contains(primal_edge); }
    Edge dual_edge(Edge primal_edge) const {
        auto it = to_dual_.find(primal_edge);
        if (it == to_dual_.end()) throw Error(ErrorCode::MissingWeight, "no dual edge for " + detail::edge_name(primal_edge));
        return it->second;
    }
    Edge primal_edge(Edge dual_edge) const {
        auto it = to_primal_.find(dual_edge);
        if (it == to_primal_.end()) throw Error(ErrorCode::MissingWeight, "no primal edge for " + detail::edge_name(dual_edge));
        return it->second;
    }

    /// Index (in the dual graph) of the dual face around primal vertex v.
    std::size_t dual_face(VertexId v) const {
        auto it = face_of_vertex_.find(v);
        if (it == face_of_vertex_.end()) throw Error(ErrorCode::UnknownFace, "vertex " + std::to_string(v) + " has no dual face");
        return it->second;
    }

    const std::map<Edge, Edge>& pairing() const { return to_dual_; }

private:
    GraphPtr primal_;
    GraphPtr dual_;
    std::map<Edge, Edge> to_dual_;
    std::map<Edge, Edge> to_primal_;
    std::map<VertexId, std::size_t> face_of_vertex_;
};

/// Builds the dual from one position per bounded primal face. Only faces
/// adjacent to another bounded face become dual vertices.
inline DualEmbedding make_dual(GraphPtr primal, const std::map<std::size_t, Point>& face_positions) {
    const auto faces = primal->faces();
    std::map<Edge, Edge> to_dual;
    std::set<VertexId> used;
    for (const Edge& e : primal->edges()) {
        const int f1 = primal->left_face({e.a, e.b});
        const int f2 = primal->left_face({e.b, e.a});
        if (f1 < 0 || f2 < 0) continue;
        to_dual.emplace(e, Edge::of(f1, f2));
        used.insert(f1);
        used.insert(f2);
    }
    for (const auto& [f, p] : face_positions) {
        if (f >= faces.size()) throw Error(ErrorCode::UnknownFace, "dual vertex for face " + std::to_string(f));
        if (!geometry::point_in_polygon(primal->face_polygon(f), p)) {
            throw Error(ErrorCode::InvalidArgument, "dual vertex of face " + std::to_string(f) + " lies outside the face");
        }
    }
    std::vector<Vertex> verts;
    for (VertexId f : used) {
        auto it = face_positions.find(static_cast<std::size_t>(f));
        if (it == face_positions.end()) {
            throw Error(ErrorCode::InvalidArgument, "missing dual vertex position for face " + std::to_string(f));
        }
        verts.push_back({f, it->second});
    }
    std::vector<Edge> dual_edges;
    for (const auto& [p, d] : to_dual) dual_edges.push_back(d);
    if (std::set<Edge>(dual_edges.begin(), dual_edges.end()).size() != dual_edges.size()) {
        throw Error(ErrorCode::NotSimple, "two faces share more than one edge; dual is not simple");
    }

    std::vector<FaceCycle> dual_faces;
    std::map<VertexId, std::size_t> face_of_vertex;
    for (const Vertex& v : primal->vertices()) {
        FaceCycle cycle;
        bool closed = true;
        for (const DirectedEdge& e : primal->out_edges(v.id)) {
            const int lf = primal->left_face(e);
            if (lf < 0 || !to_dual.contains(e.undirected())) {
                closed = false;
                break;
            }
            cycle.push_back(lf);
        }
        if (!closed || cycle.size() < 3) continue;
        face_of_vertex.emplace(v.id, dual_faces.size());
        dual_faces.push_back(std::move(cycle));
    }
    auto dual = share(build_graph(std::move(verts), std::move(dual_edges), std::move(dual_faces)));
    return DualEmbedding(std::move(primal), std::move(dual), std::move(to_dual), std::move(face_of_vertex));
}

/// Subtiling of the dual whose faces correspond to the interior vertices of g.
inline Subtiling dual_subtiling(const Subtiling& g, const DualEmbedding& dual) {
    if (&g.ambient() != &dual.primal()) {
        throw Error(ErrorCode::InvalidArgument, "subtiling and dual refer to different ambient graphs");
    }
    const auto interior = g.interior();
    if (interior.empty()) throw Error(ErrorCode::EmptyInterior, "subtiling has no interior vertex");
    std::vector<std::size_t> faces;
    for (VertexId v : interior) faces.push_back(dual.dual_face(v));
    return subtiling(dual.graph_ptr(), std::move(faces));
}

inline std::vector<DirectedEdge> out_edges(const EmbeddedGraph& g, VertexId z) {
    const auto span = g.out_edges(z);
    return {span.begin(), span.end()};
}

}  // namespace kacward
