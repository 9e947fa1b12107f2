#pragma once

// Kac-Ward transition matrices and the determinant det(Id - Lambda). The
// Hermitian block matrix B sits here too.

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kacward/errors.hpp"
#include "kacward/planar_graph.hpp"

namespace kacward {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

using UndirectedWeights = std::map<Edge, Complex>;
using DirectedWeights = std::map<DirectedEdge, Complex>;

enum class MatrixKind { Lambda, ConjugatedLambda, B, T };

/// Dense matrix indexed by the canonical directed-edge order of a graph.
struct KacWardMatrix {
    MatrixKind kind;
    Matrix entries;
    std::vector<DirectedEdge> index;

    Eigen::Index size() const { return entries.rows(); }
};

namespace detail {

inline Complex lookup(const UndirectedWeights& x, Edge e) {
    auto it = x.find(e);
    if (it == x.end()) throw Error(ErrorCode::MissingWeight, "no weight on edge " + edge_name(e));
    return it->second;
}

inline Complex lookup(const DirectedWeights& x, DirectedEdge e) {
    auto it = x.find(e);
    if (it == x.end()) {
        throw Error(ErrorCode::MissingWeight,
                    "no weight on directed edge (" + std::to_string(e.tail) + "->" + std::to_string(e.head) + ")");
    }
    return it->second;
}

inline Complex half_angle_phase(double angle) { return std::polar(1.0, 0.5 * angle); }

inline KacWardMatrix empty_matrix(const EmbeddedGraph& g, MatrixKind kind) {
    const auto n = static_cast<Eigen::Index>(g.num_directed_edges());
    const auto dir = g.directed_edges();
    return {kind, Matrix::Zero(n, n), {dir.begin(), dir.end()}};
}

/// Fills every non-backtracking transition e -> g (h(e) = t(g), g != -e)
/// with weight(e, g) * exp(i/2 * turning angle).
template <class WeightFn>
void fill_transitions(const EmbeddedGraph& g, KacWardMatrix& m, WeightFn weight) {
    const auto dir = g.directed_edges();
    for (std::size_t i = 0; i < dir.size(); ++i) {
        const DirectedEdge e = dir[i];
        const std::size_t offset = g.out_offset(e.head);
        const auto next = g.out_edges(e.head);
        for (std::size_t k = 0; k < next.size(); ++k) {
            if (next[k].head == e.tail) continue;
            m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(offset + k)) =
                weight(e, next[k]) * half_angle_phase(g.turning_angle(e, next[k]));
        }
    }
}

}  // namespace detail

/// Lambda(x): entry (e, g) = x_e exp(i/2 angle(e, g)) on non-backtracking
/// transitions, zero elsewhere.
inline KacWardMatrix transition_matrix(const EmbeddedGraph& g, const UndirectedWeights& x) {
    auto m = detail::empty_matrix(g, MatrixKind::Lambda);
    for (const Edge& e : g.edges()) (void)detail::lookup(x, e);
    detail::fill_transitions(g, m, [&](DirectedEdge e, DirectedEdge) { return detail::lookup(x, e.undirected()); });
    return m;
}

/// Symmetric factorization: both orientations get the principal square root.
inline DirectedWeights factorize_symmetric(const UndirectedWeights& x) {
    DirectedWeights out;
    for (const auto& [e, w] : x) {
        if (w == Complex{}) throw Error(ErrorCode::ZeroWeight, "zero weight on edge " + detail::edge_name(e));
        const Complex root = std::sqrt(w);
        out.emplace(DirectedEdge{e.a, e.b}, root);
        out.emplace(DirectedEdge{e.b, e.a}, root);
    }
    return out;
}

/// The undirected weights x_e = x(e) x(-e) induced by a directed system.
inline UndirectedWeights induced_weights(const EmbeddedGraph& g, const DirectedWeights& xd) {
    UndirectedWeights x;
    for (const Edge& e : g.edges()) {
        x.emplace(e, detail::lookup(xd, DirectedEdge{e.a, e.b}) * detail::lookup(xd, DirectedEdge{e.b, e.a}));
    }
    return x;
}

/// D^{-1} Lambda(x) D with D = diag(x_dir): entry x(-e) x(g) exp(i/2 angle).
inline KacWardMatrix conjugated_transition_matrix(const EmbeddedGraph& g, const DirectedWeights& xd) {
    auto m = detail::empty_matrix(g, MatrixKind::ConjugatedLambda);
    for (const DirectedEdge& e : g.directed_edges()) (void)detail::lookup(xd, e);
    detail::fill_transitions(g, m, [&](DirectedEdge e, DirectedEdge next) {
        return detail::lookup(xd, e.reversed()) * detail::lookup(xd, next);
    });
    return m;
}

/// Hermitian block-diagonal matrix: entry (e, g) = |x(e) x(g)| exp(i/2
/// angle(-e, g)) for distinct e, g sharing a tail.
inline KacWardMatrix b_matrix(const EmbeddedGraph& g, const DirectedWeights& xd) {
    auto m = detail::empty_matrix(g, MatrixKind::B);
    for (const Vertex& v : g.vertices()) {
        const auto out = g.out_edges(v.id);
        const auto offset = static_cast<Eigen::Index>(g.out_offset(v.id));
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double mi = std::abs(detail::lookup(xd, out[i]));
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (i == j) continue;
                const double mj = std::abs(detail::lookup(xd, out[j]));
                m.entries(offset + static_cast<Eigen::Index>(i), offset + static_cast<Eigen::Index>(j)) =
                    mi * mj * detail::half_angle_phase(g.turning_angle(out[i].reversed(), out[j]));
            }
        }
    }
    return m;
}

/// The diagonal block of B acting on Out(z).
inline Matrix b_block(const EmbeddedGraph& g, const DirectedWeights& xd, VertexId z) {
    const auto out = g.out_edges(z);
    const auto d = static_cast<Eigen::Index>(out.size());
    Matrix block = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            const auto ei = out[static_cast<std::size_t>(i)];
            const auto ej = out[static_cast<std::size_t>(j)];
            block(i, j) = std::abs(detail::lookup(xd, ei)) * std::abs(detail::lookup(xd, ej)) *
                          detail::half_angle_phase(g.turning_angle(ei.reversed(), ej));
        }
    }
    return block;
}

inline KacWardMatrix kac_ward_operator(const EmbeddedGraph& g, const UndirectedWeights& x) {
    auto lambda = transition_matrix(g, x);
    lambda.entries = Matrix::Identity(lambda.size(), lambda.size()) - lambda.entries;
    lambda.kind = MatrixKind::T;
    return lambda;
}

/// Result of Gaussian elimination with partial pivoting, kept in log form
/// so large matrices do not overflow.
struct LuDeterminant {
    double log_abs = 0.0;  // log |det|, -inf when singular
    Complex phase{1.0, 0.0};
    bool singular = false;

    Complex value() const { return singular ? Complex{} : std::exp(log_abs) * phase; }
    /// Principal logarithm of the determinant.
    Complex log() const { return {log_abs, std::arg(phase)}; }
};

inline LuDeterminant lu_determinant(Matrix a) {
    LuDeterminant out;
    const Eigen::Index n = a.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        double best = std::abs(a(col, col));
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const double v = std::abs(a(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) {
            out.singular = true;
            out.log_abs = -INFINITY;
            out.phase = 0.0;
            return out;
        }
        if (pivot != col) {
            a.row(pivot).swap(a.row(col));
            out.phase = -out.phase;
        }
        const Complex p = a(col, col);
        out.log_abs += std::log(best);
        out.phase *= p / best;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const Complex factor = a(r, col) / p;
            if (factor == Complex{}) continue;
            a.row(r).tail(n - col - 1) -= factor * a.row(col).tail(n - col - 1);
        }
    }
    out.phase /= std::abs(out.phase);
    return out;
}

inline Complex determinant(const Matrix& a) { return lu_determinant(a).value(); }

/// det(Id - Lambda(x)).
inline Complex kac_ward_determinant(const EmbeddedGraph& g, const UndirectedWeights& x) {
    return lu_determinant(kac_ward_operator(g, x).entries).value();
}

inline LuDeterminant kac_ward_log_determinant(const EmbeddedGraph& g, const UndirectedWeights& x) {
    return lu_determinant(kac_ward_operator(g, x).entries);
}

}  // namespace kacward
