#pragma once

// Partition functions of the Ising model on subtilings: brute-force sums,
// even-subgraph generating functions, Kac-Ward determinant formulas and the
// trace power series for ln det used off the real axis.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kacward/errors.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"
#include "kacward/spectral.hpp"

namespace kacward {

enum class Boundary { Free, Plus };

constexpr std::string_view to_string(Boundary bc) { return bc == Boundary::Free ? "free" : "plus"; }

/// Ferromagnetic couplings with bounds 0 < m <= J_e <= M < inf.
struct CouplingSystem {
    std::map<Edge, double> values;
    double m = 0.0;
    double M = 0.0;

    double at(Edge e) const {
        auto it = values.find(e);
        if (it == values.end()) throw Error(ErrorCode::MissingWeight, "no coupling on edge " + detail::edge_name(e));
        return it->second;
    }
};

inline CouplingSystem make_couplings(std::map<Edge, double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty coupling system");
    CouplingSystem c{std::move(values), INFINITY, 0.0};
    for (const auto& [e, j] : c.values) {
        if (!(j > 0.0) || !std::isfinite(j)) {
            throw Error(ErrorCode::InvalidArgument, "coupling on " + detail::edge_name(e) + " must be positive and finite");
        }
        c.m = std::min(c.m, j);
        c.M = std::max(c.M, j);
    }
    return c;
}

inline CouplingSystem constant_couplings(const EmbeddedGraph& g, double j) {
    std::map<Edge, double> values;
    for (const Edge& e : g.edges()) values.emplace(e, j);
    return make_couplings(std::move(values));
}

namespace cmath {

/// tanh for complex arguments without overflow at large |Re z|.
inline Complex tanh(Complex z) {
    const bool flip = z.real() < 0;
    const Complex w = flip ? -z : z;
    const Complex q = std::exp(-2.0 * w);
    const Complex t = (1.0 - q) / (1.0 + q);
    return flip ? -t : t;
}

/// Principal Log cosh(z), evaluated as z + Log((1 + e^{-2z}) / 2) with the
/// imaginary part folded back into (-pi, pi].
inline Complex log_cosh(Complex z) {
    const Complex w = z.real() < 0 ? -z : z;
    const Complex tail = 1.0 + std::exp(-2.0 * w);
    const double log_abs = w.real() + std::log(std::abs(tail)) - std::numbers::ln2;
    const double arg = geometry::principal_arg(std::polar(1.0, w.imag()) * tail);
    return {log_abs, arg};
}

/// Re cosh(z) sign without overflow.
inline bool cosh_has_positive_real_part(Complex z) {
    const Complex w = z.real() < 0 ? -z : z;
    return (std::polar(1.0, w.imag()) * (1.0 + std::exp(-2.0 * w))).real() > 0.0;
}

}  // namespace cmath

/// tanh(beta J_e) on every edge of g.
inline UndirectedWeights high_temperature_weights(const EmbeddedGraph& g, const CouplingSystem& j, Complex beta) {
    UndirectedWeights w;
    for (const Edge& e : g.edges()) w.emplace(e, cmath::tanh(beta * j.at(e)));
    return w;
}

/// exp(-2 beta J_e) on every edge e* of the dual subtiling graph.
inline UndirectedWeights low_temperature_weights(const EmbeddedGraph& dual_graph, const DualEmbedding& dual,
                                                 const CouplingSystem& j, Complex beta) {
    UndirectedWeights w;
    for (const Edge& es : dual_graph.edges()) w.emplace(es, std::exp(-2.0 * beta * j.at(dual.primal_edge(es))));
    return w;
}

inline constexpr std::size_t kMaxBruteForceSpins = 24;

/// Direct sum over spin configurations of prod exp(beta J sigma_z sigma_w).
/// `fixed_plus` spins are pinned to +1.
inline Complex partition_bruteforce(const EmbeddedGraph& g, const CouplingSystem& j, Complex beta,
                                    std::span<const VertexId> fixed_plus = {}) {
    std::vector<std::size_t> free_index(g.num_vertices(), SIZE_MAX);
    std::vector<VertexId> free_ids;
    for (const Vertex& v : g.vertices()) {
        if (std::find(fixed_plus.begin(), fixed_plus.end(), v.id) == fixed_plus.end()) {
            free_index[g.vertex_index(v.id)] = free_ids.size();
            free_ids.push_back(v.id);
        }
    }
    if (free_ids.size() > kMaxBruteForceSpins) {
        throw Error(ErrorCode::TooLarge, std::to_string(free_ids.size()) + " free spins exceed the brute-force limit of " +
                                             std::to_string(kMaxBruteForceSpins));
    }
    // Adjacency restricted to free spins; pinned neighbours act as a field.
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(free_ids.size());
    std::vector<double> field(free_ids.size(), 0.0);
    double energy = 0.0;  // all free spins +1 initially
    for (const Edge& e : g.edges()) {
        const double c = j.at(e);
        energy += c;
        const std::size_t fa = free_index[g.vertex_index(e.a)];
        const std::size_t fb = free_index[g.vertex_index(e.b)];
        if (fa != SIZE_MAX && fb != SIZE_MAX) {
            adj[fa].emplace_back(fb, c);
            adj[fb].emplace_back(fa, c);
        } else if (fa != SIZE_MAX) {
            field[fa] += c;
        } else if (fb != SIZE_MAX) {
            field[fb] += c;
        }
    }
    // Gray-code walk: flipping spin k changes the energy by -2 s_k h_k.
    std::vector<int> spin(free_ids.size(), 1);
    Complex z = std::exp(beta * energy);
    const std::uint64_t count = std::uint64_t{1} << free_ids.size();
    for (std::uint64_t step = 1; step < count; ++step) {
        const auto k = static_cast<std::size_t>(std::countr_zero(step));
        double local = field[k];
        for (const auto& [nb, c] : adj[k]) local += c * spin[nb];
        energy -= 2.0 * spin[k] * local;
        spin[k] = -spin[k];
        z += std::exp(beta * energy);
    }
    return z;
}

inline Complex partition_bruteforce(const Subtiling& g, const CouplingSystem& j, Complex beta, Boundary bc) {
    if (bc == Boundary::Free) return partition_bruteforce(g.graph(), j, beta);
    return partition_bruteforce(g.graph(), j, beta, g.boundary());
}

inline constexpr std::size_t kMaxCycleSpaceDimension = 24;

/// Sum over even edge subsets of prod w_e, enumerated through a
/// fundamental-cycle basis of the cycle space.
inline Complex even_subgraph_gf(const EmbeddedGraph& g, const UndirectedWeights& w) {
    const std::size_t nv = g.num_vertices();
    const std::size_t ne = g.num_edges();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nv);  // (neighbour index, edge index)
    std::vector<Complex> weight(ne);
    for (std::size_t k = 0; k < ne; ++k) {
        const Edge e = g.edges()[k];
        weight[k] = detail::lookup(w, e);
        adj[g.vertex_index(e.a)].emplace_back(g.vertex_index(e.b), k);
        adj[g.vertex_index(e.b)].emplace_back(g.vertex_index(e.a), k);
    }
    std::vector<std::size_t> parent(nv, SIZE_MAX), parent_edge(nv, SIZE_MAX), depth(nv, 0);
    std::vector<char> tree_edge(ne, 0), seen(nv, 0);
    std::size_t components = 0;
    for (std::size_t root = 0; root < nv; ++root) {
        if (seen[root]) continue;
        ++components;
        std::queue<std::size_t> todo;
        todo.push(root);
        seen[root] = 1;
        while (!todo.empty()) {
            const std::size_t u = todo.front();
            todo.pop();
            for (const auto& [v, k] : adj[u]) {
                if (seen[v]) continue;
                seen[v] = 1;
                parent[v] = u;
                parent_edge[v] = k;
                depth[v] = depth[u] + 1;
                tree_edge[k] = 1;
                todo.push(v);
            }
        }
    }
    const std::size_t dim = ne + components - nv;
    if (dim > kMaxCycleSpaceDimension) {
        throw Error(ErrorCode::TooLarge, "cycle space dimension " + std::to_string(dim) + " exceeds " +
                                             std::to_string(kMaxCycleSpaceDimension));
    }
    std::vector<std::vector<char>> basis;
    for (std::size_t k = 0; k < ne; ++k) {
        if (tree_edge[k]) continue;
        std::vector<char> cycle(ne, 0);
        cycle[k] = 1;
        std::size_t u = g.vertex_index(g.edges()[k].a);
        std::size_t v = g.vertex_index(g.edges()[k].b);
        while (u != v) {
            if (depth[u] < depth[v]) std::swap(u, v);
            cycle[parent_edge[u]] ^= 1;
            u = parent[u];
        }
        basis.push_back(std::move(cycle));
    }
    std::vector<char> current(ne, 0);
    Complex total{1.0, 0.0};
    const std::uint64_t count = std::uint64_t{1} << basis.size();
    for (std::uint64_t step = 1; step < count; ++step) {
        const auto& flip = basis[static_cast<std::size_t>(std::countr_zero(step))];
        Complex product{1.0, 0.0};
        for (std::size_t k = 0; k < ne; ++k) {
            current[k] ^= flip[k];
            if (current[k]) product *= weight[k];
        }
        total += product;
    }
    return total;
}

/// Z^2 from a Kac-Ward formula, in value and log form. For real beta > 0
/// the positive root is exposed as well.
struct SquaredPartition {
    Complex value;
    Complex log_value;  // a logarithm of value (sum of principal logs of the factors)
    std::optional<double> root;
};

inline void require_positive_real_part(Complex beta) {
    if (!(beta.real() > 0.0)) throw Error(ErrorCode::InvalidBeta, "Kac-Ward formulas need Re beta > 0");
}

/// Z_free^2 = 2^{2|V|} prod cosh^2(beta J_e) det T(tanh beta J).
inline SquaredPartition partition_free_kw(const EmbeddedGraph& g, const CouplingSystem& j, Complex beta) {
    require_positive_real_part(beta);
    Complex log_value = 2.0 * static_cast<double>(g.num_vertices()) * std::numbers::ln2;
    for (const Edge& e : g.edges()) log_value += 2.0 * cmath::log_cosh(beta * j.at(e));
    log_value += kac_ward_log_determinant(g, high_temperature_weights(g, j, beta)).log();
    SquaredPartition out{std::exp(log_value), log_value, std::nullopt};
    if (beta.imag() == 0.0) out.root = std::exp(0.5 * log_value.real());
    return out;
}

inline SquaredPartition partition_free_kw(const Subtiling& g, const CouplingSystem& j, Complex beta) {
    return partition_free_kw(g.graph(), j, beta);
}

/// Z_plus^2 = exp(2 beta sum J_e) det T_{G*}(exp(-2 beta J)).
inline SquaredPartition partition_plus_kw(const Subtiling& g, const DualEmbedding& dual, const CouplingSystem& j,
                                          Complex beta) {
    require_positive_real_part(beta);
    const Subtiling gs = dual_subtiling(g, dual);
    double total = 0.0;
    for (const Edge& e : g.graph().edges()) total += j.at(e);
    Complex log_value = 2.0 * beta * total;
    log_value += kac_ward_log_determinant(gs.graph(), low_temperature_weights(gs.graph(), dual, j, beta)).log();
    SquaredPartition out{std::exp(log_value), log_value, std::nullopt};
    if (beta.imag() == 0.0) out.root = std::exp(0.5 * log_value.real());
    return out;
}

/// Partial sums of ln det(Id - Lambda) = -sum_r tr(Lambda^r) / r.
struct TraceSeries {
    Complex log_det;
    double tail_bound = 0.0;  // bound on the omitted terms given the norm bound s
    std::size_t terms = 0;
};

/// Upper bound on |sum_{r > R} tr(Lambda^r)/r| when every eigenvalue has
/// modulus at most s < 1 and Lambda has dimension n.
inline double trace_series_tail(std::size_t n, double s, std::size_t terms) {
    const double r1 = static_cast<double>(terms + 1);
    return static_cast<double>(n) * std::pow(s, r1) / (r1 * (1.0 - s));
}

/// Evaluates the first `terms` terms. Powers are accumulated with a sparse
/// right-multiplication since Lambda has at most deg - 1 entries per row.
inline TraceSeries trace_series_log_det(const Matrix& lambda, double norm_bound, std::size_t terms) {
    const Eigen::Index n = lambda.rows();
    std::vector<std::vector<std::pair<Eigen::Index, Complex>>> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (lambda(i, k) != Complex{}) rows[static_cast<std::size_t>(i)].emplace_back(k, lambda(i, k));
        }
    }
    Matrix power = lambda;
    Matrix next(n, n);
    Complex sum{};
    for (std::size_t r = 1; r <= terms; ++r) {
        sum -= power.trace() / static_cast<double>(r);
        if (r == terms) break;
        next.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (const auto& [k, v] : rows[static_cast<std::size_t>(i)]) next.col(k) += power.col(i) * v;
        }
        power.swap(next);
    }
    return {sum, norm_bound < 1.0 ? trace_series_tail(static_cast<std::size_t>(n), norm_bound, terms) : INFINITY, terms};
}

/// Chooses the cutoff so that the tail bound drops below `tolerance`.
inline TraceSeries trace_series_log_det(const Matrix& lambda, double norm_bound, double tolerance,
                                        std::size_t max_terms) {
    if (!(norm_bound < 1.0)) throw Error(ErrorCode::NotInRegime, "norm bound " + std::to_string(norm_bound) + " >= 1");
    const auto n = static_cast<std::size_t>(lambda.rows());
    std::size_t terms = 1;
    while (trace_series_tail(n, norm_bound, terms) >= tolerance) {
        if (++terms > max_terms) {
            throw Error(ErrorCode::NoConvergence, "trace series needs more than " + std::to_string(max_terms) + " terms");
        }
    }
    return trace_series_log_det(lambda, norm_bound, terms);
}

enum class FreeEnergyMethod { Brute, Determinant, TraceSeries };

constexpr std::string_view to_string(FreeEnergyMethod m) {
    switch (m) {
        case FreeEnergyMethod::Brute: return "brute";
        case FreeEnergyMethod::Determinant: return "determinant";
        case FreeEnergyMethod::TraceSeries: return "trace-series";
    }
    return "?";
}

struct FreeEnergyResult {
    Complex beta;
    Complex value;
    FreeEnergyMethod method;
    std::optional<double> truncation_error;
    Complex log_partition;  // ln Z
    std::size_t terms = 0;
};

struct FreeEnergyOptions {
    double series_tolerance = 1e-12;
    std::size_t max_terms = 200000;
    /// Factorization of the relevant weight system (tanh beta J on G, or
    /// exp(-2 beta J) on G*) used to certify the norm bound. Defaults to the
    /// symmetric square root.
    std::optional<DirectedWeights> factorization;
};

/// f = -ln Z / (beta |V(G)|) by the requested method. The dual is needed
/// for the determinant and trace-series paths with plus boundary condition.
inline FreeEnergyResult free_energy_density(const Subtiling& g, const CouplingSystem& j, Complex beta, Boundary bc,
                                            FreeEnergyMethod method, const DualEmbedding* dual = nullptr,
                                            const FreeEnergyOptions& options = {}) {
    const double nv = static_cast<double>(g.graph().num_vertices());
    FreeEnergyResult out{beta, {}, method, std::nullopt, {}, 0};
    if (beta == Complex{}) throw Error(ErrorCode::InvalidBeta, "free energy density undefined at beta = 0");
    auto need_dual = [&]() -> const DualEmbedding& {
        if (dual == nullptr) throw Error(ErrorCode::InvalidArgument, "plus boundary condition needs a dual embedding");
        return *dual;
    };
    switch (method) {
        case FreeEnergyMethod::Brute: {
            if (beta.imag() != 0.0) throw Error(ErrorCode::InvalidBeta, "brute-force free energy needs real beta");
            out.log_partition = std::log(partition_bruteforce(g, j, beta, bc).real());
            break;
        }
        case FreeEnergyMethod::Determinant: {
            if (beta.imag() != 0.0 || !(beta.real() > 0.0)) {
                throw Error(ErrorCode::InvalidBeta, "determinant free energy needs real beta > 0");
            }
            const auto z2 = bc == Boundary::Free ? partition_free_kw(g, j, beta) : partition_plus_kw(g, need_dual(), j, beta);
            out.log_partition = 0.5 * z2.log_value.real();
            break;
        }
        case FreeEnergyMethod::TraceSeries: {
            require_positive_real_part(beta);
            Complex prefactor;
            Matrix lambda;
            double norm_bound = 0.0;
            if (bc == Boundary::Free) {
                prefactor = 2.0 * nv * std::numbers::ln2;
                for (const Edge& e : g.graph().edges()) {
                    const Complex arg = beta * j.at(e);
                    if (!cmath::cosh_has_positive_real_part(arg)) {
                        throw Error(ErrorCode::BranchFailure, "Re cosh(beta J) <= 0 on edge " + detail::edge_name(e));
                    }
                    prefactor += 2.0 * cmath::log_cosh(arg);
                }
                const auto w = high_temperature_weights(g.graph(), j, beta);
                const auto xd = options.factorization ? *options.factorization : factorize_symmetric(w);
                norm_bound = operator_norm_conjugated(g.graph(), xd);
                lambda = transition_matrix(g.graph(), w).entries;
            } else {
                const Subtiling gs = dual_subtiling(g, need_dual());
                double total = 0.0;
                for (const Edge& e : g.graph().edges()) total += j.at(e);
                prefactor = 2.0 * beta * total;
                const auto w = low_temperature_weights(gs.graph(), *dual, j, beta);
                const auto xd = options.factorization ? *options.factorization : factorize_symmetric(w);
                norm_bound = operator_norm_conjugated(gs.graph(), xd);
                lambda = transition_matrix(gs.graph(), w).entries;
            }
            const auto series = trace_series_log_det(lambda, norm_bound, options.series_tolerance, options.max_terms);
            out.log_partition = 0.5 * (prefactor + series.log_det);
            out.truncation_error = series.tail_bound;
            out.terms = series.terms;
            break;
        }
    }
    out.value = -out.log_partition / (beta * nv);
    if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag())) {
        throw Error(ErrorCode::InvalidArgument, "free energy is not finite");
    }
    return out;
}

}  // namespace kacward
