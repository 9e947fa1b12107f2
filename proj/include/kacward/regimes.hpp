#pragma once

// High/low-temperature regimes in the complex beta plane, their envelope
// functions and certified norm bounds for the transition matrices.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <exception>
#include <string_view>
#include <thread>
#include <vector>

#include "kacward/errors.hpp"
#include "kacward/ising.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"
#include "kacward/spectral.hpp"

namespace kacward {

enum class Side { High, Low };

constexpr std::string_view to_string(Side s) { return s == Side::High ? "high" : "low"; }

struct RegimeQuery {
    Complex beta;
    double m = 1.0;
    double M = 1.0;
    Side side = Side::High;
};

namespace detail {

inline void check_bounds(double m, double M) {
    if (!(m > 0.0) || !(m <= M) || !std::isfinite(M)) {
        throw Error(ErrorCode::InvalidArgument, "coupling bounds must satisfy 0 < m <= M < inf");
    }
}

}  // namespace detail

/// Open set: boundary points are outside.
inline bool in_high_regime(Complex beta, double m, double M) {
    detail::check_bounds(m, M);
    const double re = beta.real();
    const double im = beta.imag();
    if (!(re > 0.0 && re < 1.0)) return false;
    if (!(2.0 * M * std::abs(im) < std::numbers::pi / 2)) return false;
    return std::cosh(2.0 * m * re) / (std::cosh(2.0 * m) * std::cos(2.0 * M * im)) < 1.0;
}

inline bool in_low_regime(Complex beta) { return beta.real() > 1.0; }

inline bool in_regime(const RegimeQuery& q) {
    return q.side == Side::High ? in_high_regime(q.beta, q.m, q.M) : in_low_regime(q.beta);
}

/// |tanh(beta j)| / tanh(j). Equal to
/// coth(j) sqrt((cosh(2j Re b) - cos(2j Im b)) / (cosh(2j Re b) + cos(2j Im b)))
/// but evaluated through the overflow-safe tanh.
inline double high_ratio(Complex beta, double j) { return std::abs(cmath::tanh(beta * j)) / std::tanh(j); }

/// |exp(-2 beta j)| / exp(-2 j).
inline double low_ratio(Complex beta, double j) { return std::exp(-2.0 * j * (beta.real() - 1.0)); }

/// L(beta) = sup_{j in [m, M]} |tanh(beta j)| / tanh(j): uniform grid of
/// 2048 points, then golden-section refinement around the best node.
inline double envelope_high(Complex beta, double m, double M) {
    detail::check_bounds(m, M);
    if (!(beta.real() > 0.0)) throw Error(ErrorCode::InvalidBeta, "envelope_high needs Re beta > 0");
    if (m == M) return high_ratio(beta, m);
    constexpr int kGrid = 2048;
    const double h = (M - m) / (kGrid - 1);
    int best = 0;
    double best_value = high_ratio(beta, m);
    for (int k = 1; k < kGrid; ++k) {
        const double v = high_ratio(beta, k == kGrid - 1 ? M : m + k * h);
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }
    double lo = std::max(m, m + (best - 1) * h);
    double hi = std::min(M, m + (best + 1) * h);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = high_ratio(beta, c);
    double fd = high_ratio(beta, d);
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = high_ratio(beta, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = high_ratio(beta, d);
        }
    }
    return std::max({best_value, fc, fd});
}

/// L*(beta) = sup_{j in [m, M]} exp(-2 j (Re beta - 1)), attained at an endpoint.
inline double envelope_low(Complex beta, double m, double M) {
    detail::check_bounds(m, M);
    return beta.real() >= 1.0 ? low_ratio(beta, m) : low_ratio(beta, M);
}

namespace detail {

/// Rescales a contractive base factorization of w(1) into a factorization
/// of w(beta) = ratio_e * w_e(1): each orientation picks up sqrt(ratio_e).
template <class RatioFn>
DirectedWeights rescale(const EmbeddedGraph& g, const DirectedWeights& base, RatioFn ratio) {
    DirectedWeights out;
    for (const DirectedEdge& e : g.directed_edges()) out.emplace(e, lookup(base, e) * std::sqrt(ratio(e.undirected())));
    return out;
}

inline void check_base(const EmbeddedGraph& g, const DirectedWeights& base, const UndirectedWeights& target) {
    for (const Edge& e : g.edges()) {
        const Complex product = lookup(base, DirectedEdge{e.a, e.b}) * lookup(base, DirectedEdge{e.b, e.a});
        const Complex want = lookup(target, e);
        if (std::abs(product - want) > 1e-9 * std::abs(want)) {
            throw Error(ErrorCode::InvalidArgument, "base weights do not factorize the target on edge " + edge_name(e));
        }
    }
    const auto report = is_contractive(g, base);
    if (!report.contractive) {
        throw Error(ErrorCode::NotContractive, "base factorization violates the arctan condition (min slack " +
                                                   std::to_string(report.min_slack) + ")");
    }
}

}  // namespace detail

/// Factorization of tanh(beta J) on g obtained by scaling a contractive
/// factorization of tanh(J).
inline DirectedWeights high_factorization(const EmbeddedGraph& g, const CouplingSystem& j, Complex beta,
                                          const DirectedWeights& base) {
    UndirectedWeights target;
    for (const Edge& e : g.edges()) target.emplace(e, std::tanh(j.at(e)));
    detail::check_base(g, base, target);
    return detail::rescale(g, base, [&](Edge e) {
        const double jj = j.at(e);
        return cmath::tanh(beta * jj) / std::tanh(jj);
    });
}

/// Factorization of exp(-2 beta J) on the dual subtiling graph obtained by
/// scaling a contractive factorization of exp(-2 J).
inline DirectedWeights low_factorization(const EmbeddedGraph& dual_graph, const DualEmbedding& dual,
                                         const CouplingSystem& j, Complex beta, const DirectedWeights& base) {
    UndirectedWeights target;
    for (const Edge& es : dual_graph.edges()) target.emplace(es, std::exp(-2.0 * j.at(dual.primal_edge(es))));
    detail::check_base(dual_graph, base, target);
    return detail::rescale(dual_graph, base, [&](Edge es) {
        return std::exp(-2.0 * (beta - 1.0) * j.at(dual.primal_edge(es)));
    });
}

/// max_z xi^z of the rescaled factorization; dominates the spectral radius
/// of Lambda(tanh beta J) on g.
inline double certified_norm_bound_high(const EmbeddedGraph& g, const CouplingSystem& j, Complex beta,
                                        const DirectedWeights& base) {
    if (!(beta.real() > 0.0)) throw Error(ErrorCode::InvalidBeta, "high-temperature weights need Re beta > 0");
    return operator_norm_conjugated(g, high_factorization(g, j, beta, base));
}

/// Same for Lambda(exp(-2 beta J)) on the dual subtiling graph.
inline double certified_norm_bound_low(const EmbeddedGraph& dual_graph, const DualEmbedding& dual,
                                       const CouplingSystem& j, Complex beta, const DirectedWeights& base) {
    return operator_norm_conjugated(dual_graph, low_factorization(dual_graph, dual, j, beta, base));
}

inline double certified_norm_bound(const Subtiling& g, const CouplingSystem& j, Complex beta, Side side,
                                   const DirectedWeights& base, const DualEmbedding* dual = nullptr) {
    if (side == Side::High) return certified_norm_bound_high(g.graph(), j, beta, base);
    if (dual == nullptr) throw Error(ErrorCode::InvalidArgument, "low-temperature bound needs the dual embedding");
    const Subtiling gs = dual_subtiling(g, *dual);
    return certified_norm_bound_low(gs.graph(), *dual, j, beta, base);
}

struct BetaGrid {
    double re_lo = 0.0, re_hi = 0.0;
    std::size_t re_n = 0;
    double im_lo = 0.0, im_hi = 0.0;
    std::size_t im_n = 0;

    static double node(double lo, double hi, std::size_t n, std::size_t k) {
        return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }

    /// Row-major over Re beta, Im beta varying fastest.
    std::vector<Complex> points() const {
        std::vector<Complex> out;
        for (std::size_t a = 0; a < re_n; ++a) {
            for (std::size_t b = 0; b < im_n; ++b) out.emplace_back(node(re_lo, re_hi, re_n, a), node(im_lo, im_hi, im_n, b));
        }
        return out;
    }
};

struct RegimeRow {
    Complex beta;
    bool in_high = false;
    bool in_low = false;
    std::optional<double> l_high;
    double l_low = 0.0;
    std::optional<double> cert_bound;
    std::optional<double> rho_exact;
};

/// Graph-dependent part of a scan. The high side applies for Re beta <= 1,
/// the low side (on the dual subtiling) for Re beta > 1.
struct ScanContext {
    const Subtiling* graph = nullptr;
    const CouplingSystem* couplings = nullptr;
    std::optional<DirectedWeights> high_base;
    const DualEmbedding* dual = nullptr;
    std::optional<DirectedWeights> low_base;  // on the dual subtiling graph
    std::size_t exact_rho_limit = 300;        // directed edges
    std::size_t threads = 0;                  // 0: hardware concurrency
};

inline std::vector<RegimeRow> regime_scan(const std::vector<Complex>& betas, double m, double M,
                                          const ScanContext* ctx = nullptr) {
    detail::check_bounds(m, M);
    std::optional<Subtiling> dual_sub;
    if (ctx != nullptr && ctx->dual != nullptr && ctx->low_base && ctx->graph != nullptr) {
        dual_sub = dual_subtiling(*ctx->graph, *ctx->dual);
    }
    auto evaluate = [&](Complex beta) {
        RegimeRow row;
        row.beta = beta;
        row.in_high = in_high_regime(beta, m, M);
        row.in_low = in_low_regime(beta);
        if (beta.real() > 0.0) row.l_high = envelope_high(beta, m, M);
        row.l_low = envelope_low(beta, m, M);
        if (ctx != nullptr && ctx->graph != nullptr && ctx->couplings != nullptr) {
            const auto& g = ctx->graph->graph();
            const auto& j = *ctx->couplings;
            if (beta.real() <= 1.0) {
                if (ctx->high_base && beta.real() > 0.0) {
                    row.cert_bound = certified_norm_bound_high(g, j, beta, *ctx->high_base);
                    if (g.num_directed_edges() <= ctx->exact_rho_limit) {
                        row.rho_exact = spectral_radius(transition_matrix(g, high_temperature_weights(g, j, beta)));
                    }
                }
            } else if (dual_sub) {
                const auto& gs = dual_sub->graph();
                row.cert_bound = certified_norm_bound_low(gs, *ctx->dual, j, beta, *ctx->low_base);
                if (gs.num_directed_edges() <= ctx->exact_rho_limit) {
                    row.rho_exact = spectral_radius(transition_matrix(gs, low_temperature_weights(gs, *ctx->dual, j, beta)));
                }
            }
        }
        return row;
    };
    // Rows are independent; workers fill them by index so the table order
    // does not depend on scheduling.
    std::vector<RegimeRow> rows(betas.size());
    std::vector<std::exception_ptr> errors(betas.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < betas.size(); k = next++) {
            try {
                rows[k] = evaluate(betas[k]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::size_t workers = ctx != nullptr && ctx->threads > 0 ? ctx->threads : std::thread::hardware_concurrency();
    workers = std::min(std::max<std::size_t>(workers, 1), betas.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

inline std::vector<RegimeRow> regime_scan(const BetaGrid& grid, double m, double M, const ScanContext* ctx = nullptr) {
    return regime_scan(grid.points(), m, M, ctx);
}

}  // namespace kacward
