#pragma once

// Closed-form operator norm of the conjugated transition matrix via the
// per-vertex roots xi^z, plus dense reference spectral computations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kacward/errors.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"

namespace kacward {

struct XiQuery {
    VertexId vertex = 0;
    std::vector<double> squared_moduli;  // |x(e)|^2 over Out(z), all > 0
};

namespace detail {

inline std::vector<double> squared_moduli(const EmbeddedGraph& g, const DirectedWeights& xd, VertexId z) {
    std::vector<double> out;
    for (const DirectedEdge& e : g.out_edges(z)) out.push_back(std::norm(lookup(xd, e)));
    return out;
}

inline double arctan_sum(std::span<const double> a, double s) {
    double sum = 0.0;
    for (double v : a) sum += std::atan(v / s);
    return sum;
}

}  // namespace detail

/// Re prod_{e in Out(z)} (t + i |x(e)|^2), which equals det(t Id - B^z).
inline double charpoly_bz(std::span<const double> squared_moduli, double t) {
    Complex product{1.0, 0.0};
    for (double a : squared_moduli) product *= Complex{t, a};
    return product.real();
}

inline double charpoly_bz(const EmbeddedGraph& g, const DirectedWeights& xd, VertexId z, double t) {
    return charpoly_bz(detail::squared_moduli(g, xd, z), t);
}

/// Unique s >= 0 with sum_i arctan(a_i / s) = pi/2. Zero for degree one.
inline double xi(const XiQuery& q) {
    const auto& a = q.squared_moduli;
    if (a.empty()) throw Error(ErrorCode::InvalidArgument, "xi of a vertex without out-edges");
    for (double v : a) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "squared moduli must be finite and positive");
        }
    }
    if (a.size() == 1) return 0.0;

    constexpr double kHalfPi = std::numbers::pi / 2;
    double lo = 0.0;
    double hi = 0.0;
    for (double v : a) hi += v;
    // arctan(u) <= u puts the sum at hi below 1 < pi/2.
    if (!(detail::arctan_sum(a, hi) < kHalfPi)) throw Error(ErrorCode::NoConvergence, "invalid xi bracket");
    // Bisect until the bracket cannot shrink further; well inside 200 steps.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (detail::arctan_sum(a, mid) > kHalfPi) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double vertex_xi(const EmbeddedGraph& g, const DirectedWeights& xd, VertexId z) {
    return xi({z, detail::squared_moduli(g, xd, z)});
}

/// ||Lambda(x_dir)|| = max_z xi^z(x_dir).
inline double operator_norm_conjugated(const EmbeddedGraph& g, const DirectedWeights& xd) {
    double best = 0.0;
    for (const Vertex& v : g.vertices()) best = std::max(best, vertex_xi(g, xd, v.id));
    return best;
}

/// Full spectrum of a dense complex matrix. Each eigenpair is checked to
/// satisfy ||M v - lambda v|| <= 1e-8 ||M||.
inline Eigen::VectorXcd eigenvalues(const Matrix& m) {
    if (m.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Matrix> solver(m, true);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigenvalue iteration did not converge");
    const double scale = std::max(m.norm(), 1e-300);
    const Matrix residual = m * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal();
    for (Eigen::Index k = 0; k < residual.cols(); ++k) {
        const double vnorm = solver.eigenvectors().col(k).norm();
        if (residual.col(k).norm() > 1e-8 * scale * std::max(vnorm, 1.0)) {
            throw Error(ErrorCode::NoConvergence, "eigenpair residual above tolerance");
        }
    }
    return solver.eigenvalues();
}

inline double spectral_radius(const Matrix& m) {
    double best = 0.0;
    const auto ev = eigenvalues(m);
    for (Eigen::Index k = 0; k < ev.size(); ++k) best = std::max(best, std::abs(ev[k]));
    return best;
}

inline double spectral_radius(const KacWardMatrix& m) { return spectral_radius(m.entries); }

/// Largest singular value by SVD, independent of the xi route.
inline double largest_singular_value(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

struct ContractivityReport {
    bool contractive = true;
    std::map<VertexId, double> slack;  // pi/2 - sum arctan |x|^2 per vertex
    double min_slack = INFINITY;
};

/// Slack below this is treated as an equality, so Z-invariant weights whose
/// sums hit pi/2 up to rounding count as contractive.
inline constexpr double kContractiveTolerance = 1e-12;

inline ContractivityReport is_contractive(const EmbeddedGraph& g, const DirectedWeights& xd) {
    ContractivityReport report;
    for (const Vertex& v : g.vertices()) {
        double sum = 0.0;
        for (double a : detail::squared_moduli(g, xd, v.id)) sum += std::atan(a);
        const double slack = std::numbers::pi / 2 - sum;
        report.slack.emplace(v.id, slack);
        report.min_slack = std::min(report.min_slack, slack);
        if (slack < -kContractiveTolerance) report.contractive = false;
    }
    return report;
}

}  // namespace kacward
