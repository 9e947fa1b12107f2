#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "oracles.hpp"

using namespace kacward;

namespace {

constexpr double kPi = std::numbers::pi;

double theta_sum(const IsoradialGraph& g, VertexId z) {
    double sum = 0.0;
    for (const auto& e : g.graph->out_edges(z)) sum += g.theta.at(e.undirected());
    return sum;
}

// Rows of unit rhombi with horizontal side u = 1 and the other side
// alternating between e^{i pi/3} and e^{2 i pi/3}. Lattice points of even
// parity are primal.
RhombicTiling two_angle_strip(int columns, int rows) {
    std::vector<Point> row_offset{0.0};
    for (int r = 0; r < rows; ++r) row_offset.push_back(row_offset.back() + std::polar(1.0, r % 2 == 0 ? kPi / 3 : 2 * kPi / 3));
    auto p = [&](int i, int j) { return row_offset[static_cast<std::size_t>(j)] + static_cast<double>(i); };
    RhombicTiling t;
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < columns; ++i) {
            if ((i + j) % 2 == 0) {
                t.rhombi.push_back({{p(i, j), p(i + 1, j), p(i + 1, j + 1), p(i, j + 1)}});
            } else {
                t.rhombi.push_back({{p(i + 1, j), p(i + 1, j + 1), p(i, j + 1), p(i, j)}});
            }
        }
    }
    return t;
}

std::string serialize(const RhombicTiling& t) {
    std::ostringstream out;
    out << "rhombi " << t.rhombi.size() << '\n';
    for (const auto& r : t.rhombi) {
        for (Point c : r.corners) out << format_double(c.real()) << ' ' << format_double(c.imag()) << ' ';
        out << '\n';
    }
    return out.str();
}

}  // namespace

TEST(SquarePatch, SingleSquare) {
    const auto g = square_patch(1);
    EXPECT_EQ(g.graph->num_vertices(), 4u);
    EXPECT_EQ(g.graph->num_edges(), 4u);
    for (const auto& [e, t] : g.theta) EXPECT_NEAR(t, kPi / 4, 1e-15);
    const auto poly = g.graph->face_polygon(0);
    const Point c = detail::circumcenter(poly[0], poly[1], poly[2]);
    for (Point p : poly) EXPECT_NEAR(std::abs(p - c), 1.0, 1e-15);
}

TEST(SquarePatch, ThreeByThreeCountsAndAngleSums) {
    const auto g = square_patch(3);
    EXPECT_EQ(g.graph->num_vertices(), 16u);
    EXPECT_EQ(g.graph->num_edges(), 24u);
    const auto sub = g.subtiling();
    for (VertexId z : sub.interior()) EXPECT_NEAR(theta_sum(g, z), kPi, 1e-14);
}

TEST(SquarePatch, DualAnglesComplementary) {
    const auto g = square_patch(3);
    for (const auto& [e, es] : g.dual.pairing()) EXPECT_NEAR(g.theta.at(e) + g.dual_theta(es), kPi / 2, 1e-15);
    for (const auto& [e, es] : g.dual.pairing()) EXPECT_NEAR(g.dual_theta(es), kPi / 4, 1e-14);
}

TEST(Patches, InteriorAngleSumsAreStraight) {
    for (const auto& g : {triangular_patch(3), hexagonal_patch(3), square_patch(4)}) {
        const auto sub = g.subtiling();
        ASSERT_FALSE(sub.interior().empty());
        for (VertexId z : sub.interior()) EXPECT_NEAR(theta_sum(g, z), kPi, 1e-13);
    }
}

TEST(Patches, CountsForSmallCases) {
    const auto pair = triangular_patch(1);
    EXPECT_EQ(pair.graph->num_vertices(), 4u);
    EXPECT_EQ(pair.graph->num_edges(), 5u);
    const auto cell = hexagonal_patch(1);
    EXPECT_EQ(cell.graph->num_vertices(), 6u);
    EXPECT_EQ(cell.graph->num_edges(), 6u);
    const auto hex2 = hexagonal_patch(2);
    EXPECT_EQ(hex2.graph->num_vertices(), 16u);
    EXPECT_EQ(hex2.graph->num_edges(), 19u);
}

TEST(Patches, RejectNonPositiveSize) {
    EXPECT_THROW(square_patch(0), Error);
    EXPECT_THROW(triangular_patch(-1), Error);
    EXPECT_THROW(hexagonal_patch(0), Error);
}

TEST(Zinvariant, ClassicalCouplings) {
    const auto sq = zinvariant_couplings(square_patch(2));
    EXPECT_NEAR(sq.m, 0.440687, 1e-6);
    EXPECT_NEAR(std::tanh(sq.M), std::sqrt(2.0) - 1, 1e-12);
    const auto tri = zinvariant_couplings(triangular_patch(2));
    EXPECT_NEAR(std::tanh(tri.m), 2 - std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(std::tanh(tri.M), 0.267949, 1e-6);
    const auto hex = zinvariant_couplings(hexagonal_patch(2));
    EXPECT_NEAR(hex.M, 0.658479, 1e-6);
    EXPECT_NEAR(std::tanh(hex.m), 1 / std::sqrt(3.0), 1e-12);
}

TEST(Zinvariant, DualWeightIdentity) {
    for (const auto& g : {square_patch(3), triangular_patch(2), hexagonal_patch(2)}) {
        const auto j = zinvariant_couplings(g);
        for (const auto& [e, es] : g.dual.pairing()) {
            EXPECT_NEAR(std::exp(-2 * j.at(e)), std::tan(g.dual_theta(es) / 2), 1e-12);
        }
    }
}

TEST(Zinvariant, RejectsWideAngles) {
    auto g = square_patch(1);
    g.theta.begin()->second = kPi / 2;
    try {
        zinvariant_couplings(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AngleOutOfBounds);
    }
}

TEST(Zinvariant, FactorizationArctanSums) {
    const auto sq = square_patch(3);
    const auto xs = zinvariant_factorization(sq);
    const auto sub = sq.subtiling();
    for (VertexId z : sub.interior()) {
        double sum = 0.0;
        for (const auto& e : sq.graph->out_edges(z)) sum += std::atan(std::norm(xs.at(e)));
        EXPECT_NEAR(sum, kPi / 2, 1e-14);
    }
    const auto tri = triangular_patch(3);
    const auto xt = zinvariant_factorization(tri);
    for (VertexId z : tri.subtiling().interior()) {
        EXPECT_EQ(tri.graph->degree(z), 6u);
        double sum = 0.0;
        for (const auto& e : tri.graph->out_edges(z)) sum += std::atan(std::norm(xt.at(e)));
        EXPECT_NEAR(sum, kPi / 2, 1e-14);
    }
    for (VertexId z : sub.boundary()) {
        double sum = 0.0;
        for (const auto& e : sq.graph->out_edges(z)) sum += std::atan(std::norm(xs.at(e)));
        EXPECT_LT(sum, kPi / 2);
    }
}

TEST(Duality, TriangularDualIsHexagonalWithComplementaryAngles) {
    const auto tri = triangular_patch(3);
    const auto gs = dual_subtiling(tri.subtiling(), tri.dual);
    ASSERT_GT(gs.graph().num_edges(), 0u);
    for (const auto& es : gs.graph().edges()) EXPECT_NEAR(tri.dual_theta(es), kPi / 3, 1e-13);
    for (VertexId z : gs.interior()) EXPECT_EQ(gs.graph().degree(z), 3u);
    for (std::size_t f = 0; f < gs.graph().faces().size(); ++f) EXPECT_EQ(gs.graph().faces()[f].size(), 6u);
}

TEST(Rhombic, SquareMatchesGenerator) {
    const double s = std::numbers::sqrt2;
    const std::vector<Point> sq{0.0, s, Point(s, s), Point(0, s)};
    const Point center(s / 2, s / 2);
    RhombicTiling t;
    for (int k = 0; k < 4; ++k) {
        const Point a = sq[static_cast<std::size_t>(k)];
        const Point b = sq[static_cast<std::size_t>((k + 1) % 4)];
        const Point outer = a + b - center;
        t.rhombi.push_back({{a, outer, b, center}});
    }
    std::istringstream in(serialize(t));
    const auto got = rhombic_graph(parse_rhombic(in));
    const auto want = square_patch(1);
    ASSERT_EQ(got.graph->num_vertices(), want.graph->num_vertices());
    for (const auto& v : want.graph->vertices()) EXPECT_NEAR(std::abs(got.graph->position(v.id) - v.position), 0.0, 1e-12);
    EXPECT_TRUE(std::equal(got.graph->edges().begin(), got.graph->edges().end(), want.graph->edges().begin(),
                           want.graph->edges().end()));
    for (const auto& [e, theta] : want.theta) EXPECT_NEAR(got.theta.at(e), theta, 1e-12);
}

TEST(Rhombic, TwoAngleStripAccepted) {
    const auto g = rhombic_graph(two_angle_strip(8, 6));
    std::set<long> angles;
    for (const auto& [e, t] : g.theta) {
        const bool ok = std::abs(t - kPi / 6) < 1e-9 || std::abs(t - kPi / 3) < 1e-9;
        EXPECT_TRUE(ok) << t;
        angles.insert(std::lround(t * 1e6));
    }
    EXPECT_EQ(angles.size(), 2u);
    const auto sub = g.subtiling();
    ASSERT_FALSE(sub.interior().empty());
    for (VertexId z : sub.interior()) EXPECT_NEAR(theta_sum(g, z), kPi, 1e-12);
    EXPECT_NEAR(operator_norm_conjugated(*g.graph, zinvariant_factorization(g)), 1.0, 1e-12);
    for (const auto& [e, es] : g.dual.pairing()) EXPECT_NEAR(g.theta.at(e) + g.dual_theta(es), kPi / 2, 1e-12);
}

TEST(Rhombic, UnequalSidesRejected) {
    RhombicTiling t;
    t.rhombi.push_back({{Point(0, 0), Point(1, 0), Point(1, 1.1), Point(0, 1.1)}});
    try {
        rhombic_graph(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotRhombic);
    }
}

TEST(Rhombic, DeclaredAngleBoundsEnforced) {
    auto t = two_angle_strip(8, 6);
    t.angle_bounds = std::pair{0.6, 1.2};  // excludes pi/6
    try {
        rhombic_graph(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AngleOutOfBounds);
    }
    t.angle_bounds = std::pair{0.5, 1.1};
    EXPECT_NO_THROW(rhombic_graph(t));
}

TEST(Rhombic, InconsistentColoringRejected) {
    RhombicTiling t;
    t.rhombi.push_back({{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}});
    t.rhombi.push_back({{Point(2, 0), Point(2, 1), Point(1, 1), Point(1, 0)}});  // (1,0) now primal
    EXPECT_THROW(rhombic_graph(t), Error);
}

TEST(Rhombic, ParseErrors) {
    std::istringstream short_row("rhombi 1\n0 0 1 0 1 1\n");
    EXPECT_THROW(parse_rhombic(short_row), Error);
    std::istringstream missing("rhombi 2\n0 0 1 0 1 1 0 1\n");
    EXPECT_THROW(parse_rhombic(missing), Error);
    std::istringstream unknown("squares 1\n");
    EXPECT_THROW(parse_rhombic(unknown), Error);
}

TEST(Rhombic, DataFileLoads) {
    const auto g = rhombic_from_file(std::string(KACWARD_DATA_DIR) + "/two_angle_strip.rhombi");
    EXPECT_GT(g.graph->num_edges(), 0u);
    EXPECT_NEAR(g.k, kPi / 6, 1e-9);
    EXPECT_NEAR(g.K, kPi / 3, 1e-9);
}

TEST(IsoradialFromFaces, OffCenterFaceRejected) {
    // Obtuse triangle: circumcenter falls outside.
    const Point a = std::polar(1.0, -0.2), b = std::polar(1.0, 0.2), c = std::polar(1.0, 1.0);
    EXPECT_THROW(isoradial_from_faces({{a, b, c}}), Error);
    // Circumradius 2.
    EXPECT_THROW(isoradial_from_faces({{Point(0, 0), Point(2 * std::sqrt(3.0), 0), Point(std::sqrt(3.0), 3)}}), Error);
}
