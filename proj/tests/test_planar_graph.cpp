#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace kacward;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no kacward::Error thrown";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(BuildGraph, UnitSquareIsValidWithDegreeTwo) {
    const auto g = oracle::unit_square();
    EXPECT_EQ(g.num_vertices(), 4u);
    EXPECT_EQ(g.num_edges(), 4u);
    EXPECT_EQ(g.num_directed_edges(), 8u);
    for (const auto& v : g.vertices()) EXPECT_EQ(g.degree(v.id), 2u);
}

TEST(BuildGraph, CrossingDiagonalsRejected) {
    const auto err = code_of([] {
        build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}}}, {{0, 2}, {1, 3}}, {});
    });
    EXPECT_EQ(err, ErrorCode::CrossingEdges);
}

TEST(BuildGraph, CrossingMessageNamesBothEdges) {
    try {
        build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}}}, {{0, 2}, {1, 3}}, {});
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("{0,2}"), std::string::npos) << msg;
        EXPECT_NE(msg.find("{1,3}"), std::string::npos) << msg;
    }
}

TEST(BuildGraph, OverlappingCollinearEdgesRejected) {
    const auto err = code_of([] { build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {2, 0}}}, {{0, 1}, {0, 2}}, {}); });
    EXPECT_EQ(err, ErrorCode::CrossingEdges);
}

TEST(BuildGraph, LoopIsNotSimple) {
    EXPECT_EQ(code_of([] { build_graph({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1}, {1, 1}}, {}); }), ErrorCode::NotSimple);
}

TEST(BuildGraph, RepeatedEdgeIsNotSimple) {
    EXPECT_EQ(code_of([] { build_graph({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1}, {1, 0}}, {}); }), ErrorCode::NotSimple);
}

TEST(BuildGraph, UnknownEndpointIsDangling) {
    EXPECT_EQ(code_of([] { build_graph({{0, {0, 0}}, {1, {1, 0}}}, {{0, 7}}, {}); }), ErrorCode::DanglingEdge);
}

TEST(BuildGraph, DegreeZeroVertexRejected) {
    EXPECT_EQ(code_of([] { build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {5, 5}}}, {{0, 1}}, {}); }), ErrorCode::IsolatedVertex);
}

TEST(BuildGraph, ClockwiseFaceRejected) {
    EXPECT_EQ(code_of([] {
                  build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}}}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}},
                              {{0, 3, 2, 1}});
              }),
              ErrorCode::InvalidFace);
}

TEST(BuildGraph, FaceUsingMissingEdgeRejected) {
    EXPECT_EQ(code_of([] {
                  build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}}}, {{0, 1}, {1, 2}, {2, 3}}, {{0, 1, 2, 3}});
              }),
              ErrorCode::InvalidFace);
}

TEST(BuildGraph, DuplicatePositionRejected) {
    EXPECT_EQ(code_of([] { build_graph({{0, {0, 0}}, {1, {0, 0}}}, {{0, 1}}, {}); }), ErrorCode::InvalidArgument);
}

TEST(TurningAngle, Examples) {
    EXPECT_DOUBLE_EQ(turning_angle(Point(1, 0), Point(1, 0)), 0.0);
    EXPECT_NEAR(turning_angle(Point(1, 0), Point(0, 1)), kPi / 2, 1e-15);
    EXPECT_EQ(turning_angle(Point(1, 0), Point(-1, 0)), kPi);
    // -pi from std::arg is mapped to +pi.
    EXPECT_EQ(turning_angle(Point(1, 0), Point(-1, -0.0)), kPi);
}

TEST(TurningAngle, ZeroLengthEdge) {
    EXPECT_EQ(code_of([] { turning_angle(Point(0, 0), Point(1, 0)); }), ErrorCode::DegenerateEdge);
}

TEST(TurningAngle, GraphMethodsOnPath) {
    const auto g = build_graph({{0, {0, 0}}, {1, {1, 0}}, {2, {2, 0}}, {3, {1, 1}}}, {{0, 1}, {1, 2}, {1, 3}}, {});
    EXPECT_DOUBLE_EQ(g.turning_angle({0, 1}, {1, 2}), 0.0);
    EXPECT_NEAR(g.turning_angle({0, 1}, {1, 3}), kPi / 2, 1e-15);
    EXPECT_EQ(g.turning_angle({0, 1}, {1, 0}), kPi);
}

TEST(TurningAngle, SelfIsZeroOnLattices) {
    for (const auto& iso : {square_patch(3), triangular_patch(2), hexagonal_patch(2)}) {
        for (const auto& e : iso.graph->directed_edges()) EXPECT_EQ(iso.graph->turning_angle(e, e), 0.0);
    }
}

TEST(TurningAngle, ReflectionAntisymmetryExhaustive) {
    for (const auto& iso : {square_patch(3), triangular_patch(2), hexagonal_patch(2)}) {
        const auto& g = *iso.graph;
        for (const auto& v : g.vertices()) {
            for (const auto& e : g.out_edges(v.id)) {
                for (const auto& h : g.out_edges(v.id)) {
                    if (e == h) continue;
                    EXPECT_NEAR(g.turning_angle(-e, h), -g.turning_angle(-h, e), 1e-13);
                }
            }
        }
    }
}

TEST(TurningAngle, ThreeEdgeIdentityOnRandomStars) {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vertex> v{{0, {0, 0}}};
        std::vector<Edge> e;
        const int degree = 3 + trial % 5;
        std::vector<double> angles;
        for (int k = 0; k < degree; ++k) angles.push_back(rng.uniform(-kPi, kPi));
        std::sort(angles.begin(), angles.end());
        bool separated = true;
        for (int k = 0; k + 1 < degree; ++k) separated = separated && angles[k + 1] - angles[k] > 1e-3;
        if (!separated) continue;
        for (int k = 0; k < degree; ++k) {
            v.push_back({k + 1, std::polar(rng.uniform(0.5, 2.0), angles[k])});
            e.push_back({0, k + 1});
        }
        const auto g = build_graph(v, e, {});
        const auto out = g.out_edges(0);
        for (const auto& e1 : out) {
            for (const auto& e2 : out) {
                for (const auto& h : out) {
                    if (e1 == e2 || e1 == h || e2 == h) continue;
                    const double lhs = g.turning_angle(-e1, h);
                    const double rhs = g.turning_angle(-e2, h) + g.turning_angle(-e1, e2) + kPi;
                    const double diff = std::remainder(lhs - rhs, 2 * kPi);
                    EXPECT_NEAR(diff, 0.0, 1e-12);
                }
            }
        }
    }
}

TEST(DirectedEdge, ReversalIsInvolution) {
    const DirectedEdge e{3, 7};
    EXPECT_EQ(-(-e), e);
    EXPECT_EQ(e.undirected(), (Edge{3, 7}));
    EXPECT_EQ((-e).undirected(), e.undirected());
}

TEST(OutEdges, SquareLatticeCenterCounterclockwise) {
    const auto iso = square_patch(2);
    const auto& g = *iso.graph;
    VertexId center = -1;
    for (const auto& v : g.vertices()) {
        if (g.degree(v.id) == 4) center = v.id;
    }
    ASSERT_GE(center, 0);
    const auto out = out_edges(g, center);
    ASSERT_EQ(out.size(), 4u);
    std::vector<Point> dirs;
    for (const auto& e : out) dirs.push_back(g.direction(e) / std::abs(g.direction(e)));
    // Canonical start is the angle closest above -pi: south, then east, north, west.
    const std::vector<Point> want{{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(dirs[k] - want[k]), 0.0, 1e-12);
    // Cyclically this is east, north, west, south.
    std::rotate(dirs.begin(), dirs.begin() + 1, dirs.end());
    EXPECT_NEAR(std::abs(dirs[0] - Point(1, 0)), 0.0, 1e-12);
}

TEST(OutEdges, DegreeOneAndUnknownVertex) {
    const auto g = build_graph({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1}}, {});
    EXPECT_EQ(out_edges(g, 0).size(), 1u);
    EXPECT_EQ(code_of([&] { out_edges(g, 5); }), ErrorCode::UnknownVertex);
}

TEST(OutEdges, CanonicalOrderSortedByTailThenAngle) {
    const auto iso = hexagonal_patch(2);
    const auto d = iso.graph->directed_edges();
    for (std::size_t k = 1; k < d.size(); ++k) {
        if (d[k - 1].tail == d[k].tail) {
            EXPECT_LT(geometry::principal_arg(iso.graph->direction(d[k - 1])), geometry::principal_arg(iso.graph->direction(d[k])));
        } else {
            EXPECT_LT(d[k - 1].tail, d[k].tail);
        }
    }
}

TEST(Subtiling, FullThreeByThreeSquareBlock) {
    const auto iso = square_patch(3);
    const auto sub = full_subtiling(iso.graph);
    EXPECT_EQ(sub.graph().num_vertices(), 16u);
    EXPECT_EQ(sub.graph().num_edges(), 24u);
    EXPECT_EQ(sub.boundary().size(), 12u);
    EXPECT_EQ(sub.interior().size(), 4u);
}

TEST(Subtiling, SingleFaceAllBoundary) {
    const auto g = share(oracle::unit_square());
    const auto sub = subtiling(g, {0});
    EXPECT_EQ(sub.boundary().size(), 4u);
    EXPECT_TRUE(sub.interior().empty());
}

TEST(Subtiling, TwoByTwoBlockHasOneInteriorVertex) {
    const auto iso = square_patch(2);
    const auto sub = full_subtiling(iso.graph);
    ASSERT_EQ(sub.interior().size(), 1u);
    EXPECT_EQ(iso.graph->degree(sub.interior().front()), 4u);
}

TEST(Subtiling, PartialSelectionInsideLargerPatch) {
    const auto iso = square_patch(3);
    // Faces are listed row by row; pick the bottom-left 2x2 block.
    const auto sub = subtiling(iso.graph, {0, 1, 3, 4});
    EXPECT_EQ(sub.graph().num_vertices(), 9u);
    EXPECT_EQ(sub.graph().num_edges(), 12u);
    EXPECT_EQ(sub.boundary().size(), 8u);
    // The center vertex of the 3x3 block touches unselected faces and is on the boundary.
    const auto center = subtiling(iso.graph, {4});
    EXPECT_EQ(center.boundary().size(), 4u);
}

TEST(Subtiling, UnknownFace) {
    const auto g = share(oracle::unit_square());
    EXPECT_EQ(code_of([&] { subtiling(g, {3}); }), ErrorCode::UnknownFace);
    EXPECT_EQ(code_of([&] { subtiling(g, {}); }), ErrorCode::UnknownFace);
}

TEST(DualSubtiling, ThreeByThreeBlock) {
    const auto iso = square_patch(3);
    const auto gs = dual_subtiling(iso.subtiling(), iso.dual);
    EXPECT_EQ(gs.face_ids().size(), 4u);
    EXPECT_EQ(gs.graph().num_edges(), 12u);
}

TEST(DualSubtiling, TwoByTwoBlockIsFourDualEdges) {
    const auto iso = square_patch(2);
    const auto gs = dual_subtiling(iso.subtiling(), iso.dual);
    EXPECT_EQ(gs.face_ids().size(), 1u);
    EXPECT_EQ(gs.graph().num_edges(), 4u);
    EXPECT_EQ(gs.graph().num_vertices(), 4u);
}

TEST(DualSubtiling, SingleFaceHasEmptyInterior) {
    const auto iso = square_patch(1);
    EXPECT_EQ(code_of([&] { dual_subtiling(iso.subtiling(), iso.dual); }), ErrorCode::EmptyInterior);
}

TEST(DualSubtiling, InteriorIsSmallerBlock) {
    for (int n = 3; n <= 5; ++n) {
        const auto iso = square_patch(n);
        const auto gs = dual_subtiling(iso.subtiling(), iso.dual);
        const auto m = static_cast<std::size_t>(n - 1);
        EXPECT_EQ(gs.face_ids().size(), m * m) << n;
        EXPECT_EQ(gs.interior().size(), (m - 1) * (m - 1)) << n;
    }
}

TEST(DualEmbedding, PairingRespectsIncidence) {
    const auto iso = square_patch(3);
    const auto& g = *iso.graph;
    for (const auto& [e, es] : iso.dual.pairing()) {
        const int f1 = g.left_face({e.a, e.b});
        const int f2 = g.left_face({e.b, e.a});
        ASSERT_GE(f1, 0);
        ASSERT_GE(f2, 0);
        EXPECT_EQ(es, Edge::of(f1, f2));
        EXPECT_EQ(iso.dual.primal_edge(es), e);
    }
    // Interior primal edges only: 24 edges minus 12 on the outer cycle.
    EXPECT_EQ(iso.dual.pairing().size(), 12u);
}

TEST(DualEmbedding, PositionOutsideFaceRejected) {
    const auto g = share(oracle::unit_square());
    EXPECT_THROW(make_dual(g, {{0, Point(3, 3)}}), Error);
}

TEST(Geometry, PolygonAreaAndContainment) {
    const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    EXPECT_DOUBLE_EQ(geometry::signed_area(sq), 1.0);
    EXPECT_TRUE(geometry::point_in_polygon(sq, {0.5, 0.5}));
    EXPECT_FALSE(geometry::point_in_polygon(sq, {1.5, 0.5}));
}
