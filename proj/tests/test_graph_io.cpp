#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace kacward;

namespace {

ErrorCode code_of(const std::string& text) {
    std::istringstream in(text);
    try {
        to_graph(parse_graph(in));
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;  // sentinel: nothing thrown
}

bool parses(const std::string& text) {
    std::istringstream in(text);
    try {
        to_graph(parse_graph(in));
        return true;
    } catch (const Error&) {
        return false;
    }
}

const std::string kSquare =
    "# unit square\n"
    "vertices 4\n0 0 0\n1 1 0\n2 1 1\n3 0 1\n"
    "edges 4\n0 1\n1 2\n2 3\n0 3\n"
    "faces 1\n4 0 1 2 3\n";

}  // namespace

TEST(GraphFile, ParsesCommentsAndBlankLines) {
    std::istringstream in("\n" + kSquare + "\n# trailing comment\n");
    const auto file = parse_graph(in);
    EXPECT_EQ(file.vertices.size(), 4u);
    EXPECT_EQ(file.edges.size(), 4u);
    EXPECT_FALSE(file.has_dual());
    EXPECT_FALSE(file.has_theta());
    EXPECT_EQ(to_graph(file).num_edges(), 4u);
}

TEST(GraphFile, RoundTripIsExact) {
    for (const auto& iso : {square_patch(2), triangular_patch(2), hexagonal_patch(2)}) {
        std::ostringstream first;
        write_isoradial(first, iso);
        std::istringstream in(first.str());
        const auto back = isoradial_from_file(parse_graph(in));
        std::ostringstream second;
        write_isoradial(second, back);
        EXPECT_EQ(first.str(), second.str());
        for (const auto& [e, t] : iso.theta) EXPECT_EQ(back.theta.at(e), t);
        for (const auto& v : iso.graph->vertices()) EXPECT_EQ(back.graph->position(v.id), v.position);
        EXPECT_EQ(back.dual.pairing().size(), iso.dual.pairing().size());
    }
}

TEST(GraphFile, SectionErrors) {
    EXPECT_EQ(code_of("edges 0\nvertices 0\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("vertices 2\n0 0 0\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("vertices 1\n0 0 0 7\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("vertices 1\n0 0\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("nodes 1\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("vertices\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("vertices 1\n0 0 0\nvertices 1\n1 1 1\n"), ErrorCode::ParseError);
}

TEST(GraphFile, RowErrors) {
    const std::string v = "vertices 3\n0 0 0\n1 1 0\n2 0 1\n";
    EXPECT_EQ(code_of(v + "edges 1\n0\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of(v + "edges 1\n0 1 abc\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of(v + "edges 1\n0 1 0.5 9\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of(v + "edges 3\n0 1\n1 2\n0 2\nfaces 1\n3 0 1\n"), ErrorCode::ParseError);
    EXPECT_TRUE(parses(v + "edges 3\n0 1\n1 2\n0 2\nfaces 1\n3 0 1 2\n"));
}

TEST(GraphFile, PartialThetaRejected) {
    const std::string v = "vertices 3\n0 0 0\n1 1 0\n2 0 1\n";
    EXPECT_EQ(code_of(v + "edges 2\n0 1 0.5\n0 2\n"), ErrorCode::ParseError);
    std::istringstream ok(v + "edges 2\n0 1 0.5\n0 2 0.25\n");
    EXPECT_EQ(parse_graph(ok).theta.size(), 2u);
}

TEST(GraphFile, StructuralErrorsSurfaceFromBuild) {
    const std::string crossing =
        "vertices 4\n0 0 0\n1 1 0\n2 1 1\n3 0 1\nedges 2\n0 2\n1 3\n";
    EXPECT_EQ(code_of(crossing), ErrorCode::CrossingEdges);
    EXPECT_EQ(code_of("vertices 2\n0 0 0\n1 1 0\nedges 2\n0 1\n1 0\n"), ErrorCode::NotSimple);
}

TEST(GraphFile, MissingFile) {
    try {
        load_graph_file("/nonexistent/nothing.graph");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
}

TEST(GraphFile, IsoradialNeedsTheta) {
    std::istringstream in(kSquare);
    EXPECT_THROW(isoradial_from_file(parse_graph(in)), Error);
}

TEST(GraphFile, SampleDataLoads) {
    for (const char* name : {"square_3", "tri_3", "hex_3"}) {
        const auto iso = isoradial_from_file(load_graph_file(std::string(KACWARD_DATA_DIR) + "/" + name + ".graph"));
        EXPECT_FALSE(iso.subtiling().interior().empty()) << name;
        EXPECT_FALSE(iso.dual.pairing().empty()) << name;
    }
}

TEST(Couplings, ParseAndErrors) {
    std::istringstream in("# j\ncouplings 2\n1 0 0.5\n1 2 -0.25\n");
    const auto j = parse_couplings(in);
    EXPECT_EQ(j.at(Edge::of(0, 1)), 0.5);
    EXPECT_EQ(j.at(Edge::of(1, 2)), -0.25);
    for (const char* bad : {"", "couplings 2\n0 1 0.5\n", "couplings 1\n0 1\n", "couplings 1\n0 1 0.5\n1 2 0.5\n", "0 1 0.5\n"}) {
        std::istringstream b(bad);
        EXPECT_THROW(parse_couplings(b), Error) << bad;
    }
}

TEST(Couplings, SampleFileCoversGraph) {
    std::ifstream in(std::string(KACWARD_DATA_DIR) + "/square_2.couplings");
    const auto j = parse_couplings(in);
    const auto g = to_graph(load_graph_file(std::string(KACWARD_DATA_DIR) + "/square_2.graph"));
    ASSERT_EQ(j.size(), g.num_edges());
    for (const auto& e : g.edges()) EXPECT_TRUE(j.contains(e));
}

TEST(MatrixDump, Format) {
    Matrix m(2, 2);
    m << Complex(1, 0), Complex(0, -0.5), Complex(0.1, 2), Complex();
    std::ostringstream out;
    dump_matrix(out, m);
    EXPECT_EQ(out.str(), "1 0  0 -0.5\n0.10000000000000001 2  0 0\n");
}

TEST(MatrixDump, FormatDoubleRoundTrips) {
    oracle::Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.uniform(-20, 20));
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}
