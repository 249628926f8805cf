#include <gtest/gtest.h>

#include <regex>

#include "support.hpp"
#include "tsl/osc.hpp"

using namespace tsl;
using tsl_test::net;

namespace {

Scenario first_scenario(const std::string& example) {
    auto n = compile(parse_network(tsl_test::slurp(tsl_test::data_path("requests/" + example + ".req"))));
    return parse_scenarios(tsl_test::slurp(tsl_test::test_data_path(example + "_first.facts")), n).at(0);
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t c = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++c;
    return c;
}

}  // namespace

TEST(Osc, MinimalSkeleton) {
    auto n = net("lane(l1,r).");
    auto sc = parse_scenarios("#step 0\non(c,l1).", n).at(0);
    EXPECT_EQ(emit_osc(sc),
              "scenario tsl_scenario:\n"
              "    c: vehicle\n"
              "    do serial:\n"
              "        step0: parallel:\n"
              "            c.drive() with:\n"
              "                lateral(lanes: [l1])\n");
}

TEST(Osc, IntersectionPointDeclaredOnce) {
    const auto out = emit_osc(first_scenario("ex2_intersection"));
    EXPECT_EQ(count(out, ": position_3d"), 1u);
    EXPECT_EQ(count(out, "px: position_3d"), 1u);
    const auto steps = count(out, ": parallel:");
    EXPECT_EQ(count(out, ": px)"), 2 * steps);
}

TEST(Osc, EachVrelAtomOncePerScene) {
    const auto sc = first_scenario("ex1_highway");
    const auto out = emit_osc(sc);
    std::vector<std::string> blocks;
    for (auto p = out.find(": parallel:"); p != std::string::npos;) {
        auto q = out.find(": parallel:", p + 1);
        blocks.push_back(out.substr(p, q == std::string::npos ? std::string::npos : q - p));
        p = q;
    }
    ASSERT_EQ(static_cast<int>(blocks.size()), sc.horizon());
    for (const auto& b : blocks) {
        EXPECT_EQ(std::regex_search(b, std::regex("c1\\.drive\\(\\)[^]*: c2\\)[^]*c2\\.drive")), true) << b;
        EXPECT_EQ(count(b, ": c2)"), 1u);
        EXPECT_EQ(count(b, ": c1)"), 1u);
    }
}

TEST(Osc, Goldens) {
    for (const std::string e : {"ex1_highway", "ex2_intersection", "ex5_overlap"})
        EXPECT_EQ(emit_osc(first_scenario(e)), tsl_test::slurp(tsl_test::test_data_path("golden/" + e + ".osc"))) << e;
}

TEST(Osc, Coordinates) {
    auto sc = first_scenario("ex2_intersection");
    CoordMap coords;
    coords[PointId("px")] = {1.5, -2, 0};
    const auto out = emit_osc(sc, coords);
    EXPECT_NE(out.find("    px: position_3d = position_3d(x: 1.500m, y: -2.000m, z: 0.000m)\n"), std::string::npos);
    EXPECT_THROW(emit_osc(sc, CoordMap{}), InvalidInput);
}

TEST(Osc, CoordinateFile) {
    auto c = parse_coords("% points\ncoord(px,1.5,-2,0.25).\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_DOUBLE_EQ(c.at(PointId("px")).z, 0.25);
    EXPECT_THROW(parse_coords("coord(px,a,0,0)."), ParseError);
}

TEST(Osc, InvalidScenarioIsRejected) {
    auto n = net("lane(l1,r).");
    auto sc = parse_scenarios("#step 0\non(c1,l1). on(c2,l1). lonr(c1,c2,cover). lonr(c2,c1,cover).", n).at(0);
    try {
        emit_osc(sc);
        FAIL();
    } catch (const SemanticError& e) {
        EXPECT_NE(std::string(e.what()).find("TR2"), std::string::npos);
    }
    auto empty = parse_scenarios("vehicle(c).\n#step 0\n", n).at(0);
    EXPECT_THROW(emit_osc(empty), SemanticError);
}

TEST(Osc, IsStable) {
    auto sc = first_scenario("ex5_overlap");
    EXPECT_EQ(emit_osc(sc), emit_osc(sc));
}
