#include <gtest/gtest.h>

#include "support.hpp"

using namespace tsl;
using tsl_test::net;

namespace {
const char* kNet = "lane(l1,r). lane(l2,r). left(l2,l1). class(p,x). lane(m,s). pon(p,l1). pon(p,m).";
}

TEST(Facts, ReadsCommentsAndDirectives) {
    auto lines = read_facts("% header\nlane(l1,r). % trailing\n#step 0\n");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0].atom.name, "lane");
    EXPECT_EQ(lines[0].atom.args, (std::vector<std::string>{"l1", "r"}));
    EXPECT_TRUE(lines[1].directive);
    EXPECT_EQ(lines[1].keyword, "step");
    EXPECT_EQ(lines[1].argument, "0");
}

TEST(Facts, MissingPeriodReportsLine) {
    try {
        read_facts("lane(l1,r).\nlane(l2,r)\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 2);
    }
}

TEST(Facts, NetworkRoundTrip) {
    auto n1 = parse_network(kNet);
    const auto text = render_network(n1);
    auto n2 = parse_network(text);
    EXPECT_EQ(render_network(n2), text);
    EXPECT_TRUE(validate_network(n2).empty());
}

TEST(Facts, UnchainedRoadIsRejected) {
    EXPECT_THROW(parse_network("lane(l1,r). lane(l2,r)."), InvalidInput);
}

TEST(Facts, ScenarioRoundTrip) {
    auto n = net(kNet);
    const std::string text =
        "#step 0\non(c2,l1). on(c1,l2). lonpr(c1,p,behind). lonpr(c2,p,behind). lonr(c1,c2,cover). lonr(c2,c1,cover).\n"
        "#step 1\non(c2,l1). on(c1,l2). lonpr(c1,p,cover). lonpr(c2,p,behind). lonr(c1,c2,cover). lonr(c2,c1,cover).\n";
    auto sc = parse_scenarios(text, n).at(0);
    const auto canon = canonicalize(sc);
    auto again = parse_scenarios(canon, n).at(0);
    EXPECT_EQ(again, sc);
    EXPECT_EQ(canonicalize(again), canon);
}

TEST(Facts, AtomOrderDoesNotMatter) {
    auto n = net(kNet);
    auto a = parse_scenarios("#step 0\non(c1,l1). on(c2,l2). lonpr(c1,p,ahead). lonpr(c2,p,behind).", n).at(0);
    auto b = parse_scenarios("#step 0\nlonpr(c2,p,behind). on(c2,l2). lonpr(c1,p,ahead). on(c1,l1).", n).at(0);
    EXPECT_EQ(canonicalize(a), canonicalize(b));
}

TEST(Facts, OneAtomChangesTheString) {
    auto n = net(kNet);
    const std::string head = "#step 0\non(c1,l1). on(c2,l2). lonr(c1,c2,behind). lonr(c2,c1,ahead).\n#step 1\non(c1,l1). on(c2,l2). ";
    auto a = parse_scenarios(head + "lonr(c1,c2,behind). lonr(c2,c1,ahead).", n).at(0);
    auto b = parse_scenarios(head + "lonr(c1,c2,cover). lonr(c2,c1,ahead).", n).at(0);
    EXPECT_NE(canonicalize(a), canonicalize(b));
}

TEST(Facts, StepsMustBeNumberedFromZero) {
    auto n = net(kNet);
    EXPECT_THROW(parse_scenarios("#step 1\non(c1,l1).", n), ParseError);
    EXPECT_THROW(parse_scenarios("on(c1,l1).", n), ParseError);
}

TEST(Facts, UnknownLaneInScene) {
    auto n = net(kNet);
    EXPECT_THROW(parse_scenarios("#step 0\non(c1,l9).", n), InvalidInput);
}

TEST(Facts, SeveralScenarios) {
    auto n = net(kNet);
    auto scs = parse_scenarios("#scenario 1\n#step 0\non(c,l1). lonpr(c,p,behind).\n#scenario 2\n#step 0\non(c,m). lonpr(c,p,ahead).\n", n);
    ASSERT_EQ(scs.size(), 2u);
    EXPECT_EQ(render_result(scs), "#scenario 1\n" + canonicalize(scs[0]) + "#scenario 2\n" + canonicalize(scs[1]));
}

TEST(Request, Parses) {
    auto req = tsl_test::load_request("ex1_highway.req");
    EXPECT_EQ(req.horizon, 8);
    EXPECT_EQ(req.mode, Mode::Shortest);
    ASSERT_TRUE(req.goal);
    EXPECT_EQ(req.goal->literals.size(), 1u);
    EXPECT_EQ(req.vehicles.size(), 2u);
}

TEST(Request, UnknownVehicleInGoal) {
    try {
        parse_request("lane(l1,r).\n#init\non(c1,l1).\n#horizon 3\n#goal on(c9,l1)\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.exit_code(), 2);
        EXPECT_NE(std::string(e.what()).find("c9"), std::string::npos);
    }
}

TEST(Request, HorizonIsRequired) {
    EXPECT_THROW(parse_request("lane(l1,r).\n#init\non(c1,l1).\n"), ParseError);
    EXPECT_THROW(parse_request("lane(l1,r).\n#init\non(c1,l1).\n#horizon 0\n"), ParseError);
}
