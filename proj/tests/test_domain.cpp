#include <gtest/gtest.h>

#include "support.hpp"
#include "tsl/network.hpp"
#include "tsl/rules.hpp"
#include "tsl/scene.hpp"

using namespace tsl;
using tsl_test::net;

TEST(LonRel, AheadWhenRearPastFront) { EXPECT_EQ(lon_rel_of_ranges({6, 10}, {0, 4}), LonRel::Ahead); }

TEST(LonRel, TouchingCountsAsCover) { EXPECT_EQ(lon_rel_of_ranges({0, 4}, {4, 8}), LonRel::Cover); }

TEST(LonRel, ReversedAxisSwaps) { EXPECT_EQ(lon_rel_of_ranges({0, 4}, {6, 10}, false), LonRel::Ahead); }

TEST(LonRel, Invert) {
    EXPECT_EQ(invert(LonRel::Ahead), LonRel::Behind);
    EXPECT_EQ(invert(LonRel::Cover), LonRel::Cover);
    EXPECT_EQ(invert(LonRel::None), LonRel::None);
    for (LonRel d : kAllLonRels) EXPECT_EQ(invert(invert(d)), d);
}

TEST(LonRel, SwappingArgumentsInverts) {
    for (double a0 : {0.0, 2.0, 5.0})
        for (double b0 : {0.0, 1.0, 3.0, 7.0}) {
            SRange a{a0, a0 + 2}, b{b0, b0 + 3};
            EXPECT_EQ(lon_rel_of_ranges(b, a), invert(lon_rel_of_ranges(a, b)));
        }
}

TEST(LonRel, StringsRoundTrip) {
    for (LonRel d : kAllLonRels) EXPECT_EQ(lon_rel_from_string(to_string(d)), d);
    EXPECT_FALSE(lon_rel_from_string("left"));
}

TEST(Ids, RejectsMalformed) {
    EXPECT_NO_THROW(LaneId("l1_a"));
    EXPECT_THROW(LaneId("L1"), InvalidInput);
    EXPECT_THROW(LaneId("1l"), InvalidInput);
    EXPECT_THROW(VehicleId(""), InvalidInput);
}

TEST(Scenario, Tail) {
    auto n = net("lane(l1,r1).");
    std::vector<Scene> scenes;
    for (int k = 0; k < 3; ++k) {
        Scene s(1, 0);
        s.set_occ(0, {0});
        scenes.push_back(s);
    }
    Scenario sc({VehicleId("c")}, n, scenes);
    EXPECT_EQ(tail(sc, 0), sc);
    auto last = tail(sc, 2);
    EXPECT_EQ(last.horizon(), 1);
    EXPECT_EQ(last.scene(0), sc.scene(2));
    Scenario one({VehicleId("c")}, n, {scenes[0]});
    EXPECT_THROW(tail(one, 1), InvalidInput);
}

static std::vector<std::string> defects(const std::string& facts) {
    std::vector<std::string> out;
    for (const auto& d : validate_network(parse_network(facts))) out.push_back(d.invariant);
    return out;
}

TEST(Network, CyclicPointOrder) {
    auto d = defects(
        "lane(l1,r1). lane(l2,r2). lane(l3,r3).\n"
        "class(a,x). class(b,x). pon(a,l1). pon(b,l1). pon(a,l2). pon(b,l3).\n"
        "succp(l1,a,b). succp(l1,b,a).");
    EXPECT_NE(std::find(d.begin(), d.end(), "point order not acyclic"), d.end());
}

TEST(Network, IntersectionIsValid) {
    EXPECT_TRUE(validate_network(parse_network(tsl_test::slurp(tsl_test::data_path("requests/ex2_intersection.req")))).empty());
}

TEST(Network, OverlapClassMismatch) {
    auto d = defects(
        "lane(l1,r1). lane(l2,r2).\n"
        "class(a,os). class(b,c). pon(a,l1). pon(b,l1). pon(a,l2). pon(b,l2). succl(b,l2).\n"
        "succp(l1,a,b). succp(l2,b,a). overlap(a,b).");
    EXPECT_NE(std::find(d.begin(), d.end(), "overlap pair class mismatch"), d.end());
}

TEST(Network, CompiledQueries) {
    auto n = net("lane(l1,r). lane(l2,r). lane(l3,r). left(l3,l2). left(l2,l1).");
    const int l1 = *n->lane_index(LaneId("l1")), l3 = *n->lane_index(LaneId("l3"));
    EXPECT_TRUE(n->cleft(l3, l1));
    EXPECT_FALSE(n->cleft(l1, l3));
}

TEST(Derive, CleftIsTransitive) {
    auto n = net("lane(l1,r). lane(l2,r). lane(l3,r). left(l1,l2). left(l2,l3).");
    Scene s(0, 0);
    auto f = derive(s, *n);
    const int l1 = *n->lane_index(LaneId("l1")), l3 = *n->lane_index(LaneId("l3"));
    EXPECT_NE(std::find(f.cleft.begin(), f.cleft.end(), std::pair{l1, l3}), f.cleft.end());
}

TEST(Derive, Cbelong) {
    auto n = net("lane(l1,r). lane(l2,r). left(l1,l2).");
    Scene s(1, 0);
    s.set_occ(0, {static_cast<std::uint16_t>(*n->lane_index(LaneId("l1")))});
    auto f = derive(s, *n);
    ASSERT_EQ(f.cbelong.size(), 1u);
    EXPECT_EQ(f.cbelong[0], (std::pair{0, *n->road_index(RoadId("r"))}));
}

TEST(Derive, Fwdover) {
    auto n = net(
        "lane(l2,r1). lane(l3,r2). class(pos,os). class(poe,oe).\n"
        "pon(pos,l2). pon(poe,l2). pon(pos,l3). pon(poe,l3).\n"
        "succp(l2,pos,poe). succp(l3,poe,pos). overlap(pos,poe).");
    const int ps = *n->point_index(PointId("pos")), pe = *n->point_index(PointId("poe"));
    Scene s(1, n->point_count());
    s.set_occ(0, {static_cast<std::uint16_t>(*n->lane_index(LaneId("l2")))});
    s.set_prel(0, ps, LonRel::Ahead);
    s.set_prel(0, pe, LonRel::Behind);
    auto f = derive(s, *n);
    ASSERT_EQ(f.fwdover.size(), 1u);
    EXPECT_EQ(f.fwdover[0], std::make_tuple(0, ps, pe));
    EXPECT_TRUE(f.rvsover.empty());
}
