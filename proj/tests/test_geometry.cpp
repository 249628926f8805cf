#include <gtest/gtest.h>

#include <cmath>

#include "tsl/geometry.hpp"
#include "tsl/opendrive.hpp"
#include "xodr.hpp"

using namespace tsl;

TEST(Frenet, LeftOfLine) {
    Polyline l({{0, 0}, {10, 0}});
    auto f = frenet_project(l, {3, 2});
    EXPECT_DOUBLE_EQ(f.s, 3);
    EXPECT_DOUBLE_EQ(f.d, 2);
}

TEST(Frenet, RightOfLine) {
    auto f = frenet_project(Polyline({{0, 0}, {10, 0}}), {3, -2});
    EXPECT_DOUBLE_EQ(f.s, 3);
    EXPECT_DOUBLE_EQ(f.d, -2);
}

TEST(Frenet, ClampsBeyondEnd) {
    auto f = frenet_project(Polyline({{0, 0}, {10, 0}}), {12, 0});
    EXPECT_DOUBLE_EQ(f.s, 10);
    EXPECT_DOUBLE_EQ(f.d, 0);
}

TEST(Frenet, TieTakesSmallestS) {
    // Equidistant from both legs of a V.
    auto f = frenet_project(Polyline({{0, 0}, {1, 1}, {2, 0}}), {1, -5});
    EXPECT_LT(f.s, norm(Vec2{1, 1}) + 1e-12);
}

TEST(Polyline, RejectsDegenerate) {
    EXPECT_THROW(Polyline({{0, 0}}), InvalidInput);
    EXPECT_THROW(Polyline({{0, 0}, {0, 0}}), InvalidInput);
}

TEST(Polyline, AtAndLength) {
    Polyline l({{0, 0}, {3, 4}, {3, 10}});
    EXPECT_DOUBLE_EQ(l.length(), 11);
    EXPECT_DOUBLE_EQ(l.at(7).y, 6);
    EXPECT_DOUBLE_EQ(l.reversed().at(0).y, 10);
}

TEST(Segments, Intersection) {
    auto hit = segment_intersection({0, 0}, {2, 0}, {1, -1}, {1, 1});
    ASSERT_TRUE(hit);
    EXPECT_DOUBLE_EQ(hit->first, 0.5);
    EXPECT_DOUBLE_EQ(hit->second, 0.5);
    EXPECT_FALSE(segment_intersection({0, 0}, {2, 0}, {0, 1}, {2, 1}));
}

TEST(RefLine, ArcEndpointIsOnCircle) {
    RefLineSegment g;
    g.kind = RefLineSegment::Kind::Arc;
    g.curvature = 0.01;
    g.length = 10;
    g.heading = 0.3;
    g.origin = {5, -2};
    // Centre is 1/k to the left of the start heading.
    const Vec2 centre = g.origin + 100.0 * left_normal(g.heading);
    const double phi = g.heading - M_PI / 2 + g.length * g.curvature;
    const Vec2 expect = centre + 100.0 * Vec2{std::cos(phi), std::sin(phi)};
    const Vec2 got = g.position(g.length);
    EXPECT_NEAR(got.x, expect.x, 1e-9);
    EXPECT_NEAR(got.y, expect.y, 1e-9);
}

TEST(Sampling, ConstantWidthLeftLane) {
    auto m = parse_opendrive(xodr::doc(xodr::road("1", 100, xodr::line(0, 0, 0, 0, 100), xodr::lane(1, 4), "")));
    auto pl = sample_centerline(m, {"1", 0, 1}, 50);
    ASSERT_EQ(pl.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(pl.points()[i].x, 50.0 * i, 1e-12);
        EXPECT_NEAR(pl.points()[i].y, 2.0, 1e-12);
    }
}

TEST(Sampling, WidthPolynomialCentre) {
    auto m = parse_opendrive(xodr::doc(xodr::road("1", 100, xodr::line(0, 0, 0, 0, 100), xodr::lane(1, 2, 0.01), "")));
    const double width_100 = 2 + 0.01 * 100;
    EXPECT_NEAR(m.roads[0].lane_center_offset(0, 1, 100), width_100 / 2, 1e-12);
    EXPECT_NEAR(sample_centerline(m, {"1", 0, 1}, 10).points().back().y, width_100 / 2, 1e-12);
}
