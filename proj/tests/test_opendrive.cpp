#include <gtest/gtest.h>

#include "support.hpp"
#include "tsl/opendrive.hpp"
#include "xodr.hpp"

using namespace tsl;

TEST(OpenDrive, StraightTwoLanes) {
    auto m = parse_opendrive(xodr::doc(xodr::road("1", 100, xodr::line(0, 0, 0, 0, 100), xodr::lane(1, 3) + xodr::lane(2, 3), "")));
    ASSERT_EQ(m.roads.size(), 1u);
    ASSERT_EQ(m.roads[0].sections.size(), 1u);
    EXPECT_EQ(m.roads[0].sections[0].left.size(), 2u);
}

TEST(OpenDrive, TJunctionHasSixConnectingRoads) {
    auto m = parse_opendrive(tsl_test::slurp(tsl_test::data_path("maps/t_junction.xodr")));
    int connecting = 0;
    for (const auto& r : m.roads) connecting += r.junction != "-1";
    EXPECT_EQ(connecting, 6);
    ASSERT_EQ(m.junctions.size(), 1u);
    EXPECT_EQ(m.junctions[0].connections.size(), 6u);
}

TEST(OpenDrive, ParamPoly3IsUnsupported) {
    const std::string g =
        "<geometry s=\"0\" x=\"0\" y=\"0\" hdg=\"0\" length=\"10\"><paramPoly3 aU=\"0\" bU=\"1\" cU=\"0\" dU=\"0\" "
        "aV=\"0\" bV=\"0\" cV=\"0\" dV=\"0\"/></geometry>";
    try {
        parse_opendrive(xodr::doc(xodr::road("1", 10, g, "", xodr::lane(-1, 3))));
        FAIL();
    } catch (const UnsupportedFeature& e) {
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(OpenDrive, SpiralIsUnsupported) {
    const std::string g =
        "<geometry s=\"0\" x=\"0\" y=\"0\" hdg=\"0\" length=\"10\"><spiral curvStart=\"0\" curvEnd=\"0.01\"/></geometry>";
    EXPECT_THROW(parse_opendrive(xodr::doc(xodr::road("1", 10, g, "", xodr::lane(-1, 3)))), UnsupportedFeature);
}

TEST(OpenDrive, EmptyDocument) {
    try {
        parse_opendrive("");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.exit_code(), 2);
    }
}

TEST(OpenDrive, MalformedXmlReportsLine) {
    try {
        parse_opendrive("<?xml version=\"1.0\"?>\n<OpenDRIVE>\n<road id=\"1\">\n</OpenDRIVE>\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
}

TEST(OpenDrive, DanglingSuccessor) {
    const std::string link = "<link><successor elementType=\"road\" elementId=\"9\" contactPoint=\"start\"/></link>";
    EXPECT_THROW(parse_opendrive(xodr::doc(xodr::road("1", 10, xodr::line(0, 0, 0, 0, 10), "", xodr::lane(-1, 3), link))),
                 InvalidInput);
}

TEST(OpenDrive, MissingAttributeReportsElementLine) {
    const std::string text = "<?xml version=\"1.0\"?>\n<OpenDRIVE>\n<road id=\"1\" junction=\"-1\">\n</road>\n</OpenDRIVE>\n";
    try {
        parse_opendrive(text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}
