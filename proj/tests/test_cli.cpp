#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <regex>

#include "support.hpp"

namespace fs = std::filesystem;
using tsl_test::data_path;
using tsl_test::slurp;
using tsl_test::test_data_path;

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("tslc_test_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(tmp(name), std::ios::binary) << text;
    }

    Outcome run(const std::string& args) const {
        const std::string out = tmp("stdout"), err = tmp("stderr");
        const std::string cmd = std::string(TSLC_PATH) + " " + args + " >" + out + " 2>" + err;
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path dir_;
};

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t c = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++c;
    return c;
}

}  // namespace

TEST_F(Cli, IngestTJunction) {
    auto r = run("ingest " + data_path("maps/t_junction.xodr"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::set<std::string> with_successor;
    std::regex succl("succl\\((\\w+),\\w+\\)\\.");
    for (std::sregex_iterator it(r.out.begin(), r.out.end(), succl), end; it != end; ++it) with_successor.insert((*it)[1]);
    EXPECT_EQ(with_successor.size(), 6u);
    EXPECT_NE(r.out.find("% tolerance step = 0.5\n"), std::string::npos);
}

TEST_F(Cli, IngestEmptyFile) {
    write("empty.xodr", "");
    auto r = run("ingest " + tmp("empty.xodr"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(Cli, IngestSpiral) {
    write("spiral.xodr",
          "<?xml version=\"1.0\"?>\n<OpenDRIVE>\n<header/>\n<road id=\"1\" length=\"10\" junction=\"-1\">\n<planView>\n"
          "<geometry s=\"0\" x=\"0\" y=\"0\" hdg=\"0\" length=\"10\"><spiral curvStart=\"0\" curvEnd=\"0.1\"/></geometry>\n"
          "</planView>\n<lanes><laneSection s=\"0\"><center><lane id=\"0\" type=\"none\"/></center></laneSection></lanes>\n"
          "</road>\n</OpenDRIVE>\n");
    auto r = run("ingest " + tmp("spiral.xodr"));
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigTolerancesAreEchoed) {
    write("tsl.cfg", "# tolerances\nstep = 0.25\nworkers = 2\n");
    auto r = run("ingest " + data_path("maps/ex1_highway.xodr") + " --config " + tmp("tsl.cfg"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("% tolerance step = 0.25\n"), std::string::npos);
    write("bad.cfg", "step = -1\n");
    EXPECT_EQ(run("ingest " + data_path("maps/ex1_highway.xodr") + " --config " + tmp("bad.cfg")).code, 2);
}

TEST_F(Cli, GenerateExampleOne) {
    auto r = run("generate " + data_path("requests/ex1_highway.req"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count(r.out, "#scenario "), 4u);
    EXPECT_NE(r.err.find("scenarios: 4\n"), std::string::npos);
    EXPECT_NE(r.err.find("horizon: 5\n"), std::string::npos);
}

TEST_F(Cli, GenerateExampleThree) {
    auto r = run("generate " + data_path("requests/ex3_connection.req"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count(r.out, "#scenario "), 3u);
}

TEST_F(Cli, GenerateFlagsOverrideRequest) {
    auto r = run("generate " + data_path("requests/ex1_highway.req") + " --horizon 3 --workers 2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("scenarios: 0\n"), std::string::npos);
    r = run("generate " + data_path("requests/ex1_highway.req") + " --mode sideways");
    EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, GenerateUnknownVehicleInGoal) {
    write("bad.req", "lane(l1,r).\n#init\non(c1,l1).\n#horizon 3\n#mode shortest\n#goal on(c7,l1)\n");
    auto r = run("generate " + tmp("bad.req"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("c7"), std::string::npos) << r.err;
}

TEST_F(Cli, GenerateThenCheck) {
    for (const std::string e : {"ex1_highway", "ex2_intersection", "ex3_connection", "ex4_two_points", "ex5_overlap"}) {
        auto r = run("generate " + data_path("requests/" + e + ".req") + " --out " + tmp(e + ".facts"));
        ASSERT_EQ(r.code, 0) << r.err;
        auto c = run("check " + tmp(e + ".facts") + " " + data_path("requests/" + e + ".req"));
        EXPECT_EQ(c.code, 0) << e << "\n" << c.out;
        EXPECT_TRUE(c.out.empty());
    }
}

TEST_F(Cli, CheckFlippedVrel) {
    auto text = slurp(test_data_path("ex1_highway_first.facts"));
    const std::string atom = "lonr(c2,c1,ahead).";
    const auto at = text.find(atom);
    ASSERT_NE(at, std::string::npos);
    text.replace(at, atom.size(), "lonr(c2,c1,behind).");
    write("mutated.facts", text);
    auto r = run("check " + tmp("mutated.facts") + " " + data_path("requests/ex1_highway.req"));
    EXPECT_EQ(r.code, 1);
    // The flip also breaks continuity into the next scene.
    EXPECT_EQ(r.out, "PR1 @step 0 [c1 c2]\nPR4 @step 0->1 [c1 c2]\nSTEP @step 0->1 [c1]\n");
}

TEST_F(Cli, CheckParseError) {
    write("broken.facts", "#step 0\non(c1,l1\n");
    EXPECT_EQ(run("check " + tmp("broken.facts") + " " + data_path("requests/ex1_highway.req")).code, 2);
}

TEST_F(Cli, AbstractThenCheck) {
    for (const auto& [trace, map] : {std::pair{"trace_ex1_overtake.csv", "ex1_highway.xodr"},
                                     std::pair{"trace_ex5_oncoming.csv", "ex5_overlap.xodr"}}) {
        auto a = run(std::string("abstract ") + test_data_path(trace) + " " + data_path(std::string("maps/") + map) +
                     " --out " + tmp("scenario.facts"));
        ASSERT_EQ(a.code, 0) << a.err;
        auto n = run(std::string("ingest ") + data_path(std::string("maps/") + map) + " --out " + tmp("network.facts"));
        ASSERT_EQ(n.code, 0) << n.err;
        auto c = run("check " + tmp("scenario.facts") + " " + tmp("network.facts"));
        EXPECT_EQ(c.code, 0) << trace << "\n" << c.out;
    }
}

TEST_F(Cli, AbstractOffRoad) {
    write("off.csv", "t,vehicle,x,y,heading,length\n0,c,10,-1.75,0,4\n0.1,c,10,50,0,4\n");
    auto r = run("abstract " + tmp("off.csv") + " " + data_path("maps/ex1_highway.xodr"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
}

TEST_F(Cli, ExportGoldens) {
    for (const std::string e : {"ex1_highway", "ex2_intersection", "ex5_overlap"}) {
        auto r = run("export " + test_data_path(e + "_first.facts") + " " + data_path("requests/" + e + ".req"));
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(r.out, slurp(test_data_path("golden/" + e + ".osc"))) << e;
    }
}

TEST_F(Cli, ExportWithIngestedCoordinates) {
    ASSERT_EQ(run("ingest " + data_path("maps/ex5_overlap.xodr") + " --out " + tmp("n.facts") + " --coords " +
                  tmp("c.facts")).code,
              0);
    ASSERT_EQ(run("abstract " + test_data_path("trace_ex5_oncoming.csv") + " " + data_path("maps/ex5_overlap.xodr") +
                  " --out " + tmp("s.facts")).code,
              0);
    auto r = run("export " + tmp("s.facts") + " " + tmp("n.facts") + " --coords " + tmp("c.facts"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("pos1: position_3d = position_3d(x: 100.500m, y: -1.750m, z: 0.000m)"), std::string::npos)
        << r.out.substr(0, 400);
}

TEST_F(Cli, ExportInvalidScenario) {
    write("bad.facts", "#step 0\non(c1,l1). on(c2,l1). lonr(c1,c2,cover). lonr(c2,c1,cover).\n");
    auto r = run("export " + tmp("bad.facts") + " " + data_path("requests/ex1_highway.req"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("TR2"), std::string::npos);
}

TEST_F(Cli, Idempotent) {
    const std::string args = "generate " + data_path("requests/ex5_overlap.req");
    auto a = run(args), b = run(args + " --workers 3");
    EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, MissingSubcommand) { EXPECT_EQ(run("").code, 2); }
