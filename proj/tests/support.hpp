#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsl/facts.hpp"
#include "tsl/reasoner.hpp"
#include "tsl/rules.hpp"

namespace tsl_test {

inline std::string data_path(const std::string& rel) { return std::string(TSL_DATA_DIR) + "/" + rel; }
inline std::string test_data_path(const std::string& rel) { return std::string(TSL_TEST_DATA_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline tsl::ExpansionRequest load_request(const std::string& name) {
    return tsl::parse_request(slurp(data_path("requests/" + name)));
}

/// Small network built from fact text.
inline tsl::NetworkPtr net(const std::string& facts) { return tsl::compile(tsl::parse_network(facts)); }

inline std::set<std::string> canonical_set(const std::vector<tsl::Scenario>& scs) {
    std::set<std::string> out;
    for (const auto& s : scs) out.insert(tsl::canonicalize(s));
    return out;
}

/// Lane ids per step of one vehicle, e.g. "l1|l1,l2|l2".
inline std::string lane_trace(const tsl::Scenario& sc, const std::string& vehicle) {
    const int c = *sc.vehicle_index(tsl::VehicleId(vehicle));
    std::string out;
    for (int k = 0; k < sc.horizon(); ++k) {
        if (k) out += "|";
        std::string cell;
        for (auto l : sc.scene(k).occ(c)) cell += (cell.empty() ? "" : ",") + sc.network().lane(l).str();
        out += cell;
    }
    return out;
}

/// Qualitative class of a highway-overtake scenario on lanes l1 (right)
/// and l2 (left).
inline std::string overtake_class(const tsl::Scenario& sc) {
    const int c1 = *sc.vehicle_index(tsl::VehicleId("c1")), c2 = *sc.vehicle_index(tsl::VehicleId("c2"));
    const auto& n = sc.network();
    const int l2 = *n.lane_index(tsl::LaneId("l2"));
    bool c1_moved = false, c2_moved = false, both_straddle = false;
    for (const auto& s : sc.scenes()) {
        c1_moved = c1_moved || s.on(c1, l2);
        c2_moved = c2_moved || s.on(c2, l2);
        both_straddle = both_straddle || (s.occ(c1).size() == 2 && s.occ(c2).size() == 2);
    }
    const auto& last = sc.scenes().back();
    if (both_straddle) return last.on(c1, l2) ? "both change, c2 aborts" : "both change, c1 aborts";
    if (c1_moved && !c2_moved) return "c1 changes lane";
    if (c2_moved && !c1_moved) return "c2 yields left";
    return "other";
}

/// For the overlap overtake: where c1 is relative to the overlap start
/// when it first enters the shared lane.
inline std::string overlap_class(const tsl::Scenario& sc) {
    const auto& n = sc.network();
    const int c1 = *sc.vehicle_index(tsl::VehicleId("c1"));
    const int l2 = *n.lane_index(tsl::LaneId("l2"));
    const int pos = *n.point_index(tsl::PointId("pos"));
    for (const auto& s : sc.scenes())
        if (s.on(c1, l2)) return s.prel(c1, pos) == tsl::LonRel::Behind ? "overtake first" : "wait then overtake";
    return "other";
}

}  // namespace tsl_test
