#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/ids.hpp"

namespace tsl {

enum class PointClass : std::uint8_t { Intersection, Connection, OverlapStart, OverlapEnd };

/// Fact-format spelling: x, c, os, oe.
inline std::string_view to_string(PointClass k) noexcept {
    switch (k) {
        case PointClass::Intersection: return "x";
        case PointClass::Connection: return "c";
        case PointClass::OverlapStart: return "os";
        case PointClass::OverlapEnd: return "oe";
    }
    return "x";
}

inline std::optional<PointClass> point_class_from_string(std::string_view s) noexcept {
    if (s == "x") return PointClass::Intersection;
    if (s == "c") return PointClass::Connection;
    if (s == "os") return PointClass::OverlapStart;
    if (s == "oe") return PointClass::OverlapEnd;
    return std::nullopt;
}

/// Lanes of one road, ordered left to right with respect to travel.
struct Road {
    RoadId id;
    std::vector<LaneId> lanes;
};

/// The abstract road network: roads, classified points, per-lane point
/// order, connection successors, overlap pairs and point-lane affiliation.
/// Plain data; `validate_network` reports structural defects and
/// `CompiledNetwork` indexes a valid instance.
struct RoadNetwork {
    std::vector<Road> roads;
    std::map<PointId, PointClass> points;
    std::set<std::tuple<LaneId, PointId, PointId>> succ_p;
    std::set<std::pair<PointId, LaneId>> succ_c;
    std::set<std::pair<PointId, PointId>> overlaps;
    std::set<std::pair<LaneId, PointId>> affiliation;
};

struct NetworkDefect {
    std::string invariant;
    std::vector<std::string> ids;

    std::string message() const {
        std::ostringstream os;
        os << invariant;
        if (!ids.empty()) {
            os << " [";
            for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? " " : "") << ids[i];
            os << "]";
        }
        return os.str();
    }
    friend auto operator<=>(const NetworkDefect&, const NetworkDefect&) = default;
};

inline std::vector<NetworkDefect> validate_network(const RoadNetwork& n) {
    std::vector<NetworkDefect> out;
    auto defect = [&](std::string what, std::vector<std::string> ids) { out.push_back({std::move(what), std::move(ids)}); };

    std::map<LaneId, RoadId> lane_road;
    std::set<RoadId> road_ids;
    for (const Road& r : n.roads) {
        if (!road_ids.insert(r.id).second) defect("duplicate road", {r.id.str()});
        if (r.lanes.empty()) defect("road has no lanes", {r.id.str()});
        for (const LaneId& l : r.lanes) {
            auto [it, fresh] = lane_road.emplace(l, r.id);
            if (!fresh) defect("lane belongs to more than one road", {l.str(), it->second.str(), r.id.str()});
        }
    }

    auto has_point = [&](const PointId& p) { return n.points.count(p) > 0; };
    auto has_lane = [&](const LaneId& l) { return lane_road.count(l) > 0; };
    auto cls = [&](const PointId& p) { return n.points.at(p); };

    for (const auto& [l, p] : n.affiliation) {
        if (!has_lane(l)) defect("unknown lane", {l.str()});
        if (!has_point(p)) defect("unknown point", {p.str()});
    }
    for (const auto& [l, a, b] : n.succ_p) {
        if (!has_lane(l)) defect("unknown lane", {l.str()});
        for (const PointId& p : {a, b}) {
            if (!has_point(p))
                defect("unknown point", {p.str()});
            else if (!n.affiliation.count({l, p}))
                defect("ordered point not on lane", {l.str(), p.str()});
        }
    }
    for (const auto& [p, l] : n.succ_c) {
        if (!has_point(p)) {
            defect("unknown point", {p.str()});
            continue;
        }
        if (!has_lane(l)) defect("unknown lane", {l.str()});
        if (cls(p) != PointClass::Connection) defect("connection successor class mismatch", {p.str()});
        if (!n.affiliation.count({l, p})) defect("connection successor not affiliated", {p.str(), l.str()});
    }
    for (const auto& [a, b] : n.overlaps) {
        if (!has_point(a) || !has_point(b)) {
            defect("unknown point", {a.str(), b.str()});
            continue;
        }
        if (cls(a) != PointClass::OverlapStart || cls(b) != PointClass::OverlapEnd)
            defect("overlap pair class mismatch", {a.str(), b.str()});
    }

    // Per-point lane sets.
    std::map<PointId, std::vector<LaneId>> point_lanes;
    for (const auto& [l, p] : n.affiliation) point_lanes[p].push_back(l);

    for (const auto& [p, k] : n.points) {
        const auto it = point_lanes.find(p);
        if (it == point_lanes.end()) {
            defect("point without lane", {p.str()});
            continue;
        }
        const auto& lanes = it->second;
        if (k == PointClass::Intersection) {
            if (lanes.size() != 2 || !has_lane(lanes[0]) || !has_lane(lanes[1]) ||
                lane_road.at(lanes[0]) == lane_road.at(lanes[1]))
                defect("intersection point needs two lanes on different roads", {p.str()});
        } else if (k == PointClass::Connection) {
            const bool incoming = std::any_of(lanes.begin(), lanes.end(),
                                              [&](const LaneId& l) { return !n.succ_c.count({p, l}); });
            if (!incoming) defect("connection point without incoming lane", {p.str()});
        }
    }
    for (const auto& [a, b] : n.overlaps) {
        if (point_lanes[a] != point_lanes[b] || point_lanes[a].size() < 2)
            defect("overlap points not on the same lanes", {a.str(), b.str()});
    }

    // succ_p on each lane must be one chain through every affiliated point.
    std::map<LaneId, std::vector<std::pair<PointId, PointId>>> edges;
    for (const auto& [l, a, b] : n.succ_p) edges[l].emplace_back(a, b);
    std::map<LaneId, std::vector<PointId>> lane_points;
    for (const auto& [l, p] : n.affiliation) lane_points[l].push_back(p);
    for (const auto& [l, pts] : lane_points) {
        std::map<PointId, PointId> next;
        std::map<PointId, int> indeg;
        bool branching = false;
        for (const auto& [a, b] : edges[l]) {
            if (a == b || !next.emplace(a, b).second) branching = true;
            if (++indeg[b] > 1) branching = true;
        }
        if (branching) {
            defect("point order not a single chain", {l.str()});
            continue;
        }
        std::vector<PointId> heads;
        for (const PointId& p : pts)
            if (!indeg.count(p)) heads.push_back(p);
        if (heads.empty() && !pts.empty()) {
            defect("point order not acyclic", {l.str()});
            continue;
        }
        std::set<PointId> seen;
        PointId cur = heads.front();
        bool cyclic = false;
        while (true) {
            if (!seen.insert(cur).second) {
                cyclic = true;
                break;
            }
            auto it = next.find(cur);
            if (it == next.end()) break;
            cur = it->second;
        }
        if (cyclic)
            defect("point order not acyclic", {l.str()});
        else if (seen.size() != pts.size() || heads.size() != 1)
            defect("point order not a single chain", {l.str()});
    }
    for (const auto& [l, es] : edges)
        if (!lane_points.count(l) && !es.empty()) defect("point order on lane without points", {l.str()});

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Index-based view of a valid RoadNetwork. Lanes, roads and points are
/// numbered in id order so derived orderings are stable.
class CompiledNetwork {
public:
    struct Overlap {
        int start = -1;
        int end = -1;
    };

    explicit CompiledNetwork(RoadNetwork source) : source_(std::move(source)) {
        if (auto defects = validate_network(source_); !defects.empty()) {
            std::string msg = "invalid road network:";
            for (const auto& d : defects) msg += "\n  " + d.message();
            throw InvalidInput(msg);
        }
        for (const Road& r : source_.roads) roads_.push_back(r.id);
        std::sort(roads_.begin(), roads_.end());
        for (const Road& r : source_.roads)
            for (const LaneId& l : r.lanes) lanes_.push_back(l);
        std::sort(lanes_.begin(), lanes_.end());
        for (const auto& [p, k] : source_.points) {
            points_.push_back(p);
            point_class_.push_back(k);
        }

        const int nl = lane_count();
        lane_road_.assign(nl, -1);
        lane_pos_.assign(nl, -1);
        road_lanes_.assign(roads_.size(), {});
        cleft_.assign(static_cast<std::size_t>(nl) * nl, false);
        for (const Road& r : source_.roads) {
            const int ri = road_index(r.id).value();
            for (std::size_t k = 0; k < r.lanes.size(); ++k) {
                const int li = lane_index(r.lanes[k]).value();
                lane_road_[li] = ri;
                lane_pos_[li] = static_cast<int>(k);
                road_lanes_[ri].push_back(li);
            }
            for (std::size_t a = 0; a < r.lanes.size(); ++a)
                for (std::size_t b = a + 1; b < r.lanes.size(); ++b)
                    cleft_[lane_index(r.lanes[a]).value() * nl + lane_index(r.lanes[b]).value()] = true;
        }

        const int np = point_count();
        point_lanes_.assign(np, {});
        lane_points_.assign(nl, {});
        succ_c_.assign(np, {});
        for (const auto& [l, p] : source_.affiliation) {
            point_lanes_[point_index(p).value()].push_back(lane_index(l).value());
        }
        for (auto& v : point_lanes_) std::sort(v.begin(), v.end());
        for (const auto& [p, l] : source_.succ_c) succ_c_[point_index(p).value()].push_back(lane_index(l).value());

        // Chain order of points on each lane.
        std::vector<std::map<int, int>> next(nl);
        std::vector<std::set<int>> has_pred(nl);
        for (const auto& [l, a, b] : source_.succ_p) {
            const int li = lane_index(l).value();
            next[li][point_index(a).value()] = point_index(b).value();
            has_pred[li].insert(point_index(b).value());
        }
        rank_.assign(static_cast<std::size_t>(nl) * np, -1);
        for (int li = 0; li < nl; ++li) {
            std::vector<int> affiliated;
            for (int pi = 0; pi < np; ++pi)
                if (std::binary_search(point_lanes_[pi].begin(), point_lanes_[pi].end(), li)) affiliated.push_back(pi);
            if (affiliated.empty()) continue;
            int head = -1;
            for (int pi : affiliated)
                if (!has_pred[li].count(pi)) head = pi;
            for (int cur = head; cur >= 0;) {
                rank_[li * np + cur] = static_cast<int>(lane_points_[li].size());
                lane_points_[li].push_back(cur);
                auto it = next[li].find(cur);
                cur = it == next[li].end() ? -1 : it->second;
            }
        }

        for (const auto& [a, b] : source_.overlaps) overlaps_.push_back({point_index(a).value(), point_index(b).value()});
    }

    const RoadNetwork& source() const noexcept { return source_; }

    int lane_count() const noexcept { return static_cast<int>(lanes_.size()); }
    int road_count() const noexcept { return static_cast<int>(roads_.size()); }
    int point_count() const noexcept { return static_cast<int>(points_.size()); }

    const std::vector<LaneId>& lanes() const noexcept { return lanes_; }
    const std::vector<RoadId>& roads() const noexcept { return roads_; }
    const std::vector<PointId>& points() const noexcept { return points_; }

    const LaneId& lane(int i) const { return lanes_.at(i); }
    const RoadId& road(int i) const { return roads_.at(i); }
    const PointId& point(int i) const { return points_.at(i); }

    std::optional<int> lane_index(const LaneId& id) const { return find(lanes_, id); }
    std::optional<int> road_index(const RoadId& id) const { return find(roads_, id); }
    std::optional<int> point_index(const PointId& id) const { return find(points_, id); }

    int road_of(int lane) const { return lane_road_.at(lane); }
    /// Position of a lane within its road, 0 = leftmost.
    int lane_position(int lane) const { return lane_pos_.at(lane); }
    const std::vector<int>& road_lanes(int road) const { return road_lanes_.at(road); }
    /// Transitive left-of relation within a road.
    bool cleft(int a, int b) const { return cleft_[static_cast<std::size_t>(a) * lane_count() + b]; }

    PointClass point_class(int p) const { return point_class_.at(p); }
    const std::vector<int>& point_lanes(int p) const { return point_lanes_.at(p); }
    bool on_lane(int p, int lane) const {
        const auto& v = point_lanes_.at(p);
        return std::binary_search(v.begin(), v.end(), lane);
    }
    /// Points of a lane in travel order.
    const std::vector<int>& lane_points(int lane) const { return lane_points_.at(lane); }
    /// Rank of point p along lane, or -1 when not affiliated.
    int rank_on_lane(int lane, int p) const { return rank_[static_cast<std::size_t>(lane) * point_count() + p]; }
    const std::vector<int>& successor_lanes(int p) const { return succ_c_.at(p); }
    bool is_successor(int p, int lane) const {
        const auto& v = succ_c_.at(p);
        return std::find(v.begin(), v.end(), lane) != v.end();
    }
    const std::vector<Overlap>& overlaps() const noexcept { return overlaps_; }
    /// Whether lane carries the overlap in its reference direction (start
    /// before end along travel).
    bool overlap_forward_on(const Overlap& o, int lane) const {
        return rank_on_lane(lane, o.start) < rank_on_lane(lane, o.end);
    }

private:
    template <class T>
    static std::optional<int> find(const std::vector<T>& v, const T& id) {
        auto it = std::lower_bound(v.begin(), v.end(), id);
        if (it == v.end() || !(*it == id)) return std::nullopt;
        return static_cast<int>(it - v.begin());
    }

    RoadNetwork source_;
    std::vector<RoadId> roads_;
    std::vector<LaneId> lanes_;
    std::vector<PointId> points_;
    std::vector<PointClass> point_class_;
    std::vector<int> lane_road_;
    std::vector<int> lane_pos_;
    std::vector<std::vector<int>> road_lanes_;
    std::vector<bool> cleft_;
    std::vector<std::vector<int>> point_lanes_;
    std::vector<std::vector<int>> lane_points_;
    std::vector<int> rank_;
    std::vector<std::vector<int>> succ_c_;
    std::vector<Overlap> overlaps_;
};

using NetworkPtr = std::shared_ptr<const CompiledNetwork>;

inline NetworkPtr compile(RoadNetwork n) { return std::make_shared<const CompiledNetwork>(std::move(n)); }

}  // namespace tsl
