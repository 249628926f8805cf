#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/geometry.hpp"
#include "tsl/network.hpp"
#include "tsl/opendrive.hpp"
#include "tsl/rules.hpp"
#include "tsl/scene.hpp"

namespace tsl {

struct AbstractionParams {
    double step = 0.5;                // centreline sampling, m
    double intersection_tol = 0.05;   // centreline crossing distance, m
    double overlap_ratio = 0.5;       // corridor half-width as a fraction of the narrower lane
    double min_overlap = 1.0;         // shortest overlap run, m
    double connection_radius = 1.0;   // crossings this close to a shared connection point are ignored, m
    double half_width = 0.9;          // lateral vehicle footprint, m
    double overlap_angle = 20.0;      // widest heading difference inside an overlap, degrees

    void validate() const {
        for (double v : {step, intersection_tol, overlap_ratio, min_overlap, connection_radius, half_width, overlap_angle})
            if (!(v > 0) || !std::isfinite(v)) throw InvalidInput("tolerances must be positive");
        if (overlap_angle >= 90.0) throw InvalidInput("overlap angle must be below 90 degrees");
    }
};

/// Geometry behind one abstract road: one side of one lane section.
struct AbstractRoad {
    RoadId id;
    const MapRoad* map_road = nullptr;
    std::size_t section = 0;
    bool forward = true;      // travels towards increasing reference s
    double s0 = 0.0, s1 = 0.0;
    Polyline reference{{{0, 0}, {1, 0}}};  // increasing reference s
    std::vector<int> lanes;   // indices into AbstractMap::lanes, left to right

    /// Arclength in travel direction of the projection of p.
    double travel_s(Vec2 p) const {
        const double s = frenet_project(reference, p).s;
        return forward ? s : reference.length() - s;
    }
};

struct AbstractLane {
    LaneId id;
    int road = 0;
    int lane_id = 0;          // OpenDRIVE lane id
    Polyline center{{{0, 0}, {1, 0}}};  // travel direction
};

/// Road network plus the geometry needed to abstract traces on it.
struct AbstractMap {
    std::shared_ptr<const MapModel> model;  // roads point into this copy
    RoadNetwork network;
    std::vector<AbstractRoad> roads;
    std::vector<AbstractLane> lanes;
    std::map<PointId, Vec2> point_xy;
    std::vector<std::string> metadata;
    AbstractionParams params;

    std::string metadata_block() const {
        std::string out;
        for (const auto& m : metadata) out += "% " + m + "\n";
        return out;
    }
};

namespace detail {

inline std::string sanitize(const std::string& raw) {
    std::string s;
    for (char ch : raw) {
        const unsigned char u = static_cast<unsigned char>(ch);
        s += std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '_';
    }
    return s;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

/// Smallest distance between two non-crossing segments and the midpoint
/// of the closest pair.
inline std::pair<double, Vec2> closest_approach(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    std::pair<double, Vec2> best{1e300, {}};
    auto consider = [&](Vec2 s0, Vec2 s1, Vec2 p) {
        const Vec2 v = s1 - s0;
        const double t = std::clamp(dot(p - s0, v) / dot(v, v), 0.0, 1.0);
        const Vec2 q = s0 + t * v;
        const double d = norm(p - q);
        if (d < best.first) best = {d, 0.5 * (p + q)};
    };
    consider(a0, a1, b0);
    consider(a0, a1, b1);
    consider(b0, b1, a0);
    consider(b0, b1, a1);
    return best;
}

/// Corridor run along lane a relative to lane b.
struct Run {
    double s_begin = 0, s_end = 0;  // on a, travel frame
    int direction = 0;              // +1 same, -1 opposite
    double length() const { return s_end - s_begin; }
};

}  // namespace detail

/// Compiles a map into the abstract road network together with its geometry.
///
/// Every lane section side with driving lanes becomes one road. Connection
/// points sit where linked lane ends meet, intersection points where centre
/// lines of lanes on different roads cross, and overlap pairs bound
/// stretches where opposite lanes share pavement.
inline AbstractMap abstract_map(const MapModel& source, const AbstractionParams& params = {}) {
    params.validate();
    AbstractMap out;
    out.model = std::make_shared<const MapModel>(source);
    const MapModel& model = *out.model;
    out.params = params;
    std::set<std::string> used_ids;
    auto unique_id = [&](std::string base) {
        std::string id = base;
        for (int k = 2; used_ids.count(id); ++k) id = base + "_" + std::to_string(k);
        used_ids.insert(id);
        return id;
    };

    // Lanes and roads.
    std::map<std::tuple<std::string, std::size_t, int>, int> lane_of;
    for (const MapRoad& r : model.roads) {
        const std::string rid = detail::sanitize(r.id);
        for (std::size_t si = 0; si < r.sections.size(); ++si) {
            const LaneSection& sec = r.sections[si];
            for (bool right : {true, false}) {
                const auto& side = right ? sec.right : sec.left;
                std::vector<const MapLane*> driving;
                for (const auto& l : side)
                    if (l.driving()) driving.push_back(&l);
                if (driving.empty()) continue;
                AbstractRoad road;
                road.map_road = &r;
                road.section = si;
                road.forward = right;
                road.s0 = sec.s;
                road.s1 = r.section_end(si);
                road.reference = sample_reference(r, road.s0, road.s1, params.step);
                road.id = RoadId(unique_id("r" + rid + "_s" + std::to_string(si) + (right ? "_r" : "_l")));
                const int road_index = static_cast<int>(out.roads.size());
                // Left to right in travel direction: innermost lane first on
                // both sides.
                for (const MapLane* l : driving) {
                    AbstractLane lane;
                    lane.lane_id = l->id;
                    lane.road = road_index;
                    lane.id = LaneId(unique_id("l" + rid + "_s" + std::to_string(si) + "_" + (l->id < 0 ? "n" : "p") +
                                               std::to_string(std::abs(l->id))));
                    Polyline c = sample_centerline(model, {r.id, si, l->id}, params.step);
                    lane.center = right ? c : c.reversed();
                    lane_of[{r.id, si, l->id}] = static_cast<int>(out.lanes.size());
                    road.lanes.push_back(static_cast<int>(out.lanes.size()));
                    out.lanes.push_back(std::move(lane));
                }
                out.roads.push_back(std::move(road));
            }
        }
    }
    if (out.lanes.empty()) throw InvalidInput("map has no driving lanes");
    const int nl = static_cast<int>(out.lanes.size());
    auto lane_width_at = [&](int li, Vec2 p) {
        const AbstractRoad& r = out.roads[out.lanes[li].road];
        const double s = r.s0 + frenet_project(r.reference, p).s;
        return r.map_road->lane_width(r.section, out.lanes[li].lane_id, std::clamp(s, r.s0, r.s1));
    };

    // Connection points from lane links. Endpoint 2i is the low-s end of
    // lane i, 2i+1 the high-s end.
    detail::UnionFind uf(2 * static_cast<std::size_t>(nl));
    std::vector<std::pair<int, int>> joins;
    auto endpoint = [&](const std::string& road, std::size_t sec, int lane, bool high) -> std::optional<int> {
        auto it = lane_of.find({road, sec, lane});
        if (it == lane_of.end()) return std::nullopt;
        return 2 * it->second + (high ? 1 : 0);
    };
    auto join = [&](std::optional<int> a, std::optional<int> b) {
        if (!a || !b || *a / 2 == *b / 2) return;
        uf.unite(*a, *b);
        joins.emplace_back(*a, *b);
    };
    for (const MapRoad& r : model.roads) {
        const std::size_t last = r.sections.size() - 1;
        for (std::size_t si = 0; si < r.sections.size(); ++si) {
            for (const auto* side : {&r.sections[si].left, &r.sections[si].right})
                for (const MapLane& l : *side) {
                    if (l.successor && si < last) join(endpoint(r.id, si, l.id, true), endpoint(r.id, si + 1, *l.successor, false));
                    if (l.predecessor && si > 0) join(endpoint(r.id, si, l.id, false), endpoint(r.id, si - 1, *l.predecessor, true));
                    if (l.successor && si == last && r.successor && r.successor->element_type == "road") {
                        const MapRoad* x = model.find_road(r.successor->element_id);
                        const bool start = r.successor->contact_point == "start";
                        join(endpoint(r.id, si, l.id, true), endpoint(x->id, start ? 0 : x->sections.size() - 1, *l.successor, !start));
                    }
                    if (l.predecessor && si == 0 && r.predecessor && r.predecessor->element_type == "road") {
                        const MapRoad* x = model.find_road(r.predecessor->element_id);
                        const bool start = r.predecessor->contact_point == "start";
                        join(endpoint(r.id, si, l.id, false), endpoint(x->id, start ? 0 : x->sections.size() - 1, *l.predecessor, !start));
                    }
                }
        }
    }
    for (const Junction& j : model.junctions)
        for (const JunctionConnection& c : j.connections) {
            const MapRoad* in = model.find_road(c.incoming_road);
            const MapRoad* con = model.find_road(c.connecting_road);
            const bool in_high = in->successor && in->successor->element_type == "junction" && in->successor->element_id == j.id;
            const bool con_start = c.contact_point == "start";
            for (const LaneLink& ll : c.lane_links)
                join(endpoint(in->id, in_high ? in->sections.size() - 1 : 0, ll.from, in_high),
                     endpoint(con->id, con_start ? 0 : con->sections.size() - 1, ll.to, !con_start));
        }
    // A lane end is a travel end when it is the high end of a forward lane
    // or the low end of a backward one.
    auto travel_end = [&](int ep) { return (ep % 2 == 1) == out.roads[out.lanes[ep / 2].road].forward; };
    for (auto [a, b] : joins)
        if (travel_end(a) == travel_end(b))
            throw InvalidInput("lane link joins " + out.lanes[a / 2].id.str() + " and " + out.lanes[b / 2].id.str() +
                               " against their travel directions");

    RoadNetwork& net = out.network;
    for (const AbstractRoad& r : out.roads) {
        Road road{r.id, {}};
        for (int li : r.lanes) road.lanes.push_back(out.lanes[li].id);
        net.roads.push_back(std::move(road));
    }
    // Points per lane with their travel-frame arclength on that lane.
    std::vector<std::vector<std::pair<double, PointId>>> on_lane(nl);
    auto add_point = [&](const PointId& p, PointClass k, Vec2 xy) {
        net.points[p] = k;
        out.point_xy[p] = xy;
    };

    std::map<std::size_t, std::vector<int>> clusters;
    for (int ep = 0; ep < 2 * nl; ++ep) clusters[uf.find(ep)].push_back(ep);
    int pc_count = 0;
    std::vector<std::pair<int, Vec2>> connection_sites;  // lane, position
    std::map<int, std::set<int>> lane_pcs;                // lane -> connection point ordinal
    std::vector<Vec2> pc_xy;
    for (const auto& [root, eps] : clusters) {
        if (eps.size() < 2) continue;
        const PointId p("pc" + std::to_string(++pc_count));
        Vec2 sum;
        for (int ep : eps) {
            const Polyline& c = out.lanes[ep / 2].center;
            sum = sum + (travel_end(ep) ? c.points().back() : c.points().front());
        }
        const Vec2 xy = (1.0 / static_cast<double>(eps.size())) * sum;
        add_point(p, PointClass::Connection, xy);
        pc_xy.push_back(xy);
        for (int ep : eps) {
            const int li = ep / 2;
            const bool end = travel_end(ep);
            net.affiliation.emplace(out.lanes[li].id, p);
            on_lane[li].emplace_back(end ? out.lanes[li].center.length() : 0.0, p);
            lane_pcs[li].insert(pc_count - 1);
            if (!end) net.succ_c.emplace(p, out.lanes[li].id);
        }
    }

    // Corridor runs between lanes of different roads.
    const double parallel = std::cos(params.overlap_angle * 3.141592653589793 / 180.0);
    auto runs_between = [&](int a, int b) {
        std::vector<detail::Run> runs;
        const Polyline& ca = out.lanes[a].center;
        const Polyline& cb = out.lanes[b].center;
        int cur_dir = 0;
        double begin = 0, prev = 0;
        auto close = [&](double end) {
            if (cur_dir != 0) runs.push_back({begin, end, cur_dir});
            cur_dir = 0;
        };
        for (std::size_t i = 0; i < ca.size(); ++i) {
            const Vec2 p = ca.points()[i];
            const double sa = ca.arclengths()[i];
            const FrenetPose f = frenet_project(cb, p);
            int dir = 0;
            const bool interior = f.s > 1e-9 && f.s < cb.length() - 1e-9;
            const double corridor = params.overlap_ratio * std::min(lane_width_at(a, p), lane_width_at(b, cb.at(f.s)));
            if (interior && std::abs(f.d) < corridor) {
                const double c = dot(ca.tangent(sa), cb.tangent(f.s));
                dir = c > parallel ? 1 : c < -parallel ? -1 : 0;
            }
            if (dir != cur_dir) {
                close(prev);
                if (dir != 0) {
                    cur_dir = dir;
                    begin = sa;
                }
            }
            prev = sa;
        }
        close(prev);
        return runs;
    };

    int px_count = 0, ov_count = 0;
    for (int a = 0; a < nl; ++a)
        for (int b = a + 1; b < nl; ++b) {
            if (out.lanes[a].road == out.lanes[b].road) continue;
            const Polyline& ca = out.lanes[a].center;
            const Polyline& cb = out.lanes[b].center;
            const auto runs = runs_between(a, b);
            for (const auto& run : runs) {
                if (run.length() < params.min_overlap) continue;
                if (run.direction > 0) {
                    std::ostringstream m;
                    m << "same-direction overlap between " << out.lanes[a].id << " and " << out.lanes[b].id
                      << " over " << run.length() << " m left unmerged";
                    out.metadata.push_back(m.str());
                    continue;
                }
                ++ov_count;
                const PointId ps("pos" + std::to_string(ov_count)), pe("poe" + std::to_string(ov_count));
                const Vec2 xs = ca.at(run.s_begin), xe = ca.at(run.s_end);
                add_point(ps, PointClass::OverlapStart, xs);
                add_point(pe, PointClass::OverlapEnd, xe);
                net.overlaps.emplace(ps, pe);
                for (int li : {a, b}) {
                    net.affiliation.emplace(out.lanes[li].id, ps);
                    net.affiliation.emplace(out.lanes[li].id, pe);
                }
                on_lane[a].emplace_back(run.s_begin, ps);
                on_lane[a].emplace_back(run.s_end, pe);
                on_lane[b].emplace_back(frenet_project(cb, xs).s, ps);
                on_lane[b].emplace_back(frenet_project(cb, xe).s, pe);
            }
            const double margin = 2 * params.step + 1e-6;
            auto in_run = [&](double sa) -> const detail::Run* {
                for (const auto& r : runs)
                    if (sa >= r.s_begin - margin && sa <= r.s_end + margin) return &r;
                return nullptr;
            };
            std::vector<Vec2> crossings;
            for (std::size_t i = 0; i + 1 < ca.size(); ++i) {
                const Vec2 a0 = ca.points()[i], a1 = ca.points()[i + 1];
                for (std::size_t j = 0; j + 1 < cb.size(); ++j) {
                    const Vec2 b0 = cb.points()[j], b1 = cb.points()[j + 1];
                    std::optional<Vec2> hit;
                    if (auto x = segment_intersection(a0, a1, b0, b1)) {
                        hit = a0 + x->first * (a1 - a0);
                    } else if (auto near = detail::closest_approach(a0, a1, b0, b1); near.first < params.intersection_tol) {
                        hit = near.second;
                    }
                    if (!hit) continue;
                    bool near_pc = false;
                    if (lane_pcs.count(a) && lane_pcs.count(b))
                        for (int k : lane_pcs[a])
                            if (lane_pcs[b].count(k) && norm(*hit - pc_xy[k]) <= params.connection_radius) near_pc = true;
                    if (near_pc) continue;
                    const double sa = frenet_project(ca, *hit).s;
                    if (const detail::Run* r = in_run(sa)) {
                        if (r->direction < 0 && r->length() >= params.min_overlap) continue;
                        if (r->length() >= params.min_overlap / 2)
                            throw InvalidInput("ambiguous geometry between " + out.lanes[a].id.str() + " and " +
                                               out.lanes[b].id.str() + ": crossing inside a " +
                                               std::to_string(r->length()) + " m corridor run");
                    }
                    const double merge = std::max(params.intersection_tol, 2 * params.step);
                    if (std::any_of(crossings.begin(), crossings.end(), [&](Vec2 c) { return norm(c - *hit) < merge; })) continue;
                    crossings.push_back(*hit);
                }
            }
            std::sort(crossings.begin(), crossings.end(), [&](Vec2 x, Vec2 y) {
                return frenet_project(ca, x).s < frenet_project(ca, y).s;
            });
            for (Vec2 x : crossings) {
                const PointId p("px" + std::to_string(++px_count));
                add_point(p, PointClass::Intersection, x);
                for (int li : {a, b}) {
                    net.affiliation.emplace(out.lanes[li].id, p);
                    on_lane[li].emplace_back(frenet_project(out.lanes[li].center, x).s, p);
                }
            }
        }

    for (int li = 0; li < nl; ++li) {
        auto& pts = on_lane[li];
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            net.succ_p.emplace(out.lanes[li].id, pts[i].second, pts[i + 1].second);
    }

    {
        std::vector<std::string> echo;
        const std::pair<const char*, double> tol[] = {
            {"step", params.step},
            {"intersection_tol", params.intersection_tol},
            {"overlap_ratio", params.overlap_ratio},
            {"min_overlap", params.min_overlap},
            {"connection_radius", params.connection_radius},
            {"half_width", params.half_width},
            {"overlap_angle", params.overlap_angle},
        };
        for (const auto& [key, v] : tol) {
            std::ostringstream m;
            m << "tolerance " << key << " = " << v;
            echo.push_back(m.str());
        }
        out.metadata.insert(out.metadata.begin(), echo.begin(), echo.end());
    }
    for (const auto& w : model.warnings) out.metadata.push_back("warning: " + w);

    if (auto defects = validate_network(net); !defects.empty()) {
        std::string msg = "abstracted network is invalid:";
        for (const auto& d : defects) msg += "\n  " + d.message();
        throw InvalidInput(msg);
    }
    return out;
}

inline RoadNetwork abstract_network(const MapModel& model, const AbstractionParams& params = {}) {
    return abstract_map(model, params).network;
}

/// One row of a trace CSV.
struct TraceSample {
    double t = 0;
    VehicleId vehicle;
    Vec2 pos;
    double heading = 0;
    double length = 0;
    std::size_t row = 0;  // 1-based line in the CSV, 0 when synthetic
};

/// Reads `t,vehicle,x,y,heading,length` rows.
inline std::vector<TraceSample> parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    std::vector<TraceSample> out;
    bool header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!header) {
            std::string compact;
            for (char ch : line)
                if (ch != ' ' && ch != '\t') compact += ch;
            if (compact != "t,vehicle,x,y,heading,length")
                throw ParseError("trace header must be 't,vehicle,x,y,heading,length'", row);
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) throw ParseError("trace row needs 6 fields", row);
        auto num = [&](const std::string& c, const char* what) {
            try {
                std::size_t used = 0;
                const double v = std::stod(c, &used);
                if (c.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) throw std::invalid_argument(c);
                return v;
            } catch (const std::logic_error&) {
                throw ParseError(std::string("trace field '") + what + "' is not a number", row);
            }
        };
        TraceSample s;
        s.row = row;
        s.t = num(cells[0], "t");
        std::string v = cells[1];
        v.erase(std::remove_if(v.begin(), v.end(), [](char ch) { return ch == ' ' || ch == '\t'; }), v.end());
        if (!is_valid_identifier(v)) throw ParseError("invalid vehicle id '" + v + "'", row);
        s.vehicle = VehicleId(v);
        s.pos = {num(cells[2], "x"), num(cells[3], "y")};
        s.heading = num(cells[4], "heading");
        s.length = num(cells[5], "length");
        if (!(s.length > 0)) throw ParseError("vehicle length must be positive", row);
        out.push_back(std::move(s));
    }
    if (!header) throw ParseError("empty trace");
    if (out.empty()) throw ParseError("trace has no samples");
    return out;
}

namespace detail {

struct Pose {
    Vec2 pos;
    double heading = 0;
    double length = 0;
    std::size_t row = 0;
};

/// Turns poses into scenes on an abstract map.
class TraceAbstractor {
public:
    TraceAbstractor(const AbstractMap& map, NetworkPtr net) : map_(map), net_(std::move(net)) {
        const CompiledNetwork& n = *net_;
        road_index_.resize(map.roads.size());
        for (std::size_t r = 0; r < map.roads.size(); ++r) road_index_[r] = *n.road_index(map.roads[r].id);
        lane_index_.resize(map.lanes.size());
        for (std::size_t l = 0; l < map.lanes.size(); ++l) lane_index_[l] = *n.lane_index(map.lanes[l].id);
        // Point arclength in every road frame it belongs to.
        point_s_.assign(map.roads.size(), std::vector<double>(n.point_count(), 0.0));
        for (std::size_t r = 0; r < map.roads.size(); ++r)
            for (int p = 0; p < n.point_count(); ++p) point_s_[r][p] = map.roads[r].travel_s(map.point_xy.at(n.point(p)));
        for (const auto& o : n.overlaps()) {
            int fwd = -1;
            for (int l = 0; l < n.lane_count(); ++l)
                if (n.on_lane(o.start, l) && n.on_lane(o.end, l) && n.overlap_forward_on(o, l)) fwd = l;
            overlap_frame_.push_back(fwd < 0 ? -1 : map_road_of_lane(fwd));
        }
    }

    /// Road and occupied lanes of a pose, or nothing when off-road.
    /// `prev` is the road of the previous scene, -1 if none.
    std::optional<std::pair<int, LaneSet>> locate(const Pose& pose, int prev) const {
        const Vec2 dir{std::cos(pose.heading), std::sin(pose.heading)};
        const Vec2 rear = pose.pos - (0.5 * pose.length) * dir;
        struct Cand {
            int road;
            LaneSet lanes;
            double dist;
            bool along;  // heading agrees with the travel direction
        };
        std::vector<Cand> cands;
        for (std::size_t r = 0; r < map_.roads.size(); ++r) {
            const AbstractRoad& road = map_.roads[r];
            const auto& pts = road.reference.points();
            const FrenetPose f = frenet_project(road.reference, rear);
            const Vec2 t0 = road.reference.tangent(0), t1 = road.reference.tangent(road.reference.length());
            if (dot(rear - pts.front(), t0) < -1e-9 || dot(rear - pts.back(), t1) > 1e-9) continue;
            const double s = std::clamp(road.s0 + f.s, road.s0, road.s1);
            const Vec2 travel = (road.forward ? 1.0 : -1.0) * road.reference.tangent(f.s);
            Cand c{static_cast<int>(r), {}, 1e300, dot(travel, dir) > 0};
            for (int li : road.lanes) {
                auto [inner, outer] = road.map_road->lane_borders(road.section, map_.lanes[li].lane_id, s);
                const double lo = std::min(inner, outer), hi = std::max(inner, outer);
                if (f.d + map_.params.half_width >= lo && f.d - map_.params.half_width <= hi) {
                    c.lanes.push_back(static_cast<std::uint16_t>(lane_index_[li]));
                    c.dist = std::min(c.dist, std::abs(f.d - 0.5 * (lo + hi)));
                }
            }
            if (!c.lanes.empty()) {
                std::sort(c.lanes.begin(), c.lanes.end());
                cands.push_back(std::move(c));
            }
        }
        if (cands.empty()) return std::nullopt;
        // Coincident lanes of opposite roads: drop the wrong-way ones.
        if (std::any_of(cands.begin(), cands.end(), [](const Cand& c) { return c.along; }))
            cands.erase(std::remove_if(cands.begin(), cands.end(), [](const Cand& c) { return !c.along; }), cands.end());
        for (const auto& c : cands)
            if (c.road == prev) return std::pair{c.road, c.lanes};
        const Cand* best = nullptr;
        auto reachable = [&](const Cand& c) {
            if (prev < 0) return false;
            const CompiledNetwork& n = *net_;
            for (int li : map_.roads[prev].lanes)
                for (int p : n.lane_points(lane_index_[li]))
                    if (n.point_class(p) == PointClass::Connection)
                        for (auto l2 : c.lanes)
                            if (n.is_successor(p, l2)) return true;
            return false;
        };
        for (const auto& c : cands) {
            const bool better = !best || (reachable(c) && !reachable(*best)) ||
                                (reachable(c) == reachable(*best) && c.dist < best->dist);
            if (better) best = &c;
        }
        return std::pair{best->road, best->lanes};
    }

    /// Scene for simultaneous poses; `roads` carries each vehicle's road in
    /// and out.
    Scene scene(const std::vector<Pose>& poses, std::vector<int>& roads, const std::vector<VehicleId>& vehicles) const {
        const CompiledNetwork& n = *net_;
        const int nv = static_cast<int>(poses.size());
        Scene s(nv, n.point_count());
        for (int c = 0; c < nv; ++c) {
            auto loc = locate(poses[c], roads[c]);
            if (!loc) {
                std::string msg = "vehicle " + vehicles[c].str() + " is off-road";
                if (poses[c].row) msg += " at row " + std::to_string(poses[c].row);
                throw InvalidInput(msg);
            }
            roads[c] = loc->first;
            s.set_occ(c, loc->second);
        }
        // Ranges in each vehicle's own road frame.
        auto range_in = [&](int c, int r) {
            const Pose& p = poses[c];
            const Vec2 dir{std::cos(p.heading), std::sin(p.heading)};
            const Vec2 rear = p.pos - (0.5 * p.length) * dir;
            const double sr = map_.roads[r].travel_s(rear);
            const double sf = map_.roads[r].travel_s(rear + p.length * dir);
            return sf >= sr ? SRange{sr, sr + p.length} : SRange{sr - p.length, sr};
        };
        std::vector<SRange> own(nv);
        for (int c = 0; c < nv; ++c) own[c] = range_in(c, roads[c]);
        for (int a = 0; a < nv; ++a)
            for (int b = a + 1; b < nv; ++b)
                s.set_vrel(a, b, roads[a] == roads[b] ? lon_rel_of_ranges(own[a], own[b]) : LonRel::None);
        for (int c = 0; c < nv; ++c)
            for (int p = 0; p < n.point_count(); ++p) {
                bool affiliated = false;
                for (auto l : s.occ(c)) affiliated = affiliated || n.on_lane(p, l);
                const double sp = point_s_[roads[c]][p];
                s.set_prel(c, p, affiliated ? lon_rel_of_ranges(own[c], {sp, sp}) : LonRel::None);
            }
        const auto& ovs = n.overlaps();
        for (int a = 0; a < nv; ++a)
            for (int b = a + 1; b < nv; ++b) {
                LonRel d = LonRel::None;
                for (std::size_t k = 0; k < ovs.size() && d == LonRel::None; ++k) {
                    const int da = attachment(s, n, a, ovs[k]), db = attachment(s, n, b, ovs[k]);
                    if (!da || !db) continue;
                    if (da == db)
                        d = da > 0 ? s.vrel(a, b) : invert(s.vrel(a, b));
                    else if (overlap_frame_[k] >= 0)
                        d = lon_rel_of_ranges(range_in(a, overlap_frame_[k]), range_in(b, overlap_frame_[k]));
                }
                s.set_orel(a, b, d);
            }
        return s;
    }

private:
    int map_road_of_lane(int compiled_lane) const {
        for (std::size_t l = 0; l < lane_index_.size(); ++l)
            if (lane_index_[l] == compiled_lane) return map_.lanes[l].road;
        return -1;
    }

    const AbstractMap& map_;
    NetworkPtr net_;
    std::vector<int> road_index_, lane_index_, overlap_frame_;
    std::vector<std::vector<double>> point_s_;
};

inline double unwrap_near(double a, double ref) {
    constexpr double two_pi = 6.283185307179586;
    while (a - ref > two_pi / 2) a -= two_pi;
    while (a - ref < -two_pi / 2) a += two_pi;
    return a;
}

}  // namespace detail

/// Abstracts timed vehicle samples into a scenario. Scenes are taken at
/// every sample time; where a step between two of them would change a
/// vehicle more than once, poses are interpolated and the interval is
/// bisected until each step is elementary. Repeated scenes collapse.
inline Scenario abstract_trace(const std::vector<TraceSample>& samples, const AbstractMap& map) {
    auto net = compile(map.network);
    std::map<VehicleId, std::vector<const TraceSample*>> by_vehicle;
    for (const auto& s : samples) by_vehicle[s.vehicle].push_back(&s);
    if (by_vehicle.empty()) throw InvalidInput("trace has no samples");
    std::vector<VehicleId> vehicles;
    double t_begin = -1e300, t_end = 1e300;
    for (auto& [v, list] : by_vehicle) {
        std::stable_sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->t < b->t; });
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i]->t == list[i - 1]->t) throw InvalidInput("vehicle " + v.str() + " has two samples at row " + std::to_string(list[i]->row));
        vehicles.push_back(v);
        t_begin = std::max(t_begin, list.front()->t);
        t_end = std::min(t_end, list.back()->t);
    }
    if (t_begin > t_end) throw InvalidInput("vehicle sample times do not overlap");
    std::set<double> times;
    for (const auto& s : samples)
        if (s.t >= t_begin && s.t <= t_end) times.insert(s.t);

    auto poses_at = [&](double t) {
        std::vector<detail::Pose> out;
        for (const auto& v : vehicles) {
            const auto& list = by_vehicle.at(v);
            auto it = std::lower_bound(list.begin(), list.end(), t, [](auto* s, double x) { return s->t < x; });
            if (it != list.end() && (*it)->t == t) {
                out.push_back({(*it)->pos, (*it)->heading, (*it)->length, (*it)->row});
                continue;
            }
            const TraceSample* b = *it;
            const TraceSample* a = *(it - 1);
            const double u = (t - a->t) / (b->t - a->t);
            const double hb = detail::unwrap_near(b->heading, a->heading);
            out.push_back({a->pos + u * (b->pos - a->pos), a->heading + u * (hb - a->heading),
                           a->length + u * (b->length - a->length), 0});
        }
        return out;
    };

    detail::TraceAbstractor ab(map, net);
    const CompiledNetwork& n = *net;
    std::vector<Scene> scenes;
    std::vector<int> roads(vehicles.size(), -1);
    auto push = [&](Scene s) {
        if (scenes.empty() || !(scenes.back() == s)) scenes.push_back(std::move(s));
    };
    // Refines (t0, t1] given the scene and roads at t0.
    auto refine = [&](auto&& self, double t0, double t1, Scene s0, const std::vector<int>& r0, int depth,
                      std::vector<int>& r_out) -> void {
        std::vector<int> r1 = r0;
        Scene s1 = ab.scene(poses_at(t1), r1, vehicles);
        if (depth < 48 && !(s0 == s1) && !transition_ok(s0, s1, n)) {
            const double tm = 0.5 * (t0 + t1);
            if (tm > t0 && tm < t1) {
                std::vector<int> rm;
                self(self, t0, tm, s0, r0, depth + 1, rm);
                self(self, tm, t1, scenes.back(), rm, depth + 1, r_out);
                return;
            }
        }
        push(std::move(s1));
        r_out = r1;
    };
    auto it = times.begin();
    push(ab.scene(poses_at(*it), roads, vehicles));
    double prev = *it;
    for (++it; it != times.end(); ++it) {
        std::vector<int> next;
        refine(refine, prev, *it, scenes.back(), roads, 0, next);
        roads = next;
        prev = *it;
    }
    return Scenario(vehicles, net, std::move(scenes));
}

}  // namespace tsl
