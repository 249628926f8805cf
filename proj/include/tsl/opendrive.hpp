#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "tsl/error.hpp"
#include "tsl/geometry.hpp"

namespace tsl {

/// Cubic a + b*ds + c*ds^2 + d*ds^3 starting at `offset`.
struct CubicPoly {
    double offset = 0.0;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    double eval(double s) const {
        const double ds = s - offset;
        return a + ds * (b + ds * (c + ds * d));
    }
};

/// Evaluates the piecewise cubic whose last entry starts at or before s.
inline double eval_piecewise(const std::vector<CubicPoly>& polys, double s) {
    if (polys.empty()) return 0.0;
    const CubicPoly* cur = &polys.front();
    for (const auto& p : polys)
        if (p.offset <= s + 1e-12) cur = &p;
    return cur->eval(s);
}

struct MapLane {
    int id = 0;
    std::string type;
    std::vector<CubicPoly> widths;  // offsets relative to the section start
    std::optional<int> predecessor;
    std::optional<int> successor;
    std::size_t line = 0;

    bool driving() const { return type == "driving"; }
};

struct LaneSection {
    double s = 0.0;
    std::vector<MapLane> left;   // ids > 0, ascending
    std::vector<MapLane> right;  // ids < 0, descending
    std::size_t line = 0;

    const MapLane* lane(int id) const {
        for (const auto* side : {&left, &right})
            for (const auto& l : *side)
                if (l.id == id) return &l;
        return nullptr;
    }
};

struct RoadLink {
    std::string element_type;  // "road" or "junction"
    std::string element_id;
    std::string contact_point;  // "start" or "end" for roads
};

struct MapRoad {
    std::string id;
    std::string junction = "-1";
    double length = 0.0;
    std::vector<RefLineSegment> geometry;
    std::vector<CubicPoly> lane_offsets;
    std::vector<LaneSection> sections;
    std::optional<RoadLink> predecessor;
    std::optional<RoadLink> successor;
    std::size_t line = 0;

    double section_end(std::size_t i) const { return i + 1 < sections.size() ? sections[i + 1].s : length; }

    /// Reference line point and heading at s.
    std::pair<Vec2, double> reference(double s) const {
        const RefLineSegment* g = &geometry.front();
        for (const auto& seg : geometry)
            if (seg.s0 <= s + 1e-12) g = &seg;
        const double u = std::clamp(s - g->s0, 0.0, g->length);
        const double extra = s - g->s0 - u;  // beyond the last segment end
        Vec2 p = g->position(u);
        const double h = g->heading_at(u);
        if (extra > 0) p = p + extra * Vec2{std::cos(h), std::sin(h)};
        return {p, h};
    }

    /// Lateral offset of the inner and outer border of a lane at s.
    std::pair<double, double> lane_borders(std::size_t section, int lane_id, double s) const {
        const LaneSection& sec = sections.at(section);
        const double ds = s - sec.s;
        double t = eval_piecewise(lane_offsets, s);
        const auto& side = lane_id > 0 ? sec.left : sec.right;
        const double sign = lane_id > 0 ? 1.0 : -1.0;
        for (const auto& l : side) {
            const double w = eval_piecewise(l.widths, ds);
            if (l.id == lane_id) return {t, t + sign * w};
            t += sign * w;
        }
        throw InvalidInput("road " + id + " has no lane " + std::to_string(lane_id));
    }

    double lane_width(std::size_t section, int lane_id, double s) const {
        auto [inner, outer] = lane_borders(section, lane_id, s);
        return std::abs(outer - inner);
    }

    double lane_center_offset(std::size_t section, int lane_id, double s) const {
        auto [inner, outer] = lane_borders(section, lane_id, s);
        return 0.5 * (inner + outer);
    }
};

struct LaneLink {
    int from = 0;
    int to = 0;
};

struct JunctionConnection {
    std::string id;
    std::string incoming_road;
    std::string connecting_road;
    std::string contact_point;
    std::vector<LaneLink> lane_links;
};

struct Junction {
    std::string id;
    std::vector<JunctionConnection> connections;
    std::size_t line = 0;
};

struct MapModel {
    std::vector<MapRoad> roads;
    std::vector<Junction> junctions;
    std::vector<std::string> warnings;

    const MapRoad* find_road(const std::string& id) const {
        for (const auto& r : roads)
            if (r.id == id) return &r;
        return nullptr;
    }
    const Junction* find_junction(const std::string& id) const {
        for (const auto& j : junctions)
            if (j.id == id) return &j;
        return nullptr;
    }
};

/// One lane of one lane section.
struct LaneRef {
    std::string road;
    std::size_t section = 0;
    int lane = 0;

    friend auto operator<=>(const LaneRef&, const LaneRef&) = default;
};

namespace detail {

using boost::property_tree::ptree;

/// Line numbers of start tags per element name, in document order.
/// property_tree keeps no positions, so they are recovered from the text.
inline std::map<std::string, std::vector<std::size_t>> scan_tag_lines(const std::string& text) {
    std::map<std::string, std::vector<std::size_t>> out;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '\n') {
            ++line;
            continue;
        }
        if (ch != '<') continue;
        if (text.compare(i, 4, "<!--") == 0) {
            const auto end = text.find("-->", i);
            const auto stop = end == std::string::npos ? text.size() : end;
            line += static_cast<std::size_t>(std::count(text.begin() + i, text.begin() + stop, '\n'));
            i = stop;
            continue;
        }
        if (i + 1 < text.size() && (text[i + 1] == '/' || text[i + 1] == '?' || text[i + 1] == '!')) continue;
        std::size_t j = i + 1;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '>' && text[j] != '/') ++j;
        out[text.substr(i + 1, j - i - 1)].push_back(line);
    }
    return out;
}

class LineIndex {
public:
    LineIndex(const ptree& root, const std::string& text) {
        auto tags = scan_tag_lines(text);
        std::map<std::string, std::size_t> next;
        walk(root, tags, next);
    }
    std::size_t operator()(const ptree& node) const {
        auto it = lines_.find(&node);
        return it == lines_.end() ? 0 : it->second;
    }

private:
    void walk(const ptree& node, const std::map<std::string, std::vector<std::size_t>>& tags,
              std::map<std::string, std::size_t>& next) {
        for (const auto& [name, child] : node) {
            if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
            auto it = tags.find(name);
            std::size_t& k = next[name];
            if (it != tags.end() && k < it->second.size()) lines_[&child] = it->second[k];
            ++k;
            walk(child, tags, next);
        }
    }
    std::map<const ptree*, std::size_t> lines_;
};

inline std::string where(std::size_t line) { return line ? " (line " + std::to_string(line) + ")" : ""; }

inline std::optional<std::string> attr(const ptree& node, const char* name) {
    if (auto a = node.get_child_optional(std::string("<xmlattr>.") + name)) return a->data();
    return std::nullopt;
}

inline std::string req_attr(const ptree& node, const char* elem, const char* name, std::size_t line) {
    auto a = attr(node, name);
    if (!a) throw ParseError(std::string("<") + elem + "> lacks attribute '" + name + "'", line);
    return *a;
}

inline double num_attr(const ptree& node, const char* elem, const char* name, std::size_t line,
                       std::optional<double> fallback = std::nullopt) {
    auto a = attr(node, name);
    if (!a) {
        if (fallback) return *fallback;
        throw ParseError(std::string("<") + elem + "> lacks attribute '" + name + "'", line);
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(*a, &used);
        if (used != a->size() || !std::isfinite(v)) throw std::invalid_argument(*a);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError(std::string("<") + elem + "> attribute '" + name + "' is not a number: '" + *a + "'", line);
    }
}

inline int int_attr(const ptree& node, const char* elem, const char* name, std::size_t line) {
    const double v = num_attr(node, elem, name, line);
    if (v != std::floor(v)) throw ParseError(std::string("<") + elem + "> attribute '" + name + "' is not an integer", line);
    return static_cast<int>(v);
}

inline CubicPoly poly_attrs(const ptree& node, const char* elem, const char* offset_name, std::size_t line) {
    return {num_attr(node, elem, offset_name, line, 0.0), num_attr(node, elem, "a", line, 0.0),
            num_attr(node, elem, "b", line, 0.0), num_attr(node, elem, "c", line, 0.0),
            num_attr(node, elem, "d", line, 0.0)};
}

inline std::optional<RoadLink> parse_link(const ptree& link, const char* which, const LineIndex& lines) {
    auto node = link.get_child_optional(which);
    if (!node) return std::nullopt;
    const std::size_t line = lines(*node);
    RoadLink l;
    l.element_type = req_attr(*node, which, "elementType", line);
    l.element_id = req_attr(*node, which, "elementId", line);
    l.contact_point = attr(*node, "contactPoint").value_or("");
    if (l.element_type != "road" && l.element_type != "junction")
        throw ParseError(std::string("<") + which + "> has unknown elementType '" + l.element_type + "'", line);
    if (l.element_type == "road" && l.contact_point != "start" && l.contact_point != "end")
        throw ParseError(std::string("<") + which + "> needs contactPoint start or end", line);
    return l;
}

inline MapLane parse_lane(const ptree& node, const LineIndex& lines, std::vector<std::string>& warnings) {
    MapLane lane;
    lane.line = lines(node);
    lane.id = int_attr(node, "lane", "id", lane.line);
    lane.type = attr(node, "type").value_or("none");
    for (const auto& [name, child] : node) {
        if (name == "width") {
            lane.widths.push_back(poly_attrs(child, "width", "sOffset", lines(child)));
        } else if (name == "border") {
            throw UnsupportedFeature("lane borders are not supported" + where(lines(child)));
        } else if (name == "link") {
            if (auto p = child.get_child_optional("predecessor"))
                lane.predecessor = int_attr(*p, "predecessor", "id", lines(*p));
            if (auto s = child.get_child_optional("successor"))
                lane.successor = int_attr(*s, "successor", "id", lines(*s));
        } else if (name == "<xmlattr>" || name == "<xmlcomment>") {
            continue;
        } else if (name != "roadMark" && name != "speed" && name != "userData" && name != "height" &&
                   name != "material" && name != "access" && name != "rule" && name != "visibility") {
            warnings.push_back("ignored <" + name + "> in lane " + std::to_string(lane.id) + where(lines(child)));
        }
    }
    std::sort(lane.widths.begin(), lane.widths.end(), [](const CubicPoly& a, const CubicPoly& b) { return a.offset < b.offset; });
    if (lane.id != 0 && lane.widths.empty())
        throw ParseError("lane " + std::to_string(lane.id) + " has no <width>", lane.line);
    return lane;
}

inline void parse_geometry(const ptree& node, const LineIndex& lines, MapRoad& road) {
    const std::size_t line = lines(node);
    RefLineSegment seg;
    seg.s0 = num_attr(node, "geometry", "s", line);
    seg.origin = {num_attr(node, "geometry", "x", line), num_attr(node, "geometry", "y", line)};
    seg.heading = num_attr(node, "geometry", "hdg", line);
    seg.length = num_attr(node, "geometry", "length", line);
    if (!(seg.length > 0)) throw ParseError("geometry length must be positive", line);
    bool kind_seen = false;
    for (const auto& [name, child] : node) {
        if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
        if (kind_seen) throw ParseError("geometry has more than one primitive", line);
        kind_seen = true;
        if (name == "line") {
            seg.kind = RefLineSegment::Kind::Line;
        } else if (name == "arc") {
            seg.kind = RefLineSegment::Kind::Arc;
            seg.curvature = num_attr(child, "arc", "curvature", lines(child));
            if (seg.curvature == 0.0) throw ParseError("arc curvature must be non-zero", lines(child));
        } else if (name == "spiral" || name == "poly3" || name == "paramPoly3") {
            throw UnsupportedFeature("unsupported geometry <" + name + "> in road " + road.id + where(lines(child)));
        } else {
            throw ParseError("unknown geometry primitive <" + name + ">", lines(child));
        }
    }
    if (!kind_seen) throw ParseError("geometry without primitive", line);
    road.geometry.push_back(seg);
}

inline MapRoad parse_road(const ptree& node, const LineIndex& lines, std::vector<std::string>& warnings) {
    MapRoad road;
    road.line = lines(node);
    road.id = req_attr(node, "road", "id", road.line);
    road.length = num_attr(node, "road", "length", road.line);
    road.junction = attr(node, "junction").value_or("-1");
    if (!(road.length > 0)) throw ParseError("road " + road.id + " length must be positive", road.line);
    for (const auto& [name, child] : node) {
        if (name == "link") {
            road.predecessor = parse_link(child, "predecessor", lines);
            road.successor = parse_link(child, "successor", lines);
        } else if (name == "planView") {
            for (const auto& [gname, g] : child)
                if (gname == "geometry") parse_geometry(g, lines, road);
        } else if (name == "elevationProfile" || name == "lateralProfile") {
            if (!child.empty()) warnings.push_back("ignored <" + name + "> of road " + road.id + where(lines(child)));
        } else if (name == "lanes") {
            for (const auto& [lname, l] : child) {
                if (lname == "laneOffset") {
                    road.lane_offsets.push_back(poly_attrs(l, "laneOffset", "s", lines(l)));
                } else if (lname == "laneSection") {
                    LaneSection sec;
                    sec.line = lines(l);
                    sec.s = num_attr(l, "laneSection", "s", sec.line);
                    for (const char* side : {"left", "right"}) {
                        auto group = l.get_child_optional(side);
                        if (!group) continue;
                        for (const auto& [n2, ln] : *group) {
                            if (n2 != "lane") continue;
                            MapLane lane = parse_lane(ln, lines, warnings);
                            const bool ok = std::string(side) == "left" ? lane.id > 0 : lane.id < 0;
                            if (!ok) throw ParseError("lane id " + std::to_string(lane.id) + " on the wrong side", lane.line);
                            (std::string(side) == "left" ? sec.left : sec.right).push_back(std::move(lane));
                        }
                    }
                    std::sort(sec.left.begin(), sec.left.end(), [](auto& a, auto& b) { return a.id < b.id; });
                    std::sort(sec.right.begin(), sec.right.end(), [](auto& a, auto& b) { return a.id > b.id; });
                    for (const auto* side : {&sec.left, &sec.right})
                        for (std::size_t i = 0; i < side->size(); ++i)
                            if (std::abs((*side)[i].id) != static_cast<int>(i) + 1)
                                throw ParseError("lane ids of a section side must be consecutive", sec.line);
                    road.sections.push_back(std::move(sec));
                }
            }
        } else if (name != "<xmlattr>" && name != "<xmlcomment>" && name != "type" && name != "objects" &&
                   name != "signals" && name != "surface" && name != "railroad" && name != "userData") {
            warnings.push_back("ignored <" + name + "> of road " + road.id + where(lines(child)));
        }
    }
    if (road.geometry.empty()) throw ParseError("road " + road.id + " has no geometry", road.line);
    if (road.sections.empty()) throw ParseError("road " + road.id + " has no lane section", road.line);
    std::sort(road.geometry.begin(), road.geometry.end(), [](auto& a, auto& b) { return a.s0 < b.s0; });
    std::sort(road.lane_offsets.begin(), road.lane_offsets.end(), [](auto& a, auto& b) { return a.offset < b.offset; });
    std::stable_sort(road.sections.begin(), road.sections.end(), [](auto& a, auto& b) { return a.s < b.s; });
    for (std::size_t i = 0; i < road.sections.size(); ++i) {
        if (road.sections[i].s < -1e-9 || road.sections[i].s >= road.length)
            throw ParseError("lane section outside road " + road.id, road.sections[i].line);
        if (i && road.sections[i].s - road.sections[i - 1].s < 1e-9)
            throw ParseError("duplicate lane section position in road " + road.id, road.sections[i].line);
    }
    return road;
}

inline Junction parse_junction(const ptree& node, const LineIndex& lines) {
    Junction j;
    j.line = lines(node);
    j.id = req_attr(node, "junction", "id", j.line);
    for (const auto& [name, child] : node) {
        if (name != "connection") continue;
        const std::size_t line = lines(child);
        JunctionConnection c;
        c.id = attr(child, "id").value_or("");
        c.incoming_road = req_attr(child, "connection", "incomingRoad", line);
        c.connecting_road = req_attr(child, "connection", "connectingRoad", line);
        c.contact_point = req_attr(child, "connection", "contactPoint", line);
        if (c.contact_point != "start" && c.contact_point != "end")
            throw ParseError("connection contactPoint must be start or end", line);
        for (const auto& [ln, ll] : child)
            if (ln == "laneLink")
                c.lane_links.push_back({int_attr(ll, "laneLink", "from", lines(ll)), int_attr(ll, "laneLink", "to", lines(ll))});
        j.connections.push_back(std::move(c));
    }
    return j;
}

inline void check_references(const MapModel& m) {
    auto lane_exists = [](const MapRoad& r, std::size_t section, int id) { return r.sections.at(section).lane(id) != nullptr; };
    for (const auto& r : m.roads) {
        if (std::count_if(m.roads.begin(), m.roads.end(), [&](const MapRoad& o) { return o.id == r.id; }) > 1)
            throw InvalidInput("duplicate road id " + r.id + where(r.line));
        for (const auto* link : {&r.predecessor, &r.successor}) {
            if (!*link) continue;
            const auto& l = **link;
            const bool ok = l.element_type == "road" ? m.find_road(l.element_id) != nullptr : m.find_junction(l.element_id) != nullptr;
            if (!ok) throw InvalidInput("road " + r.id + " links to unknown " + l.element_type + " " + l.element_id + where(r.line));
        }
        if (r.junction != "-1" && !m.find_junction(r.junction))
            throw InvalidInput("road " + r.id + " belongs to unknown junction " + r.junction + where(r.line));
        for (std::size_t i = 0; i < r.sections.size(); ++i) {
            for (const auto* side : {&r.sections[i].left, &r.sections[i].right})
                for (const auto& lane : *side) {
                    if (lane.predecessor && i > 0 && !lane_exists(r, i - 1, *lane.predecessor))
                        throw InvalidInput("lane " + std::to_string(lane.id) + " of road " + r.id + " has unknown predecessor" + where(lane.line));
                    if (lane.successor && i + 1 < r.sections.size() && !lane_exists(r, i + 1, *lane.successor))
                        throw InvalidInput("lane " + std::to_string(lane.id) + " of road " + r.id + " has unknown successor" + where(lane.line));
                }
        }
    }
    for (const auto& j : m.junctions)
        for (const auto& c : j.connections) {
            const MapRoad* in = m.find_road(c.incoming_road);
            const MapRoad* con = m.find_road(c.connecting_road);
            if (!in || !con) throw InvalidInput("junction " + j.id + " connection references an unknown road" + where(j.line));
            const bool in_end = in->successor && in->successor->element_type == "junction" && in->successor->element_id == j.id;
            const bool in_start = in->predecessor && in->predecessor->element_type == "junction" && in->predecessor->element_id == j.id;
            if (!in_end && !in_start)
                throw InvalidInput("incoming road " + in->id + " is not linked to junction " + j.id + where(j.line));
            const std::size_t in_sec = in_end ? in->sections.size() - 1 : 0;
            const std::size_t con_sec = c.contact_point == "start" ? 0 : con->sections.size() - 1;
            for (const auto& ll : c.lane_links)
                if (!lane_exists(*in, in_sec, ll.from) || !lane_exists(*con, con_sec, ll.to))
                    throw InvalidInput("junction " + j.id + " lane link " + std::to_string(ll.from) + "->" + std::to_string(ll.to) +
                                       " references an unknown lane" + where(j.line));
        }
}

}  // namespace detail

/// Parses the supported OpenDRIVE subset: planView line/arc geometry,
/// lane offsets, lane sections with polynomial widths, road and lane links,
/// and junction connections. Elevation and superelevation are dropped with
/// a warning.
inline MapModel parse_opendrive(const std::string& text) {
    using boost::property_tree::ptree;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("empty OpenDRIVE document");
    ptree root;
    try {
        std::istringstream in(text);
        boost::property_tree::read_xml(in, root);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw ParseError("malformed XML: " + e.message(), e.line());
    }
    auto od = root.get_child_optional("OpenDRIVE");
    if (!od) throw ParseError("missing <OpenDRIVE> root element");
    detail::LineIndex lines(root, text);
    MapModel m;
    for (const auto& [name, child] : *od) {
        if (name == "road")
            m.roads.push_back(detail::parse_road(child, lines, m.warnings));
        else if (name == "junction")
            m.junctions.push_back(detail::parse_junction(child, lines));
    }
    if (m.roads.empty()) throw ParseError("document has no <road>");
    detail::check_references(m);
    return m;
}

/// Samples the centre line of one lane at intervals no longer than `step`,
/// ordered by increasing reference-line s (both section ends included).
inline Polyline sample_centerline(const MapModel& model, const LaneRef& ref, double step) {
    if (!(step > 0)) throw InvalidInput("sampling step must be positive");
    const MapRoad* road = model.find_road(ref.road);
    if (!road || ref.section >= road->sections.size() || !road->sections[ref.section].lane(ref.lane) || ref.lane == 0)
        throw InvalidInput("unknown lane " + std::to_string(ref.lane) + " of road " + ref.road);
    const double s0 = road->sections[ref.section].s, s1 = road->section_end(ref.section);
    const int n = std::max(1, static_cast<int>(std::ceil((s1 - s0) / step - 1e-9)));
    std::vector<Vec2> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double s = i == n ? s1 : s0 + (s1 - s0) * i / n;
        auto [p, h] = road->reference(s);
        pts.push_back(p + road->lane_center_offset(ref.section, ref.lane, s) * left_normal(h));
    }
    return Polyline(std::move(pts));
}

/// Samples the reference line of a road between two s values.
inline Polyline sample_reference(const MapRoad& road, double s0, double s1, double step) {
    const int n = std::max(1, static_cast<int>(std::ceil((s1 - s0) / step - 1e-9)));
    std::vector<Vec2> pts;
    for (int i = 0; i <= n; ++i) pts.push_back(road.reference(i == n ? s1 : s0 + (s1 - s0) * i / n).first);
    return Polyline(std::move(pts));
}

}  // namespace tsl
