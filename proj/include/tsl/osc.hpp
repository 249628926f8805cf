#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "tsl/error.hpp"
#include "tsl/facts.hpp"
#include "tsl/rules.hpp"
#include "tsl/scene.hpp"

namespace tsl {

struct Coord3 {
    double x = 0, y = 0, z = 0;
};

using CoordMap = std::map<PointId, Coord3>;

/// Reads `coord(p,x,y,z).` facts.
inline CoordMap parse_coords(std::string_view text) {
    CoordMap out;
    for (const auto& fl : read_facts(text)) {
        if (fl.directive) throw ParseError("unexpected directive in coordinate file", fl.line);
        const Atom& a = fl.atom;
        if (a.name != "coord" || a.args.size() != 4) throw ParseError("expected coord(p,x,y,z)", a.line);
        Coord3 c;
        double* dst[3] = {&c.x, &c.y, &c.z};
        for (int i = 0; i < 3; ++i) {
            try {
                std::size_t used = 0;
                *dst[i] = std::stod(a.args[i + 1], &used);
                if (used != a.args[i + 1].size()) throw std::invalid_argument(a.args[i + 1]);
            } catch (const std::logic_error&) {
                throw ParseError("coordinate '" + a.args[i + 1] + "' is not a number", a.line);
            }
        }
        out[detail::make_id<PointId>(a.args[0], a.line)] = c;
    }
    return out;
}

namespace detail {

inline std::string osc_phrase(LonRel d) {
    switch (d) {
        case LonRel::Ahead: return "ahead_of";
        case LonRel::Behind: return "behind";
        default: return "same_as";
    }
}

inline std::string meters(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s + "m";
}

}  // namespace detail

/// Renders a scenario as OpenSCENARIO DSL: points become `position_3d`
/// declarations, scenes become `parallel` blocks inside one `serial`
/// block, and each vehicle gets one `drive()` per scene whose modifiers
/// carry its lanes and its non-None relations to vehicles and points.
inline std::string emit_osc(const Scenario& sc, const std::optional<CoordMap>& coords = std::nullopt,
                            const std::string& name = "tsl_scenario") {
    if (auto vs = check_scenario(sc); !vs.empty()) {
        std::string msg = "scenario is invalid:";
        for (const auto& line : render_report(vs)) msg += "\n  " + line;
        throw SemanticError(msg);
    }
    const CompiledNetwork& n = sc.network();
    const auto& vs = sc.vehicles();
    const int nv = static_cast<int>(vs.size());
    std::string out = "scenario " + name + ":\n";
    for (const auto& v : vs) out += "    " + v.str() + ": vehicle\n";
    for (int p = 0; p < n.point_count(); ++p) {
        const PointId& id = n.point(p);
        out += "    " + id.str() + ": position_3d";
        if (coords) {
            auto it = coords->find(id);
            if (it == coords->end()) throw InvalidInput("no coordinates for point " + id.str());
            out += " = position_3d(x: " + detail::meters(it->second.x) + ", y: " + detail::meters(it->second.y) +
                   ", z: " + detail::meters(it->second.z) + ")";
        }
        out += "\n";
    }
    out += "    do serial:\n";
    for (int k = 0; k < sc.horizon(); ++k) {
        const Scene& s = sc.scene(k);
        out += "        step" + std::to_string(k) + ": parallel:\n";
        for (int c = 0; c < nv; ++c) {
            if (s.occ(c).empty()) throw SemanticError("vehicle " + vs[c].str() + " occupies no lane at step " + std::to_string(k));
            out += "            " + vs[c].str() + ".drive() with:\n";
            std::string lanes;
            for (auto l : s.occ(c)) lanes += (lanes.empty() ? "" : ", ") + n.lane(l).str();
            out += "                lateral(lanes: [" + lanes + "])\n";
            for (int o = 0; o < nv; ++o)
                if (o != c && s.vrel(c, o) != LonRel::None)
                    out += "                position(" + detail::osc_phrase(s.vrel(c, o)) + ": " + vs[o].str() + ")\n";
            for (int p = 0; p < n.point_count(); ++p)
                if (s.prel(c, p) != LonRel::None)
                    out += "                position(" + detail::osc_phrase(s.prel(c, p)) + ": " + n.point(p).str() + ")\n";
        }
    }
    return out;
}

}  // namespace tsl
