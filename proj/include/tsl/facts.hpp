#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/network.hpp"
#include "tsl/scene.hpp"

namespace tsl {

/// One ground atom, e.g. `lonr(c1,c2,ahead)`, optionally negated with `not`.
struct Atom {
    std::string name;
    std::vector<std::string> args;
    bool negated = false;
    std::size_t line = 0;

    std::string render() const {
        std::string s = negated ? "not " : "";
        s += name + "(";
        for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
        return s + ")";
    }
};

/// One logical line of a fact document: an atom or a `#directive`.
struct FactLine {
    bool directive = false;
    std::string keyword;   // directive name without '#'
    std::string argument;  // rest of a directive line, trimmed
    Atom atom;
    std::size_t line = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline Atom parse_atom(std::string_view text, std::size_t line) {
    text = trim(text);
    Atom a;
    a.line = line;
    if (text.substr(0, 4) == "not ") {
        a.negated = true;
        text = trim(text.substr(4));
    }
    const auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')') throw ParseError("malformed atom '" + std::string(text) + "'", line);
    a.name = std::string(trim(text.substr(0, open)));
    if (!is_valid_identifier(a.name)) throw ParseError("malformed predicate '" + a.name + "'", line);
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        if (i == inner.size() || inner[i] == ',') {
            auto arg = trim(inner.substr(start, i - start));
            if (arg.empty()) throw ParseError("empty argument in '" + std::string(text) + "'", line);
            if (arg.find_first_of("() \t") != std::string_view::npos)
                throw ParseError("malformed atom '" + std::string(text) + "'", line);
            a.args.emplace_back(arg);
            start = i + 1;
        }
    }
    return a;
}

/// Splits `a(x,y), b(z)` at top-level commas.
inline std::vector<Atom> parse_atom_list(std::string_view text, std::size_t line) {
    std::vector<Atom> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i < text.size()) {
            if (text[i] == '(') ++depth;
            if (text[i] == ')') --depth;
            if (depth < 0) throw ParseError("unbalanced parentheses", line);
        }
        if (i == text.size() || (text[i] == ',' && depth == 0)) {
            auto piece = trim(text.substr(start, i - start));
            if (!piece.empty() && piece.back() == '.') piece.remove_suffix(1);
            if (!piece.empty()) out.push_back(parse_atom(piece, line));
            start = i + 1;
        }
    }
    if (depth != 0) throw ParseError("unbalanced parentheses", line);
    return out;
}

inline void expect_arity(const Atom& a, std::size_t n) {
    if (a.args.size() != n)
        throw ParseError(a.name + " expects " + std::to_string(n) + " arguments", a.line);
}

template <class IdT>
IdT make_id(const std::string& s, std::size_t line) {
    try {
        return IdT(s);
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), line);
    }
}

inline LonRel parse_rel(const std::string& s, std::size_t line) {
    auto d = lon_rel_from_string(s);
    if (!d) throw ParseError("unknown relation value '" + s + "'", line);
    return *d;
}

}  // namespace detail

/// Tokenizes a fact document. `%` starts a comment, atoms end with `.`;
/// a line may hold several atoms.
inline std::vector<FactLine> read_facts(std::string_view text) {
    std::vector<FactLine> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto c = raw.find('%'); c != std::string_view::npos) raw = raw.substr(0, c);
        raw = detail::trim(raw);
        if (raw.empty()) {
            if (nl == text.size()) break;
            continue;
        }
        FactLine fl;
        fl.line = line_no;
        if (raw.front() == '#') {
            fl.directive = true;
            auto sp = raw.find_first_of(" \t");
            fl.keyword = std::string(raw.substr(1, sp == std::string_view::npos ? std::string_view::npos : sp - 1));
            fl.argument = sp == std::string_view::npos ? "" : std::string(detail::trim(raw.substr(sp)));
            out.push_back(std::move(fl));
        } else {
            if (raw.back() != '.') throw ParseError("atom must end with '.'", line_no);
            // Several atoms may share a line; split at top-level periods.
            int depth = 0;
            std::size_t start = 0;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                if (raw[i] == '(') ++depth;
                if (raw[i] == ')') --depth;
                if (depth < 0) throw ParseError("unbalanced parentheses", line_no);
                if (raw[i] != '.' || depth != 0) continue;
                const auto piece = detail::trim(raw.substr(start, i + 1 - start));
                start = i + 1;
                if (piece == ".") throw ParseError("empty atom", line_no);
                for (auto& a : detail::parse_atom_list(piece, line_no)) {
                    FactLine f;
                    f.line = line_no;
                    f.atom = std::move(a);
                    out.push_back(std::move(f));
                }
            }
            if (depth != 0 || start != raw.size()) throw ParseError("unbalanced parentheses", line_no);
        }
        if (nl == text.size()) break;
    }
    return out;
}

inline bool is_network_predicate(std::string_view name) {
    static const std::set<std::string_view> k{"lane", "left", "pon", "class", "succp", "succl", "overlap"};
    return k.count(name) > 0;
}

inline bool is_scene_predicate(std::string_view name) {
    return name == "on" || name == "lonr" || name == "lonpr" || name == "lonro" || name == "vehicle";
}

/// Builds the network nonuple from its facts. Lane order within a road
/// comes from `left/2` chains; a multi-lane road must be fully chained.
inline RoadNetwork network_from_atoms(const std::vector<Atom>& atoms) {
    using detail::expect_arity;
    using detail::make_id;
    RoadNetwork n;
    std::map<RoadId, std::vector<LaneId>> road_lanes;
    std::map<LaneId, LaneId> left_of;  // l1 immediately left of l2
    std::set<LaneId> has_left;
    std::map<LaneId, std::size_t> lane_line;
    for (const Atom& a : atoms) {
        if (a.negated) throw ParseError("negated network fact", a.line);
        if (a.name == "lane") {
            expect_arity(a, 2);
            auto l = make_id<LaneId>(a.args[0], a.line);
            if (lane_line.count(l)) throw ParseError("lane " + l.str() + " declared twice", a.line);
            lane_line[l] = a.line;
            road_lanes[make_id<RoadId>(a.args[1], a.line)].push_back(l);
        } else if (a.name == "left") {
            expect_arity(a, 2);
            auto l1 = make_id<LaneId>(a.args[0], a.line), l2 = make_id<LaneId>(a.args[1], a.line);
            if (!left_of.emplace(l1, l2).second || !has_left.insert(l2).second)
                throw ParseError("lane order branches at " + l1.str(), a.line);
        } else if (a.name == "pon") {
            expect_arity(a, 2);
            n.affiliation.emplace(make_id<LaneId>(a.args[1], a.line), make_id<PointId>(a.args[0], a.line));
        } else if (a.name == "class") {
            expect_arity(a, 2);
            auto k = point_class_from_string(a.args[1]);
            if (!k) throw ParseError("unknown point class '" + a.args[1] + "'", a.line);
            n.points[make_id<PointId>(a.args[0], a.line)] = *k;
        } else if (a.name == "succp") {
            expect_arity(a, 3);
            n.succ_p.emplace(make_id<LaneId>(a.args[0], a.line), make_id<PointId>(a.args[1], a.line),
                             make_id<PointId>(a.args[2], a.line));
        } else if (a.name == "succl") {
            expect_arity(a, 2);
            n.succ_c.emplace(make_id<PointId>(a.args[0], a.line), make_id<LaneId>(a.args[1], a.line));
        } else if (a.name == "overlap") {
            expect_arity(a, 2);
            n.overlaps.emplace(make_id<PointId>(a.args[0], a.line), make_id<PointId>(a.args[1], a.line));
        } else {
            throw ParseError("unexpected predicate '" + a.name + "' in network facts", a.line);
        }
    }
    for (const auto& [l1, l2] : left_of)
        if (!lane_line.count(l1) || !lane_line.count(l2)) throw InvalidInput("left/2 references undeclared lane " + (lane_line.count(l1) ? l2 : l1).str());
    for (auto& [r, lanes] : road_lanes) {
        std::set<LaneId> members(lanes.begin(), lanes.end());
        std::vector<LaneId> heads;
        for (const LaneId& l : lanes)
            if (!has_left.count(l)) heads.push_back(l);
        Road road{r, {}};
        if (heads.size() == 1) {
            for (LaneId cur = heads.front();;) {
                road.lanes.push_back(cur);
                auto it = left_of.find(cur);
                if (it == left_of.end()) break;
                if (!members.count(it->second)) throw InvalidInput("left/2 links lanes of different roads at " + cur.str());
                cur = it->second;
                if (road.lanes.size() > lanes.size()) break;
            }
        }
        if (road.lanes.size() != lanes.size())
            throw InvalidInput("lanes of road " + r.str() + " are not ordered by a single left/2 chain");
        n.roads.push_back(std::move(road));
    }
    return n;
}

inline std::string render_network(const RoadNetwork& n) {
    std::vector<std::string> lanes, lefts, classes, pons, succps, succls, overlaps;
    for (const Road& r : n.roads) {
        for (std::size_t i = 0; i < r.lanes.size(); ++i) {
            lanes.push_back("lane(" + r.lanes[i].str() + "," + r.id.str() + ").");
            if (i + 1 < r.lanes.size()) lefts.push_back("left(" + r.lanes[i].str() + "," + r.lanes[i + 1].str() + ").");
        }
    }
    for (const auto& [p, k] : n.points) classes.push_back("class(" + p.str() + "," + std::string(to_string(k)) + ").");
    for (const auto& [l, p] : n.affiliation) pons.push_back("pon(" + p.str() + "," + l.str() + ").");
    for (const auto& [l, a, b] : n.succ_p) succps.push_back("succp(" + l.str() + "," + a.str() + "," + b.str() + ").");
    for (const auto& [p, l] : n.succ_c) succls.push_back("succl(" + p.str() + "," + l.str() + ").");
    for (const auto& [a, b] : n.overlaps) overlaps.push_back("overlap(" + a.str() + "," + b.str() + ").");
    std::string out;
    for (auto* group : {&lanes, &lefts, &classes, &pons, &succps, &succls, &overlaps}) {
        std::sort(group->begin(), group->end());
        for (const auto& s : *group) out += s + "\n";
    }
    return out;
}

inline RoadNetwork parse_network(std::string_view text) {
    std::vector<Atom> atoms;
    for (auto& fl : read_facts(text)) {
        if (fl.directive) continue;
        if (is_network_predicate(fl.atom.name)) atoms.push_back(std::move(fl.atom));
    }
    return network_from_atoms(atoms);
}

/// Vehicle universe named by `vehicle/1` and the first argument of scene atoms.
inline std::vector<VehicleId> vehicles_of(const std::vector<Atom>& atoms) {
    std::set<VehicleId> vs;
    for (const Atom& a : atoms) {
        if (!is_scene_predicate(a.name) || a.args.empty()) continue;
        vs.insert(detail::make_id<VehicleId>(a.args[0], a.line));
        if ((a.name == "lonr" || a.name == "lonro") && a.args.size() > 1) vs.insert(detail::make_id<VehicleId>(a.args[1], a.line));
    }
    return {vs.begin(), vs.end()};
}

/// Builds one scene; relations not mentioned are None. Atoms are stored
/// exactly as written so that asymmetric input can be diagnosed.
inline Scene scene_from_atoms(const std::vector<Atom>& atoms, const CompiledNetwork& n,
                              const std::vector<VehicleId>& vehicles) {
    using detail::expect_arity;
    Scene s(static_cast<int>(vehicles.size()), n.point_count());
    auto vidx = [&](const std::string& name, std::size_t line) {
        auto it = std::lower_bound(vehicles.begin(), vehicles.end(), detail::make_id<VehicleId>(name, line));
        if (it == vehicles.end() || it->str() != name) throw InvalidInput("unknown vehicle '" + name + "' (line " + std::to_string(line) + ")");
        return static_cast<int>(it - vehicles.begin());
    };
    auto lidx = [&](const std::string& name, std::size_t line) {
        auto i = n.lane_index(detail::make_id<LaneId>(name, line));
        if (!i) throw InvalidInput("unknown lane '" + name + "' (line " + std::to_string(line) + ")");
        return *i;
    };
    auto pidx = [&](const std::string& name, std::size_t line) {
        auto i = n.point_index(detail::make_id<PointId>(name, line));
        if (!i) throw InvalidInput("unknown point '" + name + "' (line " + std::to_string(line) + ")");
        return *i;
    };
    for (const Atom& a : atoms) {
        if (a.negated) throw ParseError("negated scene atom", a.line);
        if (a.name == "vehicle") {
            expect_arity(a, 1);
            vidx(a.args[0], a.line);
        } else if (a.name == "on") {
            expect_arity(a, 2);
            s.add_lane(vidx(a.args[0], a.line), lidx(a.args[1], a.line));
        } else if (a.name == "lonr" || a.name == "lonro") {
            expect_arity(a, 3);
            const int x = vidx(a.args[0], a.line), y = vidx(a.args[1], a.line);
            if (x == y) throw InvalidInput("relation of a vehicle to itself (line " + std::to_string(a.line) + ")");
            const LonRel d = detail::parse_rel(a.args[2], a.line);
            if (a.name == "lonr")
                s.set_vrel_raw(x, y, d);
            else
                s.set_orel_raw(x, y, d);
        } else if (a.name == "lonpr") {
            expect_arity(a, 3);
            s.set_prel(vidx(a.args[0], a.line), pidx(a.args[1], a.line), detail::parse_rel(a.args[2], a.line));
        } else {
            throw ParseError("unexpected predicate '" + a.name + "' in scene", a.line);
        }
    }
    return s;
}

/// Atoms of one scene in canonical order; None relations are omitted.
inline std::string render_scene(const Scene& s, const CompiledNetwork& n, const std::vector<VehicleId>& vehicles) {
    std::string out;
    const int nv = s.vehicle_count();
    for (int c = 0; c < nv; ++c)
        for (auto l : s.occ(c)) out += "on(" + vehicles[c].str() + "," + n.lane(l).str() + ").\n";
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
            if (a != b && s.vrel(a, b) != LonRel::None)
                out += "lonr(" + vehicles[a].str() + "," + vehicles[b].str() + "," + std::string(to_string(s.vrel(a, b))) + ").\n";
    for (int c = 0; c < nv; ++c)
        for (int p = 0; p < n.point_count(); ++p)
            if (s.prel(c, p) != LonRel::None)
                out += "lonpr(" + vehicles[c].str() + "," + n.point(p).str() + "," + std::string(to_string(s.prel(c, p))) + ").\n";
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
            if (a != b && s.orel(a, b) != LonRel::None)
                out += "lonro(" + vehicles[a].str() + "," + vehicles[b].str() + "," + std::string(to_string(s.orel(a, b))) + ").\n";
    return out;
}

/// Canonical text of a scenario: vehicle declarations followed by one
/// `#step k` block per scene. Equal scenarios render to equal strings.
inline std::string render_scenario(const Scenario& sc) {
    std::string out;
    for (const auto& v : sc.vehicles()) out += "vehicle(" + v.str() + ").\n";
    for (int i = 0; i < sc.horizon(); ++i) {
        out += "#step " + std::to_string(i) + "\n";
        out += render_scene(sc.scene(i), sc.network(), sc.vehicles());
    }
    return out;
}

inline std::string canonicalize(const Scenario& sc) { return render_scenario(sc); }

/// Parses one or more scenarios. Files either hold a single scenario or
/// several introduced by `#scenario <n>` headers; network facts, if present,
/// are ignored here.
inline std::vector<Scenario> parse_scenarios(std::string_view text, const NetworkPtr& network) {
    struct Block {
        std::vector<Atom> header;
        std::vector<std::vector<Atom>> steps;
    };
    std::vector<Block> blocks(1);
    bool explicit_blocks = false;
    int expected_step = 0;
    for (auto& fl : read_facts(text)) {
        if (fl.directive) {
            if (fl.keyword == "scenario") {
                if (explicit_blocks || !blocks.back().steps.empty()) blocks.emplace_back();
                explicit_blocks = true;
                expected_step = 0;
            } else if (fl.keyword == "step") {
                int k = -1;
                auto arg = fl.argument;
                auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
                if (ec != std::errc() || p != arg.data() + arg.size() || k != expected_step)
                    throw ParseError("expected '#step " + std::to_string(expected_step) + "'", fl.line);
                ++expected_step;
                blocks.back().steps.emplace_back();
            } else {
                throw ParseError("unexpected directive '#" + fl.keyword + "'", fl.line);
            }
            continue;
        }
        if (is_network_predicate(fl.atom.name)) continue;
        if (fl.atom.name == "vehicle")
            blocks.back().header.push_back(std::move(fl.atom));
        else if (blocks.back().steps.empty())
            throw ParseError("scene atom outside a '#step' block", fl.atom.line);
        else
            blocks.back().steps.back().push_back(std::move(fl.atom));
    }
    std::vector<Scenario> out;
    for (auto& b : blocks) {
        if (b.steps.empty()) {
            if (b.header.empty() && explicit_blocks && &b == &blocks.front()) continue;
            throw ParseError("scenario without '#step' blocks");
        }
        std::vector<Atom> all = b.header;
        for (const auto& st : b.steps) all.insert(all.end(), st.begin(), st.end());
        auto vehicles = vehicles_of(all);
        std::vector<Scene> scenes;
        for (const auto& st : b.steps) {
            std::vector<Atom> atoms = b.header;
            atoms.insert(atoms.end(), st.begin(), st.end());
            scenes.push_back(scene_from_atoms(atoms, *network, vehicles));
        }
        out.emplace_back(std::move(vehicles), network, std::move(scenes));
    }
    if (out.empty()) throw ParseError("no scenario found");
    return out;
}

}  // namespace tsl
