#pragma once

#include <algorithm>
#include <array>
#include <initializer_list>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tsl/scene.hpp"

namespace tsl {

enum class RuleId : std::uint8_t {
    PR1, PR2, PR3, PR4, PR5, PR6, PR7, PR8, PR9, PR10, PR11, PR12, PR13,
    PR14_SYM, PR14_TRANS, PR14_CONT, TR1, TR2, STEP
};

inline std::string_view to_string(RuleId r) noexcept {
    static constexpr std::array<std::string_view, 19> names{
        "PR1", "PR2", "PR3", "PR4", "PR5", "PR6", "PR7", "PR8", "PR9", "PR10", "PR11", "PR12", "PR13",
        "PR14_SYM", "PR14_TRANS", "PR14_CONT", "TR1", "TR2", "STEP"};
    return names[static_cast<std::size_t>(r)];
}

/// One falsified rule instance. `step` is the scene index, or the source
/// scene of a transition when `transition` is set.
struct Violation {
    RuleId rule{};
    int step = 0;
    bool transition = false;
    std::vector<std::string> witnesses;

    std::string render() const {
        std::string s(to_string(rule));
        s += " @step " + std::to_string(step);
        if (transition) s += "->" + std::to_string(step + 1);
        s += " [";
        for (std::size_t i = 0; i < witnesses.size(); ++i) s += (i ? " " : "") + witnesses[i];
        return s + "]";
    }
    friend auto operator<=>(const Violation&, const Violation&) = default;
};

/// Sorted, one line per violation.
inline std::vector<std::string> render_report(const std::vector<Violation>& vs) {
    std::vector<std::string> lines;
    lines.reserve(vs.size());
    for (const auto& v : vs) lines.push_back(v.render());
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
}

/// Auxiliary facts derived from a scene.
struct DerivedFacts {
    std::vector<std::pair<int, int>> cleft;               // (lane, lane)
    std::vector<std::pair<int, int>> cbelong;             // (vehicle, road)
    std::vector<std::tuple<int, int, int>> fwdover;       // (vehicle, start, end)
    std::vector<std::tuple<int, int, int>> rvsover;       // (vehicle, start, end)
};

namespace detail {

struct Wit {
    char kind;  // v vehicle, l lane, p point, r road
    int index;
};

/// Road of a vehicle, -1 when it occupies no lane or lanes of two roads.
inline int road_of(const Scene& s, const CompiledNetwork& n, int c) {
    int r = -1;
    for (auto l : s.occ(c)) {
        const int rl = n.road_of(l);
        if (r >= 0 && rl != r) return -1;
        r = rl;
    }
    return r;
}

/// Direction in which vehicle c carries overlap o: +1 forward, -1 reverse,
/// 0 not attached.
inline int attachment(const Scene& s, const CompiledNetwork& n, int c, const CompiledNetwork::Overlap& o) {
    for (auto l : s.occ(c))
        if (n.on_lane(o.start, l) && n.on_lane(o.end, l)) return n.overlap_forward_on(o, l) ? 1 : -1;
    return 0;
}

/// True when the pairwise relations among three objects can be realised
/// by intervals on one axis: Ahead is transitive and no object can be both
/// ahead of and covered by the same pair arrangement.
template <class Rel>
bool triple_consistent(Rel rel) {
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
        const LonRel ab = rel(p[0], p[1]), bc = rel(p[1], p[2]);
        if (ab == LonRel::Ahead && bc == LonRel::Ahead && rel(p[0], p[2]) != LonRel::Ahead) return false;
        if (ab == LonRel::Ahead && bc == LonRel::Cover && rel(p[2], p[0]) == LonRel::Ahead) return false;
    }
    return true;
}

/// Runs every per-scene rule, calling `sink(rule, witnesses)` for each
/// violation. A sink returning false stops the scan.
template <class Sink>
bool scan_scene(const Scene& s, const CompiledNetwork& n, Sink&& sink) {
    const int nv = s.vehicle_count();
    const int np = n.point_count();
    const auto report = [&](RuleId r, std::initializer_list<Wit> w) { return sink(r, w); };

    std::vector<int> road(nv);
    for (int c = 0; c < nv; ++c) {
        const auto& occ = s.occ(c);
        road[c] = road_of(s, n, c);
        if (occ.empty() && !report(RuleId::PR6, {{'v', c}})) return false;
        if (occ.size() >= 3 && !report(RuleId::TR1, {{'v', c}})) return false;
        for (std::size_t i = 0; i < occ.size(); ++i)
            for (std::size_t j = i + 1; j < occ.size(); ++j) {
                const int r1 = n.road_of(occ[i]), r2 = n.road_of(occ[j]);
                if (r1 != r2 && !report(RuleId::PR8, {{'v', c}, {'r', std::min(r1, r2)}, {'r', std::max(r1, r2)}}))
                    return false;
            }
        for (auto l1 : occ)
            for (auto l2 : occ) {
                if (!n.cleft(l1, l2)) continue;
                for (int l3 : n.road_lanes(n.road_of(l1)))
                    if (n.cleft(l1, l3) && n.cleft(l3, l2) && !s.on(c, l3) &&
                        !report(RuleId::PR5, {{'v', c}, {'l', l1}, {'l', l2}, {'l', l3}}))
                        return false;
            }
    }

    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
            if (s.vrel(a, b) != invert(s.vrel(b, a)) && !report(RuleId::PR1, {{'v', a}, {'v', b}})) return false;
            if (s.orel(a, b) != invert(s.orel(b, a)) && !report(RuleId::PR14_SYM, {{'v', a}, {'v', b}})) return false;
            if (road[a] >= 0 && road[b] >= 0) {
                const bool same = road[a] == road[b];
                for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                    const bool none = s.vrel(x, y) == LonRel::None;
                    if (same == none && !report(RuleId::PR8, {{'v', x}, {'v', y}})) return false;
                }
            }
            if (s.vrel(a, b) == LonRel::Cover || s.vrel(b, a) == LonRel::Cover)
                for (auto l : s.occ(a))
                    if (s.on(b, l) && !report(RuleId::TR2, {{'v', a}, {'v', b}, {'l', l}})) return false;
        }

    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) {
            if (b == a) continue;
            const LonRel ab = s.vrel(a, b);
            if (ab != LonRel::Ahead && ab != LonRel::Behind && ab != LonRel::Cover) continue;
            for (int c = 0; c < nv; ++c) {
                if (c == a || c == b) continue;
                const LonRel bc = s.vrel(b, c);
                if ((ab == LonRel::Ahead || ab == LonRel::Behind) && bc == ab && s.vrel(a, c) != ab &&
                    !report(RuleId::PR2, {{'v', a}, {'v', b}, {'v', c}}))
                    return false;
                if (ab == LonRel::Ahead && bc == LonRel::Cover && s.vrel(c, a) == LonRel::Ahead &&
                    !report(RuleId::PR3, {{'v', a}, {'v', b}, {'v', c}}))
                    return false;
            }
        }

    for (int c = 0; c < nv; ++c)
        for (int p = 0; p < np; ++p) {
            bool on_affiliated = false;
            for (auto l : s.occ(c))
                if (n.on_lane(p, l)) {
                    on_affiliated = true;
                    if (s.prel(c, p) == LonRel::None && !report(RuleId::PR10, {{'v', c}, {'l', l}, {'p', p}}))
                        return false;
                }
            if (!on_affiliated && s.prel(c, p) != LonRel::None && !report(RuleId::PR10, {{'v', c}, {'p', p}}))
                return false;
        }

    for (int p = 0; p < np; ++p)
        for (int a = 0; a < nv; ++a)
            for (int b = a + 1; b < nv; ++b)
                if (s.prel(a, p) == LonRel::Cover && s.prel(b, p) == LonRel::Cover &&
                    !report(RuleId::PR11, {{'v', a}, {'v', b}, {'p', p}}))
                    return false;

    // Points on a vehicle's lane, taken in that lane's travel frame.
    for (int c = 0; c < nv; ++c)
        for (auto l : s.occ(c)) {
            const auto& pts = n.lane_points(l);
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    const int p1 = pts[i], p2 = pts[j];
                    const LonRel r1 = s.prel(c, p1), r2 = s.prel(c, p2);
                    if (r1 == LonRel::None || r2 == LonRel::None) continue;
                    // objects: 0 = c, 1 = p1, 2 = p2 (p2 lies ahead of p1)
                    auto rel = [&](int x, int y) {
                        if (x == y) return LonRel::Cover;
                        if (x == 0) return y == 1 ? r1 : r2;
                        if (y == 0) return invert(x == 1 ? r1 : r2);
                        return x == 2 ? LonRel::Ahead : LonRel::Behind;
                    };
                    if (!triple_consistent(rel) && !report(RuleId::PR14_TRANS, {{'v', c}, {'p', p1}, {'p', p2}}))
                        return false;
                }
        }
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
            const LonRel ab = s.vrel(a, b);
            if (ab == LonRel::None || s.vrel(b, a) != invert(ab)) continue;
            for (int p = 0; p < np; ++p) {
                const LonRel ap = s.prel(a, p), bp = s.prel(b, p);
                if (ap == LonRel::None || bp == LonRel::None) continue;
                auto rel = [&](int x, int y) {
                    if (x == y) return LonRel::Cover;
                    if (x == 0) return y == 1 ? ab : ap;
                    if (x == 1) return y == 0 ? invert(ab) : bp;
                    return invert(y == 0 ? ap : bp);
                };
                if (!triple_consistent(rel) && !report(RuleId::PR14_TRANS, {{'v', a}, {'v', b}, {'p', p}}))
                    return false;
            }
        }

    // Overlap segments: attachment, relation consistency and the shared
    // pavement constraint.
    std::vector<int> dir(nv);
    for (const auto& o : n.overlaps()) {
        for (int c = 0; c < nv; ++c) dir[c] = attachment(s, n, c, o);
        // Relation of a vehicle to the overlap endpoints along the reference direction.
        auto ref_prel = [&](int c, int p) { return dir[c] > 0 ? s.prel(c, p) : invert(s.prel(c, p)); };
        auto touches = [&](int c) {
            const LonRel rs = ref_prel(c, o.start), re = ref_prel(c, o.end);
            return (rs == LonRel::Cover || rs == LonRel::Ahead) && (re == LonRel::Cover || re == LonRel::Behind);
        };
        for (int a = 0; a < nv; ++a)
            for (int b = a + 1; b < nv; ++b) {
                if (!dir[a] || !dir[b]) continue;
                const LonRel q = s.orel(a, b), d = s.vrel(a, b);
                bool ok = true;
                if (dir[a] == dir[b] && d != LonRel::None)
                    ok = q == (dir[a] > 0 ? d : invert(d));
                else
                    ok = q != LonRel::None;
                if (!ok && !report(RuleId::PR13, {{'v', a}, {'v', b}, {'p', o.start}, {'p', o.end}})) return false;
                if (dir[a] != dir[b] && q == LonRel::Cover && touches(a) && touches(b) &&
                    !report(RuleId::TR2, {{'v', a}, {'v', b}, {'p', o.start}, {'p', o.end}}))
                    return false;
            }
        // Triples along the reference axis: attached vehicles plus both endpoints.
        std::vector<int> objs;
        for (int c = 0; c < nv; ++c)
            if (dir[c]) objs.push_back(c);
        objs.push_back(nv + o.start);
        objs.push_back(nv + o.end);
        auto rel = [&](int x, int y) -> LonRel {
            if (x == y) return LonRel::Cover;
            const bool xp = x >= nv, yp = y >= nv;
            if (xp && yp) return x - nv == o.end ? LonRel::Ahead : LonRel::Behind;
            if (!xp && !yp) return s.orel(x, y);
            if (!xp) return ref_prel(x, y - nv);
            return invert(ref_prel(y, x - nv));
        };
        for (std::size_t i = 0; i < objs.size(); ++i)
            for (std::size_t j = i + 1; j < objs.size(); ++j)
                for (std::size_t k = j + 1; k < objs.size(); ++k) {
                    const int t[3] = {objs[i], objs[j], objs[k]};
                    bool defined = true;
                    for (int x = 0; x < 3; ++x)
                        for (int y = 0; y < 3; ++y)
                            if (x != y && rel(t[x], t[y]) == LonRel::None) defined = false;
                    if (!defined) continue;
                    if (triple_consistent([&](int x, int y) { return rel(t[x], t[y]); })) continue;
                    auto w = [&](int o2) { return o2 >= nv ? Wit{'p', o2 - nv} : Wit{'v', o2}; };
                    if (!report(RuleId::PR14_TRANS, {w(t[0]), w(t[1]), w(t[2])})) return false;
                }
    }
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
            if (s.orel(a, b) == LonRel::None) continue;
            bool shared = false;
            for (const auto& o : n.overlaps())
                if (attachment(s, n, a, o) && attachment(s, n, b, o)) shared = true;
            if (!shared && !report(RuleId::PR13, {{'v', a}, {'v', b}})) return false;
        }
    return true;
}

/// Runs every transition rule between consecutive scenes.
template <class Sink>
bool scan_transition(const Scene& s, const Scene& t, const CompiledNetwork& n, Sink&& sink) {
    const int nv = s.vehicle_count();
    const int np = n.point_count();
    const auto report = [&](RuleId r, std::initializer_list<Wit> w) { return sink(r, w); };
    auto defined = [](LonRel d) { return d != LonRel::None; };

    std::vector<int> events(nv, 0);
    std::vector<int> road_s(nv), road_t(nv);
    for (int c = 0; c < nv; ++c) {
        road_s[c] = road_of(s, n, c);
        road_t[c] = road_of(t, n, c);
    }

    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
            bool vchanged = false, ochanged = false;
            for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                const LonRel v0 = s.vrel(x, y), v1 = t.vrel(x, y);
                if (defined(v0) && defined(v1) && v0 != v1) vchanged = true;
                const LonRel o0 = s.orel(x, y), o1 = t.orel(x, y);
                if (defined(o0) && defined(o1) && o0 != o1) ochanged = true;
            }
            bool pr4 = false, cont = false;
            for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                const LonRel v0 = s.vrel(x, y), v1 = t.vrel(x, y);
                if (defined(v0) && defined(v1) && !continuous_step(v0, v1)) pr4 = true;
                const LonRel o0 = s.orel(x, y), o1 = t.orel(x, y);
                if (defined(o0) && defined(o1) && !continuous_step(o0, o1)) cont = true;
            }
            if (pr4 && !report(RuleId::PR4, {{'v', a}, {'v', b}})) return false;
            if (cont && !report(RuleId::PR14_CONT, {{'v', a}, {'v', b}})) return false;
            if (vchanged || ochanged) {
                ++events[a];
                ++events[b];
            }
        }

    for (int c = 0; c < nv; ++c) {
        const auto& o0 = s.occ(c);
        const auto& o1 = t.occ(c);
        const bool road_change = road_s[c] >= 0 && road_t[c] >= 0 && road_s[c] != road_t[c];
        if (o0 != o1) ++events[c];

        if (!road_change) {
            std::size_t diff = 0;
            for (auto l : o0) diff += !t.on(c, l);
            for (auto l : o1) diff += !s.on(c, l);
            if (diff > 1 && !report(RuleId::PR7, {{'v', c}})) return false;
        }

        // Road change: must pass a covered connection point into exactly
        // one of its successor lanes.
        int via = -1;
        if (road_change) {
            for (int p = 0; p < np && via < 0; ++p) {
                if (n.point_class(p) != PointClass::Connection) continue;
                if (s.prel(c, p) != LonRel::Cover || t.prel(c, p) != LonRel::Ahead) continue;
                if (o1.size() == 1 && n.is_successor(p, o1[0])) via = p;
            }
            if (via < 0 && !report(RuleId::PR12, {{'v', c}})) return false;
            if (via >= 0) {
                const int l2 = o1[0];
                const int r = n.rank_on_lane(l2, via);
                for (int q : n.lane_points(l2)) {
                    if (q == via) continue;
                    const LonRel d = t.prel(c, q);
                    const bool ok = n.rank_on_lane(l2, q) > r ? (d == LonRel::Behind || d == LonRel::Cover)
                                                             : d == LonRel::Ahead;
                    if (!ok && !report(RuleId::PR12, {{'v', c}, {'p', q}})) return false;
                }
            }
        }

        for (int p = 0; p < np; ++p) {
            const LonRel d0 = s.prel(c, p), d1 = t.prel(c, p);
            bool ok = true;
            switch (d0) {
                case LonRel::Behind: ok = d1 != LonRel::Ahead; break;
                case LonRel::Cover: ok = d1 != LonRel::Behind; break;
                case LonRel::Ahead: ok = d1 == LonRel::Ahead || d1 == LonRel::None; break;
                case LonRel::None: break;
            }
            if (!ok && !report(RuleId::PR9, {{'v', c}, {'p', p}})) return false;
            if (defined(d0) && defined(d1) && d0 != d1 && p != via) ++events[c];

            if (d0 == LonRel::Cover && n.point_class(p) == PointClass::Connection) {
                for (auto l1 : o0) {
                    const bool stay = d1 == LonRel::Cover && t.on(c, l1);
                    bool pass = false;
                    if (d1 == LonRel::Ahead)
                        for (auto l2 : o1) pass = pass || n.is_successor(p, l2);
                    if (!stay && !pass && !report(RuleId::PR12, {{'v', c}, {'p', p}, {'l', l1}})) return false;
                }
            }
        }
    }

    for (int c = 0; c < nv; ++c)
        if (events[c] > 1 && !report(RuleId::STEP, {{'v', c}})) return false;
    return true;
}

template <class Scan>
std::vector<Violation> collect(const CompiledNetwork& n, const std::vector<VehicleId>& vehicles, int step,
                               bool transition, Scan&& scan) {
    std::vector<Violation> out;
    scan([&](RuleId r, std::initializer_list<Wit> ws) {
        Violation v{r, step, transition, {}};
        for (const Wit& w : ws) {
            switch (w.kind) {
                case 'v': v.witnesses.push_back(vehicles.at(w.index).str()); break;
                case 'l': v.witnesses.push_back(n.lane(w.index).str()); break;
                case 'p': v.witnesses.push_back(n.point(w.index).str()); break;
                default: v.witnesses.push_back(n.road(w.index).str()); break;
            }
        }
        out.push_back(std::move(v));
        return true;
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace detail

inline DerivedFacts derive(const Scene& s, const CompiledNetwork& n) {
    DerivedFacts f;
    for (int a = 0; a < n.lane_count(); ++a)
        for (int b = 0; b < n.lane_count(); ++b)
            if (n.cleft(a, b)) f.cleft.emplace_back(a, b);
    for (int c = 0; c < s.vehicle_count(); ++c) {
        std::vector<int> roads;
        for (auto l : s.occ(c)) roads.push_back(n.road_of(l));
        std::sort(roads.begin(), roads.end());
        roads.erase(std::unique(roads.begin(), roads.end()), roads.end());
        for (int r : roads) f.cbelong.emplace_back(c, r);
        for (const auto& o : n.overlaps()) {
            bool on_both = false;
            for (auto l : s.occ(c)) on_both = on_both || (n.on_lane(o.start, l) && n.on_lane(o.end, l));
            if (!on_both) continue;
            const LonRel a = s.prel(c, o.start), b = s.prel(c, o.end);
            if (a == LonRel::Ahead && b == LonRel::Behind) f.fwdover.emplace_back(c, o.start, o.end);
            if (a == LonRel::Behind && b == LonRel::Ahead) f.rvsover.emplace_back(c, o.start, o.end);
        }
    }
    return f;
}

/// Fast validity tests used by the reasoner.
inline bool scene_ok(const Scene& s, const CompiledNetwork& n) {
    return detail::scan_scene(s, n, [](RuleId, std::initializer_list<detail::Wit>) { return false; });
}
inline bool transition_ok(const Scene& s, const Scene& t, const CompiledNetwork& n) {
    return detail::scan_transition(s, t, n, [](RuleId, std::initializer_list<detail::Wit>) { return false; });
}

inline std::vector<Violation> check_scene(const Scene& s, const CompiledNetwork& n, const std::vector<VehicleId>& vehicles,
                                          int step = 0) {
    return detail::collect(n, vehicles, step, false, [&](auto&& sink) { detail::scan_scene(s, n, sink); });
}

inline std::vector<Violation> check_transition(const Scene& s, const Scene& t, const CompiledNetwork& n,
                                               const std::vector<VehicleId>& vehicles, int step = 0) {
    return detail::collect(n, vehicles, step, true, [&](auto&& sink) { detail::scan_transition(s, t, n, sink); });
}

/// Every per-scene rule on every scene and every transition rule on every
/// consecutive pair; the last scene carries no transition obligations.
inline std::vector<Violation> check_scenario(const Scenario& sc) {
    std::vector<Violation> out;
    for (int i = 0; i < sc.horizon(); ++i) {
        auto v = check_scene(sc.scene(i), sc.network(), sc.vehicles(), i);
        out.insert(out.end(), v.begin(), v.end());
        if (i + 1 < sc.horizon()) {
            auto w = check_transition(sc.scene(i), sc.scene(i + 1), sc.network(), sc.vehicles(), i);
            out.insert(out.end(), w.begin(), w.end());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace tsl
