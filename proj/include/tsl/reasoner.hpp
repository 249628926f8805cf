#pragma once

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/facts.hpp"
#include "tsl/rules.hpp"
#include "tsl/scene.hpp"

namespace tsl {

/// Ground literal over a single scene.
struct Literal {
    enum class Kind : std::uint8_t { On, Lonr, Lonpr, Lonro };
    Kind kind = Kind::On;
    int a = 0;  // vehicle
    int b = 0;  // lane, vehicle or point depending on kind
    LonRel d = LonRel::None;
    bool negated = false;

    bool holds(const Scene& s) const {
        bool v = false;
        switch (kind) {
            case Kind::On: v = s.on(a, b); break;
            case Kind::Lonr: v = s.vrel(a, b) == d; break;
            case Kind::Lonpr: v = s.prel(a, b) == d; break;
            case Kind::Lonro: v = s.orel(a, b) == d; break;
        }
        return v != negated;
    }
};

/// Conjunction of literals.
struct Goal {
    std::vector<Literal> literals;

    bool holds(const Scene& s) const {
        return std::all_of(literals.begin(), literals.end(), [&](const Literal& l) { return l.holds(s); });
    }
    bool empty() const noexcept { return literals.empty(); }
};

enum class Mode : std::uint8_t { Exact, Shortest };

inline std::string_view to_string(Mode m) noexcept { return m == Mode::Exact ? "exact" : "shortest"; }

inline std::optional<Mode> mode_from_string(std::string_view s) {
    if (s == "exact") return Mode::Exact;
    if (s == "shortest") return Mode::Shortest;
    return std::nullopt;
}

struct ExpansionRequest {
    NetworkPtr network;
    std::vector<VehicleId> vehicles;
    Scene initial;
    int horizon = 1;
    Mode mode = Mode::Exact;
    std::optional<Goal> goal;
    Goal always;               // must hold in every scene
    int workers = 1;
    std::size_t max_scenarios = 0;  // 0: unlimited
};

struct ExpansionStats {
    std::size_t expanded = 0;  // scenes whose successors were computed
    std::size_t pruned = 0;    // candidate scenes rejected by the rule filters
    std::size_t distinct = 0;  // distinct scenes reached
    int horizon = 0;           // length of the returned scenarios, 0 if none
    double seconds = 0.0;
};

struct ExpansionResult {
    std::vector<Scenario> scenarios;
    ExpansionStats stats;
};

namespace detail {

/// One way a vehicle's occupancy may evolve in a single step.
struct OccOption {
    LaneSet lanes;
    bool changed = false;
    bool road_change = false;
};

inline std::vector<OccOption> occupancy_options(const Scene& s, const CompiledNetwork& n, int c) {
    std::vector<OccOption> out;
    const LaneSet& cur = s.occ(c);
    const int road = road_of(s, n, c);
    out.push_back({cur, false, false});
    if (road < 0) return out;
    const auto& lanes = n.road_lanes(road);
    const int k = static_cast<int>(lanes.size());
    auto push = [&](LaneSet ls) {
        std::sort(ls.begin(), ls.end());
        if (ls == cur) return;
        std::size_t diff = 0;
        for (auto l : cur) diff += !std::binary_search(ls.begin(), ls.end(), l);
        for (auto l : ls) diff += !std::binary_search(cur.begin(), cur.end(), l);
        if (diff <= 1) out.push_back({std::move(ls), true, false});
    };
    for (int i = 0; i < k; ++i) {
        push({static_cast<std::uint16_t>(lanes[i])});
        if (i + 1 < k) push({static_cast<std::uint16_t>(lanes[i]), static_cast<std::uint16_t>(lanes[i + 1])});
    }
    std::vector<int> targets;
    for (int p = 0; p < n.point_count(); ++p) {
        if (n.point_class(p) != PointClass::Connection || s.prel(c, p) != LonRel::Cover) continue;
        for (int l2 : n.successor_lanes(p))
            if (n.road_of(l2) != road) targets.push_back(l2);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (int l2 : targets) out.push_back({{static_cast<std::uint16_t>(l2)}, true, true});
    return out;
}

/// Values a defined relation may take next when it stays defined.
inline std::vector<LonRel> continuous_next(LonRel d) {
    switch (d) {
        case LonRel::Ahead: return {LonRel::Ahead, LonRel::Cover};
        case LonRel::Behind: return {LonRel::Behind, LonRel::Cover};
        default: return {LonRel::Cover, LonRel::Ahead, LonRel::Behind};
    }
}

inline std::vector<LonRel> point_next(LonRel d) {
    switch (d) {
        case LonRel::Ahead: return {LonRel::Ahead};
        case LonRel::Cover: return {LonRel::Cover, LonRel::Ahead};
        default: return {LonRel::Behind, LonRel::Cover};
    }
}

/// Enumerates candidate successors. Occupancy choices come first; they fix
/// which relation atoms are None. Remaining atoms take locally admissible
/// values under a per-vehicle budget of one event, and full scene and
/// transition checks filter the result.
class SuccessorGen {
public:
    SuccessorGen(const Scene& s, const CompiledNetwork& n) : s_(s), n_(n), nv_(s.vehicle_count()), np_(n.point_count()) {
        for (int c = 0; c < nv_; ++c) opts_.push_back(occupancy_options(s, n, c));
    }

    std::vector<Scene> run(std::size_t& pruned) {
        pruned_ = &pruned;
        Scene t(nv_, np_);
        choice_.assign(nv_, 0);
        budget_.assign(nv_, 0);
        occ_step(t, 0);
        return std::move(out_);
    }

private:
    struct AtomSlot {
        char kind;  // 'v', 'o', 'p'
        int a, b;
    };

    void occ_step(Scene& t, int c) {
        if (c == nv_) {
            build_atoms(t);
            atom_step(t, 0);
            return;
        }
        for (std::size_t i = 0; i < opts_[c].size(); ++i) {
            const OccOption& o = opts_[c][i];
            choice_[c] = static_cast<int>(i);
            t.set_occ(c, o.lanes);
            budget_[c] = o.changed ? 1 : 0;
            occ_step(t, c + 1);
        }
    }

    void build_atoms(const Scene& t) {
        atoms_.clear();
        road_t_.assign(nv_, -1);
        for (int c = 0; c < nv_; ++c) road_t_[c] = road_of(t, n_, c);
        for (int a = 0; a < nv_; ++a)
            for (int b = a + 1; b < nv_; ++b) {
                atoms_.push_back({'v', a, b});
                atoms_.push_back({'o', a, b});
            }
        for (int c = 0; c < nv_; ++c)
            for (int p = 0; p < np_; ++p) atoms_.push_back({'p', c, p});
    }

    bool affiliated(const Scene& t, int c, int p) const {
        for (auto l : t.occ(c))
            if (n_.on_lane(p, l)) return true;
        return false;
    }

    bool share_overlap(const Scene& t, int a, int b) const {
        for (const auto& o : n_.overlaps())
            if (attachment(t, n_, a, o) && attachment(t, n_, b, o)) return true;
        return false;
    }

    bool exempt(int c, int p) const {
        return opts_[c][choice_[c]].road_change && n_.point_class(p) == PointClass::Connection;
    }

    void atom_step(Scene& t, std::size_t i) {
        if (i == atoms_.size()) {
            if (t == s_ || !scene_ok(t, n_) || !transition_ok(s_, t, n_)) {
                ++*pruned_;
                return;
            }
            out_.push_back(t);
            return;
        }
        const AtomSlot& at = atoms_[i];
        if (at.kind == 'p') {
            const int c = at.a, p = at.b;
            if (!affiliated(t, c, p)) {
                t.set_prel(c, p, LonRel::None);
                atom_step(t, i + 1);
                return;
            }
            const LonRel d0 = s_.prel(c, p);
            if (d0 == LonRel::None) {
                for (LonRel d : kDefinedLonRels) {
                    t.set_prel(c, p, d);
                    atom_step(t, i + 1);
                }
                return;
            }
            for (LonRel d : point_next(d0)) {
                const bool cost = d != d0 && !exempt(c, p);
                if (cost && budget_[c] > 0) continue;
                budget_[c] += cost;
                t.set_prel(c, p, d);
                atom_step(t, i + 1);
                budget_[c] -= cost;
            }
            return;
        }
        const int a = at.a, b = at.b;
        const bool vrel = at.kind == 'v';
        const bool defined = vrel ? (road_t_[a] >= 0 && road_t_[a] == road_t_[b]) : share_overlap(t, a, b);
        auto set = [&](LonRel d) {
            if (vrel)
                t.set_vrel(a, b, d);
            else
                t.set_orel(a, b, d);
        };
        if (!defined) {
            set(LonRel::None);
            atom_step(t, i + 1);
            return;
        }
        const LonRel d0 = vrel ? s_.vrel(a, b) : s_.orel(a, b);
        if (d0 == LonRel::None) {
            for (LonRel d : kDefinedLonRels) {
                set(d);
                atom_step(t, i + 1);
            }
            return;
        }
        for (LonRel d : continuous_next(d0)) {
            const bool cost = d != d0;
            if (cost && (budget_[a] > 0 || budget_[b] > 0)) continue;
            budget_[a] += cost;
            budget_[b] += cost;
            set(d);
            atom_step(t, i + 1);
            budget_[a] -= cost;
            budget_[b] -= cost;
        }
    }

    const Scene& s_;
    const CompiledNetwork& n_;
    int nv_, np_;
    std::vector<std::vector<OccOption>> opts_;
    std::vector<int> choice_, budget_, road_t_;
    std::vector<AtomSlot> atoms_;
    std::vector<Scene> out_;
    std::size_t* pruned_ = nullptr;
};

}  // namespace detail

/// All valid non-stuttering successors of `s`, in a fixed order.
inline std::vector<Scene> successors(const Scene& s, const CompiledNetwork& n, std::size_t* pruned = nullptr) {
    std::size_t local = 0;
    auto out = detail::SuccessorGen(s, n).run(local);
    if (pruned) *pruned += local;
    return out;
}

namespace detail {

/// Interned scene graph explored layer by layer.
class SceneGraph {
public:
    SceneGraph(const CompiledNetwork& n, const Goal& always, int workers)
        : n_(n), always_(always), workers_(std::max(1, workers)) {}

    int intern(const Scene& s) {
        auto [it, fresh] = index_.try_emplace(s, static_cast<int>(scenes_.size()));
        if (fresh) {
            scenes_.push_back(s);
            succ_.emplace_back();
        }
        return it->second;
    }

    const Scene& scene(int i) const { return scenes_[i]; }
    std::size_t size() const { return scenes_.size(); }

    /// Makes sure successors of every id in `ids` are known.
    void expand(const std::vector<int>& ids, ExpansionStats& stats) {
        std::vector<int> todo;
        for (int id : ids)
            if (!succ_[id]) todo.push_back(id);
        if (todo.empty()) return;
        std::vector<std::vector<Scene>> found(todo.size());
        std::vector<std::size_t> pruned(todo.size(), 0);
        auto work = [&](std::size_t begin, std::size_t step) {
            for (std::size_t k = begin; k < todo.size(); k += step) {
                auto next = successors(scenes_[todo[k]], n_, &pruned[k]);
                std::erase_if(next, [&](const Scene& t) { return !always_.holds(t); });
                found[k] = std::move(next);
            }
        };
        const std::size_t w = std::min<std::size_t>(workers_, todo.size());
        if (w <= 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t i = 0; i < w; ++i) pool.emplace_back(work, i, w);
            for (auto& th : pool) th.join();
        }
        for (std::size_t k = 0; k < todo.size(); ++k) {
            std::vector<int> ids_out;
            for (const Scene& t : found[k]) ids_out.push_back(intern(t));
            std::sort(ids_out.begin(), ids_out.end());
            succ_[todo[k]] = std::move(ids_out);
            stats.pruned += pruned[k];
            ++stats.expanded;
        }
    }

    const std::vector<int>& succ(int id) const { return *succ_[id]; }

private:
    const CompiledNetwork& n_;
    const Goal& always_;
    int workers_;
    std::vector<Scene> scenes_;
    std::vector<std::optional<std::vector<int>>> succ_;
    std::unordered_map<Scene, int, SceneHash> index_;
};

inline std::vector<int> unique_sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace detail

/// Bounded model expansion.
///
/// Exact mode returns every scenario with exactly `horizon` scenes whose
/// final scene satisfies the goal (if any). Shortest mode returns every
/// goal-satisfying scenario of the least length not exceeding `horizon`.
inline ExpansionResult expand(const ExpansionRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!req.network) throw InvalidInput("request has no road network");
    const CompiledNetwork& n = *req.network;
    if (req.horizon < 1) throw InvalidInput("horizon must be at least 1");
    if (req.mode == Mode::Shortest && (!req.goal || req.goal->empty()))
        throw InvalidInput("shortest mode requires a goal");
    if (req.initial.vehicle_count() != static_cast<int>(req.vehicles.size()) ||
        req.initial.point_count() != n.point_count())
        throw InvalidInput("initial scene does not match the request universes");
    if (auto vs = check_scene(req.initial, n, req.vehicles); !vs.empty()) {
        std::string msg = "initial scene is invalid:";
        for (const auto& line : render_report(vs)) msg += "\n  " + line;
        throw InvalidInput(msg);
    }

    ExpansionResult result;
    auto& stats = result.stats;
    if (!req.always.holds(req.initial)) {
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
    }

    detail::SceneGraph g(n, req.always, req.workers);
    std::vector<std::vector<int>> layers{{g.intern(req.initial)}};
    auto is_goal = [&](int id) { return !req.goal || req.goal->holds(g.scene(id)); };
    auto any_goal = [&](const std::vector<int>& layer) { return std::any_of(layer.begin(), layer.end(), is_goal); };

    int length = 0;
    if (req.mode == Mode::Shortest) {
        for (int k = 1;; ++k) {
            if (any_goal(layers.back())) {
                length = k;
                break;
            }
            if (k == req.horizon || layers.back().empty()) break;
            g.expand(layers.back(), stats);
            std::vector<int> next;
            for (int id : layers.back()) next.insert(next.end(), g.succ(id).begin(), g.succ(id).end());
            layers.push_back(detail::unique_sorted(std::move(next)));
        }
    } else {
        for (int k = 1; k < req.horizon && !layers.back().empty(); ++k) {
            g.expand(layers.back(), stats);
            std::vector<int> next;
            for (int id : layers.back()) next.insert(next.end(), g.succ(id).begin(), g.succ(id).end());
            layers.push_back(detail::unique_sorted(std::move(next)));
        }
        if (static_cast<int>(layers.size()) == req.horizon) length = req.horizon;
    }
    stats.distinct = g.size();

    if (length > 0) {
        // Backward pass: keep scenes that still reach a goal scene in time.
        std::vector<std::vector<int>> live(length);
        for (int id : layers[length - 1])
            if (is_goal(id)) live[length - 1].push_back(id);
        for (int k = length - 2; k >= 0; --k)
            for (int id : layers[k]) {
                const auto& nx = g.succ(id);
                if (std::any_of(nx.begin(), nx.end(), [&](int j) {
                        return std::binary_search(live[k + 1].begin(), live[k + 1].end(), j);
                    }))
                    live[k].push_back(id);
            }

        std::vector<int> path;
        std::vector<std::string> keys;
        std::vector<Scenario> found;
        auto emit = [&]() {
            if (req.max_scenarios && found.size() >= req.max_scenarios)
                throw SemanticError("more than " + std::to_string(req.max_scenarios) + " scenarios");
            std::vector<Scene> scenes;
            for (int id : path) scenes.push_back(g.scene(id));
            found.emplace_back(req.vehicles, req.network, std::move(scenes));
        };
        auto dfs = [&](auto&& self, int id, int k) -> void {
            path.push_back(id);
            if (k == length - 1) {
                emit();
            } else {
                for (int j : g.succ(id))
                    if (std::binary_search(live[k + 1].begin(), live[k + 1].end(), j)) self(self, j, k + 1);
            }
            path.pop_back();
        };
        if (!live[0].empty()) dfs(dfs, live[0][0], 0);

        std::vector<std::pair<std::string, std::size_t>> order;
        for (std::size_t i = 0; i < found.size(); ++i) order.emplace_back(canonicalize(found[i]), i);
        std::sort(order.begin(), order.end());
        for (auto& [key, i] : order) result.scenarios.push_back(std::move(found[i]));
        if (!result.scenarios.empty()) stats.horizon = length;
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Concatenated canonical renderings, each introduced by `#scenario <n>`.
inline std::string render_result(const std::vector<Scenario>& scenarios) {
    std::string out;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        out += "#scenario " + std::to_string(i + 1) + "\n";
        out += render_scenario(scenarios[i]);
    }
    return out;
}

namespace detail {

inline Literal make_literal(const Atom& a, const CompiledNetwork& n, const std::vector<VehicleId>& vehicles) {
    auto fail = [&](const std::string& what) {
        return InvalidInput(what + " in '" + a.render() + "' (line " + std::to_string(a.line) + ")");
    };
    auto vidx = [&](const std::string& s) {
        auto it = std::find_if(vehicles.begin(), vehicles.end(), [&](const VehicleId& v) { return v.str() == s; });
        if (it == vehicles.end()) throw fail("unknown vehicle '" + s + "'");
        return static_cast<int>(it - vehicles.begin());
    };
    auto rel = [&](const std::string& s) {
        auto d = lon_rel_from_string(s);
        if (!d) throw fail("unknown relation value '" + s + "'");
        return *d;
    };
    Literal l;
    l.negated = a.negated;
    const std::size_t arity = a.name == "on" ? 2 : 3;
    if (a.args.size() != arity) throw fail("wrong arity");
    if (a.name == "on") {
        l.kind = Literal::Kind::On;
        l.a = vidx(a.args[0]);
        auto li = is_valid_identifier(a.args[1]) ? n.lane_index(LaneId(a.args[1])) : std::nullopt;
        if (!li) throw fail("unknown lane '" + a.args[1] + "'");
        l.b = *li;
    } else if (a.name == "lonr" || a.name == "lonro") {
        l.kind = a.name == "lonr" ? Literal::Kind::Lonr : Literal::Kind::Lonro;
        l.a = vidx(a.args[0]);
        l.b = vidx(a.args[1]);
        l.d = rel(a.args[2]);
    } else if (a.name == "lonpr") {
        l.kind = Literal::Kind::Lonpr;
        l.a = vidx(a.args[0]);
        auto pi = is_valid_identifier(a.args[1]) ? n.point_index(PointId(a.args[1])) : std::nullopt;
        if (!pi) throw fail("unknown point '" + a.args[1] + "'");
        l.b = *pi;
        l.d = rel(a.args[2]);
    } else {
        throw fail("unsupported goal predicate");
    }
    return l;
}

}  // namespace detail

/// Parses a request file: network facts, an `#init` block of scene atoms,
/// and the directives `#horizon`, `#mode`, `#goal` and `#always`.
inline ExpansionRequest parse_request(std::string_view text) {
    std::vector<Atom> network_atoms, init_atoms, goal_atoms, always_atoms;
    std::optional<int> horizon;
    std::optional<Mode> mode;
    bool in_init = false, has_goal = false;
    for (auto& fl : read_facts(text)) {
        if (fl.directive) {
            if (fl.keyword == "init") {
                in_init = true;
            } else if (fl.keyword == "horizon") {
                int t = 0;
                auto [p, ec] = std::from_chars(fl.argument.data(), fl.argument.data() + fl.argument.size(), t);
                if (ec != std::errc() || p != fl.argument.data() + fl.argument.size() || t < 1)
                    throw ParseError("horizon must be a positive integer", fl.line);
                horizon = t;
            } else if (fl.keyword == "mode") {
                mode = mode_from_string(fl.argument);
                if (!mode) throw ParseError("mode must be 'exact' or 'shortest'", fl.line);
            } else if (fl.keyword == "goal" || fl.keyword == "always") {
                auto atoms = detail::parse_atom_list(fl.argument, fl.line);
                auto& dst = fl.keyword == "goal" ? goal_atoms : always_atoms;
                dst.insert(dst.end(), atoms.begin(), atoms.end());
                if (fl.keyword == "goal") has_goal = true;
            } else {
                throw ParseError("unknown directive '#" + fl.keyword + "'", fl.line);
            }
            continue;
        }
        if (is_network_predicate(fl.atom.name))
            network_atoms.push_back(std::move(fl.atom));
        else if (fl.atom.name == "vehicle" || in_init)
            init_atoms.push_back(std::move(fl.atom));
        else
            throw ParseError("scene atom outside the '#init' block", fl.atom.line);
    }
    if (!horizon) throw ParseError("request has no '#horizon'");
    ExpansionRequest req;
    req.network = compile(network_from_atoms(network_atoms));
    req.vehicles = vehicles_of(init_atoms);
    if (req.vehicles.empty()) throw InvalidInput("request declares no vehicles");
    req.initial = scene_from_atoms(init_atoms, *req.network, req.vehicles);
    req.horizon = *horizon;
    req.mode = mode.value_or(Mode::Exact);
    if (has_goal) {
        Goal g;
        for (const Atom& a : goal_atoms) g.literals.push_back(detail::make_literal(a, *req.network, req.vehicles));
        req.goal = std::move(g);
    }
    for (const Atom& a : always_atoms) req.always.literals.push_back(detail::make_literal(a, *req.network, req.vehicles));
    return req;
}

}  // namespace tsl
