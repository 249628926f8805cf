#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/ids.hpp"
#include "tsl/lon_rel.hpp"
#include "tsl/network.hpp"

namespace tsl {

/// Sorted lane indices occupied by one vehicle.
using LaneSet = std::vector<std::uint16_t>;

/// One time step: lane occupancy plus the vehicle-vehicle, vehicle-point
/// and overlap relations, stored densely over index universes. Vehicle
/// indices refer to the owning scenario's vehicle list, lane and point
/// indices to its CompiledNetwork.
class Scene {
public:
    Scene() = default;
    Scene(int vehicles, int points)
        : nv_(vehicles),
          np_(points),
          occ_(vehicles),
          vrel_(static_cast<std::size_t>(vehicles) * vehicles, LonRel::None),
          prel_(static_cast<std::size_t>(vehicles) * points, LonRel::None),
          orel_(static_cast<std::size_t>(vehicles) * vehicles, LonRel::None) {}

    int vehicle_count() const noexcept { return nv_; }
    int point_count() const noexcept { return np_; }

    const LaneSet& occ(int c) const { return occ_.at(c); }
    bool on(int c, int lane) const {
        const auto& s = occ_.at(c);
        return std::binary_search(s.begin(), s.end(), static_cast<std::uint16_t>(lane));
    }
    LonRel vrel(int a, int b) const { return vrel_[idx(a, b)]; }
    LonRel prel(int c, int p) const { return prel_[static_cast<std::size_t>(c) * np_ + p]; }
    LonRel orel(int a, int b) const { return orel_[idx(a, b)]; }

    void set_occ(int c, LaneSet lanes) {
        std::sort(lanes.begin(), lanes.end());
        lanes.erase(std::unique(lanes.begin(), lanes.end()), lanes.end());
        occ_.at(c) = std::move(lanes);
    }
    void add_lane(int c, int lane) {
        auto& s = occ_.at(c);
        auto it = std::lower_bound(s.begin(), s.end(), static_cast<std::uint16_t>(lane));
        if (it == s.end() || *it != lane) s.insert(it, static_cast<std::uint16_t>(lane));
    }
    /// Sets one orientation only; used by parsers so that asymmetric input
    /// reaches the checker intact.
    void set_vrel_raw(int a, int b, LonRel d) { vrel_[idx(a, b)] = d; }
    void set_orel_raw(int a, int b, LonRel d) { orel_[idx(a, b)] = d; }
    /// Sets both orientations, keeping the pair symmetric.
    void set_vrel(int a, int b, LonRel d) {
        vrel_[idx(a, b)] = d;
        vrel_[idx(b, a)] = invert(d);
    }
    void set_orel(int a, int b, LonRel d) {
        orel_[idx(a, b)] = d;
        orel_[idx(b, a)] = invert(d);
    }
    void set_prel(int c, int p, LonRel d) { prel_[static_cast<std::size_t>(c) * np_ + p] = d; }

    friend bool operator==(const Scene&, const Scene&) = default;

    std::size_t hash() const noexcept {
        std::size_t h = 0xcbf29ce484222325ull;
        auto mix = [&h](std::size_t v) { h = (h ^ v) * 0x100000001b3ull; };
        for (const auto& s : occ_) {
            mix(s.size());
            for (auto l : s) mix(l);
        }
        for (LonRel d : vrel_) mix(static_cast<std::size_t>(d));
        for (LonRel d : prel_) mix(static_cast<std::size_t>(d) + 7);
        for (LonRel d : orel_) mix(static_cast<std::size_t>(d) + 13);
        return h;
    }

private:
    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a) * nv_ + b; }

    int nv_ = 0;
    int np_ = 0;
    std::vector<LaneSet> occ_;
    std::vector<LonRel> vrel_;
    std::vector<LonRel> prel_;
    std::vector<LonRel> orel_;
};

struct SceneHash {
    std::size_t operator()(const Scene& s) const noexcept { return s.hash(); }
};

/// A finite scene sequence over a fixed vehicle universe and network.
class Scenario {
public:
    Scenario(std::vector<VehicleId> vehicles, NetworkPtr network, std::vector<Scene> scenes)
        : vehicles_(std::move(vehicles)), network_(std::move(network)), scenes_(std::move(scenes)) {
        if (!network_) throw InvalidInput("scenario without network");
        if (scenes_.empty()) throw InvalidInput("scenario needs at least one scene");
        if (!std::is_sorted(vehicles_.begin(), vehicles_.end()) ||
            std::adjacent_find(vehicles_.begin(), vehicles_.end()) != vehicles_.end())
            throw InvalidInput("vehicle ids must be sorted and unique");
        for (const Scene& s : scenes_) {
            if (s.vehicle_count() != static_cast<int>(vehicles_.size()) || s.point_count() != network_->point_count())
                throw InvalidInput("scene does not match scenario universes");
            for (int c = 0; c < s.vehicle_count(); ++c)
                for (auto l : s.occ(c))
                    if (l >= network_->lane_count()) throw InvalidInput("scene references unknown lane");
        }
    }

    const std::vector<VehicleId>& vehicles() const noexcept { return vehicles_; }
    const CompiledNetwork& network() const noexcept { return *network_; }
    const NetworkPtr& network_ptr() const noexcept { return network_; }
    const std::vector<Scene>& scenes() const noexcept { return scenes_; }
    int horizon() const noexcept { return static_cast<int>(scenes_.size()); }
    const Scene& scene(int i) const { return scenes_.at(i); }

    std::optional<int> vehicle_index(const VehicleId& c) const {
        auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), c);
        if (it == vehicles_.end() || !(*it == c)) return std::nullopt;
        return static_cast<int>(it - vehicles_.begin());
    }

    friend bool operator==(const Scenario& a, const Scenario& b) {
        return a.vehicles_ == b.vehicles_ && a.network_ == b.network_ && a.scenes_ == b.scenes_;
    }

private:
    std::vector<VehicleId> vehicles_;
    NetworkPtr network_;
    std::vector<Scene> scenes_;
};

/// Suffix of `sc` starting at scene i; shares universes.
inline Scenario tail(const Scenario& sc, int i) {
    if (i < 0 || i >= sc.horizon())
        throw InvalidInput("tail index " + std::to_string(i) + " out of range for horizon " + std::to_string(sc.horizon()));
    return Scenario(sc.vehicles(), sc.network_ptr(), std::vector<Scene>(sc.scenes().begin() + i, sc.scenes().end()));
}

}  // namespace tsl
