#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "tsl/error.hpp"

namespace tsl {

/// True for identifiers of the form `[a-z][a-z0-9_]*`.
inline bool is_valid_identifier(std::string_view s) noexcept {
    if (s.empty() || s.front() < 'a' || s.front() > 'z') return false;
    for (char ch : s) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
        if (!ok) return false;
    }
    return true;
}

/// Strongly typed identifier. Tags keep vehicles, lanes, roads and points
/// from being mixed up; the ordering is plain string ordering.
template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {
        if (!is_valid_identifier(value_))
            throw InvalidInput("invalid " + std::string(Tag::kind) + " id '" + value_ + "'");
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;
    friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

private:
    std::string value_;
};

struct VehicleTag { static constexpr const char* kind = "vehicle"; };
struct LaneTag { static constexpr const char* kind = "lane"; };
struct RoadTag { static constexpr const char* kind = "road"; };
struct PointTag { static constexpr const char* kind = "point"; };

using VehicleId = Id<VehicleTag>;
using LaneId = Id<LaneTag>;
using RoadId = Id<RoadTag>;
using PointId = Id<PointTag>;

}  // namespace tsl

template <class Tag>
struct std::hash<tsl::Id<Tag>> {
    std::size_t operator()(const tsl::Id<Tag>& id) const noexcept { return std::hash<std::string>{}(id.str()); }
};
