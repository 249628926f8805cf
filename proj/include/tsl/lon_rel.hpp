#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>

namespace tsl {

/// Qualitative longitudinal relation of a subject to a reference object.
/// `None` marks a pair with no common longitudinal axis.
enum class LonRel : std::uint8_t { Ahead, Cover, Behind, None };

inline constexpr std::array<LonRel, 4> kAllLonRels{LonRel::Ahead, LonRel::Cover, LonRel::Behind, LonRel::None};
inline constexpr std::array<LonRel, 3> kDefinedLonRels{LonRel::Ahead, LonRel::Cover, LonRel::Behind};

/// Occupied interval along an s axis, rear end first.
struct SRange {
    double rear = 0.0;
    double front = 0.0;

    bool valid() const noexcept { return rear <= front; }
};

/// Swaps the role of subject and reference.
constexpr LonRel invert(LonRel d) noexcept {
    switch (d) {
        case LonRel::Ahead: return LonRel::Behind;
        case LonRel::Behind: return LonRel::Ahead;
        default: return d;
    }
}

/// Relation of `a` to `b`. Boundary contact counts as Cover. When the axis
/// runs against the vehicles' direction of travel, Ahead and Behind swap.
constexpr LonRel lon_rel_of_ranges(SRange a, SRange b, bool axis_aligned_with_vehicles = true) noexcept {
    LonRel r = LonRel::Cover;
    if (a.rear > b.front)
        r = LonRel::Ahead;
    else if (a.front < b.rear)
        r = LonRel::Behind;
    return axis_aligned_with_vehicles ? r : invert(r);
}

constexpr std::string_view to_string(LonRel d) noexcept {
    switch (d) {
        case LonRel::Ahead: return "ahead";
        case LonRel::Cover: return "cover";
        case LonRel::Behind: return "behind";
        case LonRel::None: return "none";
    }
    return "none";
}

inline std::optional<LonRel> lon_rel_from_string(std::string_view s) noexcept {
    for (LonRel d : kAllLonRels)
        if (to_string(d) == s) return d;
    return std::nullopt;
}

inline std::ostream& operator<<(std::ostream& os, LonRel d) { return os << to_string(d); }

/// Values a defined relation may take on the next step when it changes
/// continuously: Ahead and Behind can only reach Cover, Cover reaches all.
constexpr bool continuous_step(LonRel from, LonRel to) noexcept {
    if (from == to || from == LonRel::Cover) return true;
    return to == LonRel::Cover;
}

}  // namespace tsl
