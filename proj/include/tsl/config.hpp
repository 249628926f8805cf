#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "tsl/abstraction.hpp"
#include "tsl/error.hpp"

namespace tsl {

/// Settings shared by the command-line tools, read from `key = value`
/// lines. `#` starts a comment.
struct Config {
    AbstractionParams tolerances;
    int workers = 1;
    std::string output_dir = ".";
    std::uint64_t seed = 1;
    std::size_t max_scenarios = 1000000;

    void validate() const {
        tolerances.validate();
        if (workers < 1) throw InvalidInput("workers must be at least 1");
    }
};

inline Config parse_config(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++row;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", row);
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        auto number = [&] {
            try {
                std::size_t used = 0;
                const double v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
                return v;
            } catch (const std::logic_error&) {
                throw ParseError("value of '" + key + "' is not a number", row);
            }
        };
        auto integer = [&] {
            const double v = number();
            if (v != static_cast<double>(static_cast<long long>(v)) || v < 0) throw ParseError("value of '" + key + "' is not a non-negative integer", row);
            return static_cast<long long>(v);
        };
        if (key == "step") c.tolerances.step = number();
        else if (key == "intersection_tol") c.tolerances.intersection_tol = number();
        else if (key == "overlap_ratio") c.tolerances.overlap_ratio = number();
        else if (key == "min_overlap") c.tolerances.min_overlap = number();
        else if (key == "connection_radius") c.tolerances.connection_radius = number();
        else if (key == "half_width") c.tolerances.half_width = number();
        else if (key == "overlap_angle") c.tolerances.overlap_angle = number();
        else if (key == "workers") c.workers = static_cast<int>(integer());
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(integer());
        else if (key == "max_scenarios") c.max_scenarios = static_cast<std::size_t>(integer());
        else throw ParseError("unknown config key '" + key + "'", row);
    }
    c.validate();
    return c;
}

}  // namespace tsl
