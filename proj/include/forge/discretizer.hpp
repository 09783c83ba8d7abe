#pragma once

#include <array>
#include <string>

namespace forge::detect {

// Maps a raw telemetry value onto the discrete state names the invariant
// tables use. Boundary convention: a level exactly at a threshold takes the
// higher state, so the anomaly-leaning side wins.
struct Discretizer {
    enum class Kind { Ladder, BinaryLevel, Switch };

    std::string component;
    Kind kind = Kind::BinaryLevel;

    // Ladder thresholds (strictly increasing); BinaryLevel uses `h` only.
    double ll = 0, l = 0, h = 0, hh = 0;

    // Switch state names, index 0 = code 1 (Closed/Off), index 1 = code 2 (Open/On).
    std::array<std::string, 2> switchStates{"Closed", "Open"};

    // Raw CSV cell -> state name. Numeric for levels, 1/2 codes for switches.
    std::string discretize(const std::string& raw) const;
    std::string discretize_value(double value) const;

    bool operator==(const Discretizer&) const = default;
};

Discretizer make_ladder(std::string component, double ll, double l, double h, double hh);
Discretizer make_binary_level(std::string component, double h);
Discretizer make_switch(std::string component, std::string offState, std::string onState);

} // namespace forge::detect
