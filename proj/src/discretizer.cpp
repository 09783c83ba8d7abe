#include "forge/discretizer.hpp"

#include <charconv>

#include "forge/errors.hpp"
#include "forge/util.hpp"

namespace forge::detect {

std::string Discretizer::discretize_value(double value) const {
    switch (kind) {
        case Kind::Ladder:
            if (value <= ll) return "LowLow";
            if (value <= l) return "Low";
            if (value < h) return "Mid";
            if (value < hh) return "High";
            return "HighHigh";
        case Kind::BinaryLevel:
            return value >= h ? "High" : "Low";
        case Kind::Switch: {
            const int code = static_cast<int>(value);
            if (code == 1) return switchStates[0];
            if (code == 2) return switchStates[1];
            throw ValidationError(component + ": unknown actuator code " +
                                  util::format_fixed(value, 0));
        }
    }
    throw ValidationError(component + ": unknown discretizer kind");
}

std::string Discretizer::discretize(const std::string& raw) const {
    const std::string s = util::trim(raw);
    double value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError(component + ": non-numeric value '" + raw + "'");
    return discretize_value(value);
}

Discretizer make_ladder(std::string component, double ll, double l, double h, double hh) {
    if (!(ll < l && l < h && h < hh))
        throw ValidationError(component + ": ladder thresholds must be strictly increasing");
    Discretizer d;
    d.component = std::move(component);
    d.kind = Discretizer::Kind::Ladder;
    d.ll = ll;
    d.l = l;
    d.h = h;
    d.hh = hh;
    return d;
}

Discretizer make_binary_level(std::string component, double h) {
    Discretizer d;
    d.component = std::move(component);
    d.kind = Discretizer::Kind::BinaryLevel;
    d.h = h;
    return d;
}

Discretizer make_switch(std::string component, std::string offState, std::string onState) {
    Discretizer d;
    d.component = std::move(component);
    d.kind = Discretizer::Kind::Switch;
    d.switchStates = {std::move(offState), std::move(onState)};
    return d;
}

} // namespace forge::detect
