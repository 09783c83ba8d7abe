#include "forge/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/util.hpp"

using nlohmann::json;

namespace forge::sim {

// --- config -------------------------------------------------------------------

PlantConfig default_config() { return PlantConfig{}; }

void validate_config(const PlantConfig& config) {
    for (const TankConfig* t : {&config.t101, &config.t301, &config.t401}) {
        if (!(0 <= t->ll && t->ll < t->l && t->l < t->h && t->h < t->hh && t->hh <= t->capacity))
            throw ValidationError(t->name + ": level markers must satisfy 0 <= LL < L < H < HH <= capacity");
        if (t->initial < 0 || t->initial > t->capacity)
            throw ValidationError(t->name + ": initial level outside [0, capacity]");
        if (t->area <= 0) throw ValidationError(t->name + ": area must be positive");
    }
    if (config.dt <= 0) throw ValidationError("tick length dt must be positive");
    if (config.rawInflow <= 0 || config.stage1Transfer <= 0 || config.stage3Transfer <= 0)
        throw ValidationError("flow rates must be positive");
    if (config.noiseAmplitude < 0) throw ValidationError("noise amplitude cannot be negative");
}

static TankConfig parse_tank(const json& j, const TankConfig& defaults) {
    TankConfig t = defaults;
    t.area = j.value("area", t.area);
    t.capacity = j.value("capacity", t.capacity);
    t.ll = j.value("ll", t.ll);
    t.l = j.value("l", t.l);
    t.h = j.value("h", t.h);
    t.hh = j.value("hh", t.hh);
    t.initial = j.value("initial", t.initial);
    return t;
}

static ValveState valve_from_string(const std::string& s, const std::string& target) {
    if (s == "Open") return ValveState::Open;
    if (s == "Closed") return ValveState::Closed;
    throw ParseError(target + ": '" + s + "' is not a valve state (Open/Closed)");
}

static PumpState pump_from_string(const std::string& s, const std::string& target) {
    if (s == "On") return PumpState::On;
    if (s == "Off") return PumpState::Off;
    throw ParseError(target + ": '" + s + "' is not a pump state (On/Off)");
}

PlantConfig parse_plant_config(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    PlantConfig config;
    try {
        if (doc.contains("tanks")) {
            const auto& tanks = doc.at("tanks");
            if (tanks.contains("T-101")) config.t101 = parse_tank(tanks.at("T-101"), config.t101);
            if (tanks.contains("T-301")) config.t301 = parse_tank(tanks.at("T-301"), config.t301);
            if (tanks.contains("T-401")) config.t401 = parse_tank(tanks.at("T-401"), config.t401);
        }
        if (doc.contains("flows")) {
            const auto& flows = doc.at("flows");
            config.rawInflow = flows.value("raw_inflow", config.rawInflow);
            config.stage1Transfer = flows.value("stage1_transfer", config.stage1Transfer);
            config.stage3Transfer = flows.value("stage3_transfer", config.stage3Transfer);
        }
        config.dt = doc.value("dt", config.dt);
        config.noiseAmplitude = doc.value("noise_amplitude", config.noiseAmplitude);
        if (doc.contains("initial_actuators")) {
            const auto& ia = doc.at("initial_actuators");
            auto& a = config.initialActuators;
            if (ia.contains("MV-101")) a.mv101 = valve_from_string(ia.at("MV-101"), "MV-101");
            if (ia.contains("MV-201")) a.mv201 = valve_from_string(ia.at("MV-201"), "MV-201");
            if (ia.contains("MV-302")) a.mv302 = valve_from_string(ia.at("MV-302"), "MV-302");
            if (ia.contains("P-101")) a.p101 = pump_from_string(ia.at("P-101"), "P-101");
            if (ia.contains("P-102")) a.p102 = pump_from_string(ia.at("P-102"), "P-102");
            if (ia.contains("P-301")) a.p301 = pump_from_string(ia.at("P-301"), "P-301");
            if (ia.contains("P-302")) a.p302 = pump_from_string(ia.at("P-302"), "P-302");
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    validate_config(config);
    return config;
}

PlantConfig load_plant_config(const std::filesystem::path& path) {
    return parse_plant_config(util::read_file(path), path.string());
}

PlantState initial_state(const PlantConfig& config) {
    PlantState s;
    s.t101 = config.t101.initial;
    s.t301 = config.t301.initial;
    s.t401 = config.t401.initial;
    s.actuators = config.initialActuators;
    return s;
}

// --- scenarios -----------------------------------------------------------------

bool AttackScenario::active_at(std::uint64_t tick) const {
    for (const auto& a : actions)
        if (a.active_at(tick)) return true;
    return false;
}

namespace {

const std::set<std::string> kActuatorTags = {"MV-101", "MV-201", "MV-302", "P-101",
                                             "P-102",  "P-301",  "P-302"};
const std::set<std::string> kSensorTags = {"LIT-101", "LIT-301", "LIT-401"};

bool is_valve(const std::string& tag) { return tag.rfind("MV", 0) == 0; }

} // namespace

AttackScenario parse_scenario(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    AttackScenario scenario;
    try {
        scenario.id = doc.value("id", "");
        for (const auto& ja : doc.value("actions", json::array())) {
            AttackAction a;
            a.startTick = ja.at("start").get<std::uint64_t>();
            a.endTick = ja.at("end").get<std::uint64_t>();
            a.target = ja.at("target").get<std::string>();
            const std::string type = ja.at("type").get<std::string>();

            if (a.startTick > a.endTick)
                throw ParseError(origin + ": action on " + a.target + " ends before it starts");

            if (type == "force") {
                a.kind = AttackAction::Kind::ForceState;
                if (!kActuatorTags.count(a.target))
                    throw ParseError(origin + ": cannot force state of unknown actuator '" +
                                     a.target + "'");
                a.forcedState = ja.at("state").get<std::string>();
                if (is_valve(a.target))
                    valve_from_string(a.forcedState, a.target);
                else
                    pump_from_string(a.forcedState, a.target);
            } else if (type == "toggle") {
                a.kind = AttackAction::Kind::Toggle;
                if (!kActuatorTags.count(a.target))
                    throw ParseError(origin + ": cannot toggle unknown actuator '" + a.target + "'");
                a.togglePeriod = ja.value("period", std::uint64_t{2});
                if (a.togglePeriod == 0)
                    throw ParseError(origin + ": toggle period must be positive");
            } else if (type == "spoof") {
                a.kind = AttackAction::Kind::SpoofSensor;
                if (!kSensorTags.count(a.target))
                    throw ParseError(origin + ": cannot spoof unknown sensor '" + a.target + "'");
                a.spoofValue = ja.at("value").get<double>();
            } else {
                throw ParseError(origin + ": unknown action type '" + type + "'");
            }
            scenario.actions.push_back(std::move(a));
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return scenario;
}

AttackScenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(util::read_file(path), path.string());
}

// --- control -------------------------------------------------------------------

ActuatorStates control(const SensorReadings& reported, const ActuatorStates& previous,
                       const PlantConfig& config) {
    ActuatorStates next = previous;

    if (reported.lit101 <= config.t101.l)
        next.mv101 = ValveState::Open;
    else if (reported.lit101 >= config.t101.h)
        next.mv101 = ValveState::Closed;

    // P-101 and MV-201 are interlocked to LIT-301, guarded against draining
    // T-101 dry.
    if (reported.lit301 >= config.t301.h || reported.lit101 <= config.t101.ll) {
        next.p101 = PumpState::Off;
        next.mv201 = ValveState::Closed;
    } else if (reported.lit301 <= config.t301.l) {
        next.p101 = PumpState::On;
        next.mv201 = ValveState::Open;
    }

    if (reported.lit401 >= config.t401.h) {
        next.p301 = PumpState::Off;
        next.mv302 = ValveState::Closed;
    } else if (reported.lit401 <= config.t401.l && reported.lit301 > config.t301.ll) {
        next.p301 = PumpState::On;
        next.mv302 = ValveState::Open;
    }

    next.p102 = PumpState::Off;
    next.p302 = PumpState::Off;
    return next;
}

// --- physics --------------------------------------------------------------------

PlantState step_physics(const PlantState& state, const PlantConfig& config) {
    const auto& a = state.actuators;
    const double dt = config.dt;

    const double inflow = a.mv101 == ValveState::Open ? config.rawInflow : 0.0;
    const bool stage1Active =
        (a.p101 == PumpState::On || a.p102 == PumpState::On) && a.mv201 == ValveState::Open;
    const bool stage3Active =
        (a.p301 == PumpState::On || a.p302 == PumpState::On) && a.mv302 == ValveState::Open;

    // Transfers cannot move more water than the source holds this tick.
    const double requested12 = stage1Active ? config.stage1Transfer : 0.0;
    const double actual12 = std::min(requested12, state.t101 / dt + inflow);
    const double gain301 = actual12 * config.t101.area / config.t301.area;

    const double requested23 = stage3Active ? config.stage3Transfer : 0.0;
    const double actual23 = std::min(requested23, state.t301 / dt + gain301);
    const double gain401 = actual23 * config.t301.area / config.t401.area;

    PlantState next = state;
    next.t101 = std::clamp(state.t101 + (inflow - actual12) * dt, 0.0, config.t101.capacity);
    next.t301 = std::clamp(state.t301 + (gain301 - actual23) * dt, 0.0, config.t301.capacity);
    next.t401 = std::clamp(state.t401 + gain401 * dt, 0.0, config.t401.capacity);
    next.fit101 = inflow;
    next.fit201 = actual12;
    next.fit301 = actual23;
    return next;
}

// --- tick ------------------------------------------------------------------------

static void apply_force(ActuatorStates& a, const std::string& target, bool setOn) {
    if (target == "MV-101") a.mv101 = setOn ? ValveState::Open : ValveState::Closed;
    else if (target == "MV-201") a.mv201 = setOn ? ValveState::Open : ValveState::Closed;
    else if (target == "MV-302") a.mv302 = setOn ? ValveState::Open : ValveState::Closed;
    else if (target == "P-101") a.p101 = setOn ? PumpState::On : PumpState::Off;
    else if (target == "P-102") a.p102 = setOn ? PumpState::On : PumpState::Off;
    else if (target == "P-301") a.p301 = setOn ? PumpState::On : PumpState::Off;
    else if (target == "P-302") a.p302 = setOn ? PumpState::On : PumpState::Off;
    else throw ValidationError("unknown actuator: " + target);
}

PlantState step(const PlantState& state, const PlantConfig& config,
                const std::vector<const AttackAction*>& activeActions, double noiseLit101,
                double noiseLit301, double noiseLit401, TelemetryRecord* recordOut) {
    SensorReadings reported;
    reported.lit101 = state.t101 + noiseLit101;
    reported.lit301 = state.t301 + noiseLit301;
    reported.lit401 = state.t401 + noiseLit401;

    // Spoofs replace reported values before the PLC sees them, so spoofed
    // levels drive real actuation.
    for (const AttackAction* action : activeActions) {
        if (action->kind != AttackAction::Kind::SpoofSensor) continue;
        if (action->target == "LIT-101") reported.lit101 = action->spoofValue;
        if (action->target == "LIT-301") reported.lit301 = action->spoofValue;
        if (action->target == "LIT-401") reported.lit401 = action->spoofValue;
    }

    PlantState next = state;
    next.actuators = control(reported, state.actuators, config);

    for (const AttackAction* action : activeActions) {
        switch (action->kind) {
            case AttackAction::Kind::ForceState:
                apply_force(next.actuators, action->target,
                            action->forcedState == "Open" || action->forcedState == "On");
                break;
            case AttackAction::Kind::Toggle: {
                const std::uint64_t offset = state.tick - action->startTick;
                const std::uint64_t halfUp = (action->togglePeriod + 1) / 2;
                apply_force(next.actuators, action->target, offset % action->togglePeriod < halfUp);
                break;
            }
            case AttackAction::Kind::SpoofSensor:
                break;
        }
    }

    next = step_physics(next, config);
    next.tick = state.tick + 1;

    if (recordOut) {
        recordOut->tick = state.tick;
        recordOut->lit101 = reported.lit101;
        recordOut->lit301 = reported.lit301;
        recordOut->lit401 = reported.lit401;
        recordOut->fit101 = next.fit101;
        recordOut->fit201 = next.fit201;
        recordOut->fit301 = next.fit301;
        recordOut->actuators = next.actuators;
        recordOut->label = activeActions.empty() ? RecordLabel::Normal : RecordLabel::Attack;
    }
    return next;
}

std::vector<TelemetryRecord> simulate(const PlantConfig& config,
                                      const std::optional<AttackScenario>& scenario,
                                      std::uint64_t ticks, std::uint64_t seed) {
    if (ticks == 0) throw ValidationError("tick count must be positive");
    validate_config(config);

    util::Lcg rng(seed);
    PlantState state = initial_state(config);
    std::vector<TelemetryRecord> records;
    records.reserve(ticks);

    for (std::uint64_t t = 0; t < ticks; ++t) {
        // Fixed draw order keeps traces reproducible regardless of scenario.
        const double n101 = config.noiseAmplitude * rng.next_unit();
        const double n301 = config.noiseAmplitude * rng.next_unit();
        const double n401 = config.noiseAmplitude * rng.next_unit();

        std::vector<const AttackAction*> active;
        if (scenario)
            for (const auto& action : scenario->actions)
                if (action.active_at(state.tick)) active.push_back(&action);

        TelemetryRecord record;
        state = step(state, config, active, n101, n301, n401, &record);
        records.push_back(record);
    }
    return records;
}

// --- historian CSV ----------------------------------------------------------------

const char* const kTraceHeader =
    "Timestamp,FIT101,LIT101,MV101,P101,P102,FIT201,MV201,LIT301,P301,P302,MV302,FIT301,"
    "LIT401,AIT201,AIT202,AIT203,DPIT301,Normal/Attack";

// Days-from-civil conversion (Howard Hinnant's algorithm), enough to render
// tick timestamps from a fixed epoch.
static std::string iso_timestamp(std::uint64_t tick, double dt) {
    // Base 2026-01-01T00:00:00.
    static constexpr std::int64_t kBaseDays = 20454; // days from 1970-01-01 to 2026-01-01
    const std::int64_t totalSeconds =
        static_cast<std::int64_t>(std::llround(static_cast<double>(tick) * dt));
    std::int64_t days = kBaseDays + totalSeconds / 86400;
    std::int64_t secs = totalSeconds % 86400;

    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::uint64_t doe = static_cast<std::uint64_t>(z - era * 146097);
    const std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::uint64_t mp = (5 * doy + 2) / 153;
    const std::uint64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::uint64_t m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t year = y + (m <= 2);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02llu-%02lluT%02lld:%02lld:%02lld",
                  static_cast<long long>(year), static_cast<unsigned long long>(m),
                  static_cast<unsigned long long>(d), static_cast<long long>(secs / 3600),
                  static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
    return buf;
}

std::string trace_to_csv(const std::vector<TelemetryRecord>& records, double dt) {
    std::ostringstream out;
    out << kTraceHeader << "\n";
    for (const auto& r : records) {
        out << iso_timestamp(r.tick, dt) << ',' << util::format_fixed(r.fit101, 3) << ','
            << util::format_fixed(r.lit101, 3) << ',' << static_cast<int>(r.actuators.mv101) << ','
            << static_cast<int>(r.actuators.p101) << ',' << static_cast<int>(r.actuators.p102)
            << ',' << util::format_fixed(r.fit201, 3) << ',' << static_cast<int>(r.actuators.mv201)
            << ',' << util::format_fixed(r.lit301, 3) << ',' << static_cast<int>(r.actuators.p301)
            << ',' << static_cast<int>(r.actuators.p302) << ','
            << static_cast<int>(r.actuators.mv302) << ',' << util::format_fixed(r.fit301, 3) << ','
            << util::format_fixed(r.lit401, 3)
            << ",263.500,8.190,328.400,2.500," // fixed stage-2/3 analyser placeholders
            << (r.label == RecordLabel::Attack ? "Attack" : "Normal") << "\n";
    }
    return out.str();
}

void write_trace(const std::vector<TelemetryRecord>& records, double dt,
                 const std::filesystem::path& path) {
    util::write_file(path, trace_to_csv(records, dt));
}

} // namespace forge::sim
