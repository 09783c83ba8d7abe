#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace forge::sim {

// --- configuration -----------------------------------------------------------

struct TankConfig {
    std::string name;
    double area = 1.0;       // m^2
    double capacity = 1300;  // mm
    double ll = 250, l = 500, h = 800, hh = 1200; // level markers, mm
    double initial = 500;    // mm
};

enum class ValveState : int { Closed = 1, Open = 2 };
enum class PumpState : int { Off = 1, On = 2 };

struct ActuatorStates {
    ValveState mv101 = ValveState::Open;
    ValveState mv201 = ValveState::Open;
    ValveState mv302 = ValveState::Open;
    PumpState p101 = PumpState::On;
    PumpState p102 = PumpState::Off;
    PumpState p301 = PumpState::On;
    PumpState p302 = PumpState::Off;

    bool operator==(const ActuatorStates&) const = default;
};

// Flow rates are level-change rates of the source tank (mm/s); a transfer
// raises the downstream tank by rate * areaSrc / areaDst.
struct PlantConfig {
    TankConfig t101{"T-101", 1.0, 1300, 250, 500, 800, 1200, 500};
    TankConfig t301{"T-301", 1.0, 1300, 250, 800, 1000, 1200, 800};
    TankConfig t401{"T-401", 1.0, 1300, 250, 800, 1000, 1200, 800};
    double rawInflow = 2.0;       // raw supply into T-101 while MV-101 is open
    double stage1Transfer = 3.0;  // T-101 -> T-301 via P-101/P-102 + MV-201
    double stage3Transfer = 3.0;  // T-301 -> T-401 via P-301/P-302 + MV-302
    double dt = 1.0;              // s
    // Measurement jitter added to reported levels, uniform in
    // [0, noiseAmplitude) from the documented LCG.
    double noiseAmplitude = 1.0;
    ActuatorStates initialActuators{};
};

PlantConfig default_config();
PlantConfig parse_plant_config(const std::string& jsonText, const std::string& origin);
PlantConfig load_plant_config(const std::filesystem::path& path);
void validate_config(const PlantConfig& config);

// --- state ---------------------------------------------------------------------

struct PlantState {
    std::uint64_t tick = 0;
    double t101 = 0, t301 = 0, t401 = 0; // physical levels, mm
    ActuatorStates actuators{};
    double fit101 = 0, fit201 = 0, fit301 = 0; // last tick's actual flows, mm/s

    bool operator==(const PlantState&) const = default;
};

PlantState initial_state(const PlantConfig& config);

// --- attack scenarios ------------------------------------------------------------

struct AttackAction {
    enum class Kind { ForceState, SpoofSensor, Toggle };

    std::uint64_t startTick = 0;
    std::uint64_t endTick = 0; // inclusive
    std::string target;
    Kind kind = Kind::ForceState;
    std::string forcedState;   // ForceState
    double spoofValue = 0;     // SpoofSensor
    std::uint64_t togglePeriod = 2; // Toggle: full cycle length in ticks

    bool active_at(std::uint64_t tick) const { return tick >= startTick && tick <= endTick; }
};

struct AttackScenario {
    std::string id;
    std::vector<AttackAction> actions;

    bool active_at(std::uint64_t tick) const;
};

AttackScenario parse_scenario(const std::string& jsonText, const std::string& origin);
AttackScenario load_scenario(const std::filesystem::path& path);

// --- telemetry --------------------------------------------------------------------

enum class RecordLabel { Normal, Attack };

struct TelemetryRecord {
    std::uint64_t tick = 0;
    double lit101 = 0, lit301 = 0, lit401 = 0; // reported (noisy, post-spoof)
    double fit101 = 0, fit201 = 0, fit301 = 0;
    ActuatorStates actuators{};
    RecordLabel label = RecordLabel::Normal;
};

// --- simulation ---------------------------------------------------------------------

struct SensorReadings {
    double lit101 = 0, lit301 = 0, lit401 = 0;
};

// PLC interlocks, pure hysteresis on the reported levels:
//   MV-101            open at LIT-101 <= L, close at >= H
//   P-101 + MV-201    run while T-301 needs water and T-101 has some
//   P-301 + MV-302    run while T-401 needs water and T-301 has some
//   P-102, P-302      cold standby, off unless an attack forces them
ActuatorStates control(const SensorReadings& reported, const ActuatorStates& previous,
                       const PlantConfig& config);

// Explicit-Euler level update using the state's actuator settings. Transfers
// are limited by the water actually available, so levels never go negative;
// flow meters report the amounts actually moved.
PlantState step_physics(const PlantState& state, const PlantConfig& config);

// One full tick: sense (noise + spoofs), control, apply forced states,
// integrate, record.
PlantState step(const PlantState& state, const PlantConfig& config,
                const std::vector<const AttackAction*>& activeActions, double noiseLit101,
                double noiseLit301, double noiseLit401, TelemetryRecord* recordOut);

std::vector<TelemetryRecord> simulate(const PlantConfig& config,
                                      const std::optional<AttackScenario>& scenario,
                                      std::uint64_t ticks, std::uint64_t seed);

// Historian CSV (timestamps ISO-8601, actuators encoded 1=Closed/Off 2=Open/On).
extern const char* const kTraceHeader;
std::string trace_to_csv(const std::vector<TelemetryRecord>& records, double dt);
void write_trace(const std::vector<TelemetryRecord>& records, double dt,
                 const std::filesystem::path& path);

} // namespace forge::sim
