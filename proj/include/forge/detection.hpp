#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/classifier.hpp"

namespace forge::detect {

// Column-oriented view of a historian trace; cells stay as strings until a
// checker's discretizer interprets them. Column names are matched with
// punctuation and case stripped, so "MV-101" finds "MV101" or " MV 101".
struct TraceTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    int labelColumn = -1; // "Normal/Attack", -1 when absent

    size_t size() const { return rows.size(); }
    std::optional<size_t> find_column(const std::string& component) const;
    // Ground-truth label, tolerant of dataset quirks ("A ttack").
    bool is_attack(size_t row) const;
};

TraceTable parse_trace(const std::string& csv, const std::string& origin);
TraceTable load_trace(const std::filesystem::path& path);

struct Alert {
    std::string timestamp;
    std::string invariantId;
    ml::StateExpression expression;
    size_t recordIndex = 0;
};

struct CheckerReport {
    std::string invariantId;
    std::string modelType; // "dt" | "nb"
    size_t records = 0;
    size_t alerts = 0;
    size_t truePositives = 0;
    size_t trueNegatives = 0;
    size_t falsePositives = 0;
    size_t falseNegatives = 0;
    double accuracy = 0;
    double falsePositiveRate = 0;
    // Per-record accuracy over the attack-labeled rows only; the figure the
    // study protocol compares against.
    double attackWindowAccuracy = 0;
    size_t attackRecords = 0;
    std::optional<std::int64_t> detectionLatency; // ticks from attack onset to first alert
};

struct DetectionReport {
    size_t records = 0;
    std::vector<CheckerReport> checkers;
};

// Discretize -> predict -> alert, per record and checker, stateless.
std::pair<std::vector<Alert>, DetectionReport> check_stream(
    const std::vector<ml::Checker>& checkers, const TraceTable& trace);

// Offset of the first alert at or after the first attack-labeled record.
std::optional<std::int64_t> latency(const std::vector<Alert>& alerts, const TraceTable& trace);

std::string alerts_to_csv(const std::vector<Alert>& alerts);
void write_alerts(const std::vector<Alert>& alerts, const std::filesystem::path& path);

std::string report_to_json(const DetectionReport& report);
DetectionReport parse_report(const std::string& jsonText, const std::string& origin);
DetectionReport load_report(const std::filesystem::path& path);
void write_report(const DetectionReport& report, const std::filesystem::path& path);

} // namespace forge::detect
