#include "forge/detection.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/util.hpp"

using nlohmann::json;

namespace forge::detect {

std::optional<size_t> TraceTable::find_column(const std::string& component) const {
    const std::string wanted = util::normalize_tag(component);
    for (size_t i = 0; i < columns.size(); ++i)
        if (util::normalize_tag(columns[i]) == wanted) return i;
    return std::nullopt;
}

bool TraceTable::is_attack(size_t row) const {
    if (labelColumn < 0) return false;
    const std::string label = util::normalize_label(rows[row][labelColumn]);
    return label == "attack";
}

TraceTable parse_trace(const std::string& csv, const std::string& origin) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(origin + ": empty trace");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    TraceTable t;
    for (auto& col : util::split(line, ',')) t.columns.push_back(util::trim(col));
    if (t.columns.size() < 2) throw ParseError(origin + ": trace needs at least two columns");

    for (size_t i = 0; i < t.columns.size(); ++i)
        if (util::normalize_label(t.columns[i]) == "normal/attack") t.labelColumn = static_cast<int>(i);

    size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        auto cells = util::split(line, ',');
        if (cells.size() != t.columns.size())
            throw ParseError(origin + ":" + std::to_string(lineNo) + ": row has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(t.columns.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

TraceTable load_trace(const std::filesystem::path& path) {
    return parse_trace(util::read_file(path), path.string());
}

std::pair<std::vector<Alert>, DetectionReport> check_stream(
    const std::vector<ml::Checker>& checkers, const TraceTable& trace) {
    std::vector<Alert> alerts;
    DetectionReport report;
    report.records = trace.size();

    // Resolve every checker's feature columns up front.
    struct Bound {
        const ml::Checker* checker;
        std::vector<size_t> columns;
        CheckerReport stats;
    };
    std::vector<Bound> bound;
    for (const auto& checker : checkers) {
        Bound b;
        b.checker = &checker;
        if (checker.discretizers.size() != checker.features.size())
            throw ValidationError("checker " + checker.invariantId +
                                  " has no discretizer bindings");
        for (const auto& feature : checker.features) {
            auto col = trace.find_column(feature.component);
            if (!col)
                throw ValidationError("trace has no column for component " + feature.component);
            b.columns.push_back(*col);
        }
        b.stats.invariantId = checker.invariantId;
        b.stats.modelType = checker.is_tree() ? "dt" : "nb";
        b.stats.records = trace.size();
        bound.push_back(std::move(b));
    }

    std::optional<size_t> firstAttack;
    for (size_t row = 0; row < trace.size(); ++row) {
        const bool attack = trace.is_attack(row);
        if (attack && !firstAttack) firstAttack = row;

        for (auto& b : bound) {
            const auto& checker = *b.checker;
            ml::StateExpression expr;
            std::vector<std::uint8_t> states(checker.features.size());
            for (size_t f = 0; f < checker.features.size(); ++f) {
                const std::string state =
                    checker.discretizers[f].discretize(trace.rows[row][b.columns[f]]);
                expr.assignments.emplace_back(checker.features[f].component, state);
                if (state == checker.features[f].states[1])
                    states[f] = 1;
                else if (state != checker.features[f].states[0])
                    throw ValidationError("discretizer for " + checker.features[f].component +
                                          " produced '" + state +
                                          "' which is not a trained state");
            }

            const auto predicted = ml::predict_states(checker, states);
            const bool flagged = predicted == ml::Assessment::Anomaly;
            if (flagged) {
                Alert alert;
                alert.timestamp = trace.columns.empty() ? "" : trace.rows[row][0];
                alert.invariantId = checker.invariantId;
                alert.expression = expr;
                alert.recordIndex = row;
                alerts.push_back(std::move(alert));
                ++b.stats.alerts;
                if (!b.stats.detectionLatency && firstAttack && row >= *firstAttack)
                    b.stats.detectionLatency =
                        static_cast<std::int64_t>(row) - static_cast<std::int64_t>(*firstAttack);
            }
            if (attack) {
                ++b.stats.attackRecords;
                flagged ? ++b.stats.truePositives : ++b.stats.falseNegatives;
            } else {
                flagged ? ++b.stats.falsePositives : ++b.stats.trueNegatives;
            }
        }
    }

    for (auto& b : bound) {
        auto& s = b.stats;
        if (s.records)
            s.accuracy = static_cast<double>(s.truePositives + s.trueNegatives) / s.records;
        const size_t normals = s.falsePositives + s.trueNegatives;
        s.falsePositiveRate = normals ? static_cast<double>(s.falsePositives) / normals : 0.0;
        s.attackWindowAccuracy =
            s.attackRecords ? static_cast<double>(s.truePositives) / s.attackRecords : 0.0;
        report.checkers.push_back(std::move(s));
    }
    return {std::move(alerts), std::move(report)};
}

std::optional<std::int64_t> latency(const std::vector<Alert>& alerts, const TraceTable& trace) {
    std::optional<size_t> firstAttack;
    for (size_t row = 0; row < trace.size(); ++row) {
        if (trace.is_attack(row)) {
            firstAttack = row;
            break;
        }
    }
    if (!firstAttack) return std::nullopt;
    std::optional<std::int64_t> best;
    for (const auto& alert : alerts) {
        if (alert.recordIndex < *firstAttack) continue;
        const auto offset =
            static_cast<std::int64_t>(alert.recordIndex) - static_cast<std::int64_t>(*firstAttack);
        if (!best || offset < *best) best = offset;
    }
    return best;
}

std::string alerts_to_csv(const std::vector<Alert>& alerts) {
    std::ostringstream out;
    out << "timestamp,invariantId,expression,recordIndex\n";
    for (const auto& a : alerts)
        out << a.timestamp << ',' << a.invariantId << ',' << a.expression.to_string() << ','
            << a.recordIndex << "\n";
    return out.str();
}

void write_alerts(const std::vector<Alert>& alerts, const std::filesystem::path& path) {
    util::write_file(path, alerts_to_csv(alerts));
}

std::string report_to_json(const DetectionReport& report) {
    json doc;
    doc["records"] = report.records;
    json checkers = json::array();
    for (const auto& c : report.checkers) {
        json jc;
        jc["invariantId"] = c.invariantId;
        jc["modelType"] = c.modelType;
        jc["records"] = c.records;
        jc["alerts"] = c.alerts;
        jc["truePositives"] = c.truePositives;
        jc["trueNegatives"] = c.trueNegatives;
        jc["falsePositives"] = c.falsePositives;
        jc["falseNegatives"] = c.falseNegatives;
        jc["accuracy"] = c.accuracy;
        jc["falsePositiveRate"] = c.falsePositiveRate;
        jc["attackRecords"] = c.attackRecords;
        jc["attackWindowAccuracy"] = c.attackWindowAccuracy;
        if (c.detectionLatency)
            jc["detectionLatency"] = *c.detectionLatency;
        else
            jc["detectionLatency"] = nullptr;
        checkers.push_back(std::move(jc));
    }
    doc["checkers"] = std::move(checkers);
    return doc.dump(2) + "\n";
}

DetectionReport parse_report(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    DetectionReport report;
    try {
        report.records = doc.at("records").get<size_t>();
        for (const auto& jc : doc.at("checkers")) {
            CheckerReport c;
            c.invariantId = jc.at("invariantId").get<std::string>();
            c.modelType = jc.value("modelType", "");
            c.records = jc.at("records").get<size_t>();
            c.alerts = jc.at("alerts").get<size_t>();
            c.truePositives = jc.at("truePositives").get<size_t>();
            c.trueNegatives = jc.at("trueNegatives").get<size_t>();
            c.falsePositives = jc.at("falsePositives").get<size_t>();
            c.falseNegatives = jc.at("falseNegatives").get<size_t>();
            c.accuracy = jc.at("accuracy").get<double>();
            c.falsePositiveRate = jc.at("falsePositiveRate").get<double>();
            c.attackRecords = jc.value("attackRecords", size_t{0});
            c.attackWindowAccuracy = jc.value("attackWindowAccuracy", 0.0);
            if (jc.contains("detectionLatency") && !jc.at("detectionLatency").is_null())
                c.detectionLatency = jc.at("detectionLatency").get<std::int64_t>();
            report.checkers.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return report;
}

DetectionReport load_report(const std::filesystem::path& path) {
    return parse_report(util::read_file(path), path.string());
}

void write_report(const DetectionReport& report, const std::filesystem::path& path) {
    util::write_file(path, report_to_json(report));
}

} // namespace forge::detect
