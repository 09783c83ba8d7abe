#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace forge::invariant {

enum class Assessment { Unlabeled, Normal, Anomaly };

std::string to_string(Assessment a);
Assessment assessment_from_string(const std::string& s);

// One monitored component with its two discrete states. The first state is
// the "off"/low side and encodes as bit 0.
struct StateVariable {
    std::string component;
    std::array<std::string, 2> states;

    bool operator==(const StateVariable&) const = default;
};

// A joint assignment of one state per component, kept in table variable order.
struct StateExpression {
    std::vector<std::pair<std::string, std::string>> assignments; // component -> state

    std::string to_string() const; // "MV-101=Open LIT-101=High"
    bool operator==(const StateExpression&) const = default;
    bool operator<(const StateExpression& other) const { return assignments < other.assignments; }
};

// Complete truth table over n binary variables: exactly 2^n rows in binary
// counting order, first variable most significant.
class InvariantTable {
public:
    InvariantTable() = default;

    std::string id;
    std::string sourceFr;

    static InvariantTable enumerate(std::vector<StateVariable> variables,
                                    std::string id = "", std::string sourceFr = "");

    const std::vector<StateVariable>& variables() const { return variables_; }
    size_t variable_count() const { return variables_.size(); }
    size_t row_count() const { return rows_.size(); }

    size_t index_of(const StateExpression& expr) const;
    StateExpression expression_at(size_t index) const;
    Assessment assessment_at(size_t index) const;
    Assessment assessment_of(const StateExpression& expr) const;
    const std::vector<Assessment>& assessments() const { return rows_; }

    // Returns a copy with one row relabeled (last write wins).
    InvariantTable labeled(const StateExpression& expr, Assessment a) const;

    // Rows whose expression was observed in normal operation become Normal,
    // everything else Anomaly.
    InvariantTable labeled_from_oracle(const std::set<StateExpression>& normalStates) const;

    bool operator==(const InvariantTable& other) const {
        return id == other.id && sourceFr == other.sourceFr && variables_ == other.variables_ &&
               rows_ == other.rows_;
    }

private:
    std::vector<StateVariable> variables_;
    std::vector<Assessment> rows_;
};

std::string export_table_string(const InvariantTable& table);
void export_table(const InvariantTable& table, const std::filesystem::path& path);
InvariantTable import_table_string(const std::string& csv, const std::string& origin);
InvariantTable import_table(const std::filesystem::path& path);

} // namespace forge::invariant
