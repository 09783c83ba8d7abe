#include "forge/invariant.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "forge/errors.hpp"
#include "forge/util.hpp"

namespace forge::invariant {

std::string to_string(Assessment a) {
    switch (a) {
        case Assessment::Normal: return "Normal";
        case Assessment::Anomaly: return "Anomaly";
        case Assessment::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

Assessment assessment_from_string(const std::string& s) {
    if (s == "Normal") return Assessment::Normal;
    if (s == "Anomaly") return Assessment::Anomaly;
    if (s == "Unlabeled") return Assessment::Unlabeled;
    throw ParseError("unknown assessment: '" + s + "'");
}

std::string StateExpression::to_string() const {
    std::string out;
    for (size_t i = 0; i < assignments.size(); ++i) {
        if (i) out += ' ';
        out += assignments[i].first + "=" + assignments[i].second;
    }
    return out;
}

InvariantTable InvariantTable::enumerate(std::vector<StateVariable> variables, std::string id,
                                         std::string sourceFr) {
    const size_t n = variables.size();
    if (n == 0) throw ValidationError("cannot enumerate a table over zero components");
    if (n > 16)
        throw ValidationError("refusing to enumerate over " + std::to_string(n) +
                              " components (limit 16, 65536 rows)");
    std::set<std::string> seen;
    for (const auto& v : variables) {
        if (!seen.insert(v.component).second)
            throw ValidationError("duplicate component in table: " + v.component);
        if (v.states[0].empty() || v.states[0] == v.states[1])
            throw ValidationError(v.component + ": states must be two distinct names");
    }

    InvariantTable t;
    t.id = std::move(id);
    t.sourceFr = std::move(sourceFr);
    t.variables_ = std::move(variables);
    t.rows_.assign(size_t{1} << n, Assessment::Unlabeled);
    return t;
}

size_t InvariantTable::index_of(const StateExpression& expr) const {
    if (expr.assignments.size() != variables_.size())
        throw ValidationError("expression covers " + std::to_string(expr.assignments.size()) +
                              " components, table has " + std::to_string(variables_.size()));
    std::map<std::string, std::string> byComponent;
    for (const auto& [c, s] : expr.assignments) byComponent[c] = s;

    size_t index = 0;
    for (const auto& v : variables_) {
        auto it = byComponent.find(v.component);
        if (it == byComponent.end())
            throw ValidationError("expression does not assign " + v.component);
        index <<= 1;
        if (it->second == v.states[1])
            index |= 1;
        else if (it->second != v.states[0])
            throw ValidationError("'" + it->second + "' is not a state of " + v.component);
    }
    return index;
}

StateExpression InvariantTable::expression_at(size_t index) const {
    if (index >= rows_.size()) throw ValidationError("row index out of range");
    StateExpression expr;
    const size_t n = variables_.size();
    for (size_t v = 0; v < n; ++v) {
        const size_t bit = (index >> (n - 1 - v)) & 1;
        expr.assignments.emplace_back(variables_[v].component, variables_[v].states[bit]);
    }
    return expr;
}

Assessment InvariantTable::assessment_at(size_t index) const {
    if (index >= rows_.size()) throw ValidationError("row index out of range");
    return rows_[index];
}

Assessment InvariantTable::assessment_of(const StateExpression& expr) const {
    return rows_[index_of(expr)];
}

InvariantTable InvariantTable::labeled(const StateExpression& expr, Assessment a) const {
    InvariantTable out = *this;
    out.rows_[index_of(expr)] = a;
    return out;
}

InvariantTable InvariantTable::labeled_from_oracle(
    const std::set<StateExpression>& normalStates) const {
    if (normalStates.empty())
        throw ValidationError("oracle provided no observed normal states");
    std::set<size_t> normalRows;
    for (const auto& expr : normalStates) normalRows.insert(index_of(expr));

    InvariantTable out = *this;
    for (size_t i = 0; i < out.rows_.size(); ++i)
        out.rows_[i] = normalRows.count(i) ? Assessment::Normal : Assessment::Anomaly;
    return out;
}

std::string export_table_string(const InvariantTable& table) {
    std::ostringstream out;
    if (!table.id.empty() || !table.sourceFr.empty())
        out << "# invariant: " << table.id << " source_fr: " << table.sourceFr << "\n";
    std::vector<std::string> header;
    for (const auto& v : table.variables()) header.push_back(v.component);
    header.push_back("assessment");
    out << util::join(header, ",") << "\n";
    for (size_t i = 0; i < table.row_count(); ++i) {
        const auto expr = table.expression_at(i);
        std::vector<std::string> cells;
        for (const auto& [c, s] : expr.assignments) cells.push_back(s);
        cells.push_back(to_string(table.assessment_at(i)));
        out << util::join(cells, ",") << "\n";
    }
    return out.str();
}

void export_table(const InvariantTable& table, const std::filesystem::path& path) {
    util::write_file(path, export_table_string(table));
}

InvariantTable import_table_string(const std::string& csv, const std::string& origin) {
    std::istringstream in(csv);
    std::string line;
    std::string tableId, sourceFr;
    std::vector<std::string> header;

    while (std::getline(in, line)) {
        line = util::trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key;
            while (meta >> key) {
                if (key == "invariant:") meta >> tableId;
                if (key == "source_fr:") meta >> sourceFr;
            }
            continue;
        }
        header = util::split(line, ',');
        break;
    }
    if (header.size() < 2 || util::trim(header.back()) != "assessment")
        throw ParseError(origin + ": header must list component tags followed by 'assessment'");
    const size_t n = header.size() - 1;
    if (n > 16) throw ParseError(origin + ": too many components (limit 16)");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        line = util::trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = util::split(line, ',');
        if (cells.size() != header.size())
            throw ParseError(origin + ": row has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(header.size()));
        for (auto& c : cells) c = util::trim(c);
        rows.push_back(std::move(cells));
    }
    const size_t expected = size_t{1} << n;
    if (rows.size() != expected)
        throw ParseError(origin + ": " + std::to_string(rows.size()) + " rows for " +
                         std::to_string(n) + " components, expected " + std::to_string(expected));

    // Row order is binary counting, so row 0 carries every variable's first
    // state; the other state is recovered from the complementary rows.
    std::vector<StateVariable> variables;
    for (size_t v = 0; v < n; ++v) {
        StateVariable var;
        var.component = util::trim(header[v]);
        var.states[0] = rows[0][v];
        const size_t flipped = expected >> (v + 1); // first row with bit v set
        var.states[1] = rows[flipped][v];
        if (var.states[0] == var.states[1])
            throw ParseError(origin + ": component " + var.component +
                             " does not show two distinct states");
        variables.push_back(std::move(var));
    }

    InvariantTable table = InvariantTable::enumerate(variables, tableId, sourceFr);
    std::set<size_t> seen;
    for (size_t r = 0; r < rows.size(); ++r) {
        StateExpression expr;
        for (size_t v = 0; v < n; ++v) expr.assignments.emplace_back(variables[v].component, rows[r][v]);
        size_t index;
        try {
            index = table.index_of(expr);
        } catch (const ValidationError& e) {
            throw ParseError(origin + ": row " + std::to_string(r + 1) + ": " + e.what());
        }
        if (!seen.insert(index).second)
            throw ParseError(origin + ": duplicate expression '" + expr.to_string() + "'");
        table = table.labeled(expr, assessment_from_string(rows[r][n]));
    }
    return table;
}

InvariantTable import_table(const std::filesystem::path& path) {
    return import_table_string(util::read_file(path), path.string());
}

} // namespace forge::invariant
