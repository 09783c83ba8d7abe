#include "forge/design.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/util.hpp"

using nlohmann::json;

namespace forge::design {

// --- id helpers --------------------------------------------------------------

static std::vector<int> id_segments(const std::string& id) {
    size_t start = id.find_first_of("0123456789");
    if (start == std::string::npos) return {};
    std::vector<int> segs;
    for (const auto& part : util::split(id.substr(start), '.')) {
        int v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || p != part.data() + part.size() || v <= 0) return {};
        segs.push_back(v);
    }
    return segs;
}

int id_level(const std::string& id) {
    return static_cast<int>(id_segments(id).size());
}

std::optional<std::string> id_parent(const std::string& id) {
    size_t dot = id.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    return id.substr(0, dot);
}

bool id_well_formed(const std::string& id, const std::string& prefix) {
    if (id.rfind(prefix, 0) != 0) return false;
    const std::string rest = id.substr(prefix.size());
    if (rest.empty() || !std::isdigit(static_cast<unsigned char>(rest[0]))) return false;
    return !id_segments(id).empty();
}

bool id_less(const std::string& a, const std::string& b) {
    return id_segments(a) < id_segments(b);
}

// FR7.1.1 -> DP7.1.1 and back.
static std::string fr_to_dp(const std::string& frId) { return "DP" + frId.substr(2); }
static std::string dp_to_fr(const std::string& dpId) { return "FR" + dpId.substr(2); }

// --- model lookups -----------------------------------------------------------

const FunctionalRequirement* DesignModel::find_fr(const std::string& id) const {
    for (const auto& fr : frs)
        if (fr.id == id) return &fr;
    return nullptr;
}

const DesignParameter* DesignModel::find_dp(const std::string& id) const {
    for (const auto& dp : dps)
        if (dp.id == id) return &dp;
    return nullptr;
}

const DesignMatrix* DesignModel::matrix_at(int level) const {
    for (const auto& m : matrices)
        if (m.level == level) return &m;
    return nullptr;
}

int DesignModel::max_level() const {
    int lvl = 0;
    for (const auto& fr : frs) lvl = std::max(lvl, fr.level);
    return lvl;
}

bool DesignModel::has_children(const std::string& frId) const {
    for (const auto& fr : frs)
        if (fr.parent && *fr.parent == frId) return true;
    return false;
}

std::vector<const DesignParameter*> DesignModel::leaf_dps() const {
    std::vector<const DesignParameter*> out;
    for (const auto& dp : dps)
        if (!has_children(dp_to_fr(dp.id))) out.push_back(&dp);
    return out;
}

// FRs visible at a level: those at exactly that level plus shallower leaves.
// This is the fringe a level matrix spans (a requirement that is not
// decomposed further keeps its row in deeper matrices).
static std::vector<std::string> visible_fr_ids(const DesignModel& model, int level) {
    std::vector<std::string> out;
    for (const auto& fr : model.frs)
        if (fr.level == level || (fr.level < level && !model.has_children(fr.id)))
            out.push_back(fr.id);
    return out;
}

// --- structural validation ---------------------------------------------------

static void validate_matrix_shape(const DesignMatrix& m) {
    const size_t n = m.frIds.size();
    if (n == 0) throw ValidationError("matrix for level " + std::to_string(m.level) + " is empty");
    if (m.dpIds.size() != n)
        throw ValidationError("matrix for level " + std::to_string(m.level) +
                              ": FR and DP lists differ in length");
    if (m.cells.size() != n)
        throw ValidationError("matrix for level " + std::to_string(m.level) + " is not square");
    for (size_t i = 0; i < n; ++i) {
        if (m.cells[i].size() != n)
            throw ValidationError("matrix row for " + m.frIds[i] + " is not square");
        if (!m.cells[i][i])
            throw ValidationError("matrix diagonal is clear for " + m.frIds[i] +
                                  " (every FR must be satisfied by its own DP)");
    }
    for (size_t i = 0; i < n; ++i)
        if (m.dpIds[i] != fr_to_dp(m.frIds[i]))
            throw ValidationError("matrix columns misaligned: " + m.frIds[i] + " paired with " +
                                  m.dpIds[i]);
}

// Full structural check; fills model.symmetryWarnings under the Warn policy.
static void validate_model(DesignModel& model) {
    if (model.frs.empty()) throw ValidationError("design has no functional requirements");

    std::set<std::string> frIds;
    for (auto& fr : model.frs) {
        if (!id_well_formed(fr.id, "FR"))
            throw ValidationError("malformed FR id: '" + fr.id + "'");
        if (!frIds.insert(fr.id).second) throw ValidationError("duplicate FR id: " + fr.id);
        fr.level = id_level(fr.id);
        fr.parent = id_parent(fr.id);
    }
    for (const auto& fr : model.frs)
        if (fr.parent && !frIds.count(*fr.parent))
            throw ValidationError("dangling parent: " + fr.id + " has no parent " + *fr.parent);

    std::set<std::string> dpIds;
    for (auto& dp : model.dps) {
        if (!id_well_formed(dp.id, "DP"))
            throw ValidationError("malformed DP id: '" + dp.id + "'");
        if (!dpIds.insert(dp.id).second) throw ValidationError("duplicate DP id: " + dp.id);
        dp.level = id_level(dp.id);
        dp.parent = id_parent(dp.id);
        if (dp.components.empty())
            throw ValidationError(dp.id + " lists no plant components");
        if (!frIds.count(dp_to_fr(dp.id)))
            throw ValidationError(dp.id + " has no matching functional requirement");
        if (dp.pv.kind == ProcessVariable::Kind::Switch) {
            if (dp.pv.states[0].empty() || dp.pv.states[0] == dp.pv.states[1])
                throw ValidationError(dp.id + ": switch states must be two distinct names");
        } else {
            double lo = 0, hi = 0;
            auto lo_res = std::from_chars(dp.pv.low.data(), dp.pv.low.data() + dp.pv.low.size(), lo);
            auto hi_res =
                std::from_chars(dp.pv.high.data(), dp.pv.high.data() + dp.pv.high.size(), hi);
            bool numeric = lo_res.ec == std::errc() && hi_res.ec == std::errc() &&
                           lo_res.ptr == dp.pv.low.data() + dp.pv.low.size() &&
                           hi_res.ptr == dp.pv.high.data() + dp.pv.high.size();
            if (numeric && !(lo < hi))
                throw ValidationError(dp.id + ": range lower bound must be below upper bound");
        }
    }
    for (const auto& frId : frIds)
        if (!dpIds.count(fr_to_dp(frId)))
            throw ValidationError(frId + " has no matching design parameter");

    const int maxLevel = model.max_level();
    model.symmetryWarnings.clear();
    for (int level = 1; level <= maxLevel; ++level) {
        const DesignMatrix* m = model.matrix_at(level);
        if (!m) throw ValidationError("missing coupling matrix for level " + std::to_string(level));
        validate_matrix_shape(*m);

        std::set<std::string> expected;
        for (const auto& id : visible_fr_ids(model, level)) expected.insert(id);
        std::set<std::string> actual(m->frIds.begin(), m->frIds.end());
        for (const auto& id : actual)
            if (!expected.count(id))
                throw ValidationError("matrix for level " + std::to_string(level) +
                                      " references " + id + " which is not visible at that level");
        for (const auto& id : expected)
            if (!actual.count(id))
                throw ValidationError("matrix for level " + std::to_string(level) + " is missing " +
                                      id);

        auto violations = validate_symmetry(*m);
        if (!violations.empty()) {
            if (model.symmetryPolicy == SymmetryPolicy::Strict)
                throw ValidationError("asymmetric coupling between " + violations[0].frId +
                                      " and " + violations[0].dpId + " at level " +
                                      std::to_string(level));
            model.symmetryWarnings.insert(model.symmetryWarnings.end(), violations.begin(),
                                          violations.end());
        }
    }
}

// --- JSON (de)serialization ---------------------------------------------------

static ProcessVariable parse_pv(const json& j, const std::string& dpId) {
    ProcessVariable pv;
    const std::string kind = j.value("kind", "switch");
    if (kind == "switch") {
        pv.kind = ProcessVariable::Kind::Switch;
        if (j.contains("states")) {
            auto states = j.at("states");
            if (!states.is_array() || states.size() != 2)
                throw ParseError(dpId + ": switch pv needs exactly two states");
            pv.states = {states[0].get<std::string>(), states[1].get<std::string>()};
        }
    } else if (kind == "range") {
        pv.kind = ProcessVariable::Kind::Range;
        pv.low = j.value("low", "");
        pv.high = j.value("high", "");
        pv.unit = j.value("unit", "");
    } else {
        throw ParseError(dpId + ": unknown pv kind '" + kind + "'");
    }
    return pv;
}

static json pv_to_json(const ProcessVariable& pv) {
    json j;
    if (pv.kind == ProcessVariable::Kind::Switch) {
        j["kind"] = "switch";
        j["states"] = {pv.states[0], pv.states[1]};
    } else {
        j["kind"] = "range";
        j["low"] = pv.low;
        j["high"] = pv.high;
        if (!pv.unit.empty()) j["unit"] = pv.unit;
    }
    return j;
}

DesignModel parse_design(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    DesignModel model;
    try {
        model.name = doc.value("name", "");
        const std::string policy = doc.value("symmetry_policy", "strict");
        if (policy == "strict")
            model.symmetryPolicy = SymmetryPolicy::Strict;
        else if (policy == "warn")
            model.symmetryPolicy = SymmetryPolicy::Warn;
        else
            throw ParseError(origin + ": unknown symmetry_policy '" + policy + "'");

        for (const auto& jf : doc.value("frs", json::array())) {
            FunctionalRequirement fr;
            fr.id = jf.at("id").get<std::string>();
            fr.description = jf.value("description", "");
            model.frs.push_back(std::move(fr));
        }
        for (const auto& jd : doc.value("dps", json::array())) {
            DesignParameter dp;
            dp.id = jd.at("id").get<std::string>();
            for (const auto& c : jd.at("components")) dp.components.push_back(c.get<std::string>());
            if (jd.contains("pv")) dp.pv = parse_pv(jd.at("pv"), dp.id);
            model.dps.push_back(std::move(dp));
        }
        for (const auto& jm : doc.value("matrices", json::array())) {
            DesignMatrix m;
            m.level = jm.at("level").get<int>();
            for (const auto& id : jm.at("frs")) m.frIds.push_back(id.get<std::string>());
            for (const auto& id : jm.at("dps")) m.dpIds.push_back(id.get<std::string>());
            for (const auto& jrow : jm.at("rows")) {
                const std::string row = jrow.get<std::string>();
                std::vector<bool> cells;
                cells.reserve(row.size());
                for (char c : row) {
                    if (c == 'X' || c == 'y')
                        cells.push_back(true);
                    else if (c == '0')
                        cells.push_back(false);
                    else
                        throw ParseError(origin + ": matrix cell must be 'X', 'y' or '0', got '" +
                                         std::string(1, c) + "'");
                }
                m.cells.push_back(std::move(cells));
            }
            model.matrices.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    validate_model(model);
    return model;
}

DesignModel load_design(const std::filesystem::path& path) {
    return parse_design(util::read_file(path), path.string());
}

std::string serialize_design(const DesignModel& model) {
    json doc;
    doc["name"] = model.name;
    if (model.symmetryPolicy == SymmetryPolicy::Warn) doc["symmetry_policy"] = "warn";

    json frs = json::array();
    for (const auto& fr : model.frs) frs.push_back({{"id", fr.id}, {"description", fr.description}});
    doc["frs"] = std::move(frs);

    json dps = json::array();
    for (const auto& dp : model.dps)
        dps.push_back({{"id", dp.id}, {"components", dp.components}, {"pv", pv_to_json(dp.pv)}});
    doc["dps"] = std::move(dps);

    json matrices = json::array();
    for (const auto& m : model.matrices) {
        json rows = json::array();
        for (size_t i = 0; i < m.size(); ++i) {
            std::string row;
            for (size_t j = 0; j < m.size(); ++j)
                row.push_back(!m.cells[i][j] ? '0' : (i == j ? 'X' : 'y'));
            rows.push_back(row);
        }
        matrices.push_back(
            {{"level", m.level}, {"frs", m.frIds}, {"dps", m.dpIds}, {"rows", std::move(rows)}});
    }
    doc["matrices"] = std::move(matrices);
    return doc.dump(2) + "\n";
}

void save_design(const DesignModel& model, const std::filesystem::path& path) {
    util::write_file(path, serialize_design(model));
}

// --- validators ---------------------------------------------------------------

bool validate_uncoupled(const DesignMatrix& matrix) {
    for (size_t i = 0; i < matrix.size(); ++i)
        for (size_t j = 0; j < matrix.size(); ++j)
            if (i != j && matrix.cells[i][j]) return false;
    return true;
}

std::vector<SymmetryViolation> validate_symmetry(const DesignMatrix& matrix) {
    std::vector<SymmetryViolation> out;
    for (size_t i = 0; i < matrix.size(); ++i)
        for (size_t j = i + 1; j < matrix.size(); ++j)
            if (matrix.cells[i][j] != matrix.cells[j][i])
                out.push_back({matrix.frIds[i], matrix.dpIds[j]});
    return out;
}

std::vector<std::string> validate_point_to_point(const DesignModel& model) {
    std::vector<std::string> out;
    for (const auto* dp : model.leaf_dps())
        if (dp->components.size() != 1) out.push_back(dp->id);
    return out;
}

// --- dependency extraction -----------------------------------------------------

std::vector<Dependency> dependency_set(const DesignModel& model, const std::string& frId) {
    const FunctionalRequirement* fr = model.find_fr(frId);
    if (!fr) throw ValidationError("unknown functional requirement: " + frId);

    const DesignMatrix* m = model.matrix_at(fr->level);
    if (!m) throw ValidationError("no coupling matrix at level " + std::to_string(fr->level));
    size_t row = m->size();
    for (size_t i = 0; i < m->size(); ++i)
        if (m->frIds[i] == frId) row = i;
    if (row == m->size())
        throw ValidationError(frId + " has no row in its level matrix (already decomposed?)");

    std::vector<Dependency> out;
    auto push = [&](size_t col) {
        const DesignParameter* dp = model.find_dp(m->dpIds[col]);
        out.push_back({dp->id, dp->components});
    };
    push(row); // own DP first
    for (size_t j = 0; j < m->size(); ++j)
        if (j != row && m->cells[row][j]) push(j);
    return out;
}

std::vector<std::string> dependency_components(const DesignModel& model, const std::string& frId) {
    std::vector<std::string> out;
    for (const auto& dep : dependency_set(model, frId))
        for (const auto& c : dep.components)
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    return out;
}

// --- decomposition --------------------------------------------------------------

DesignModel decompose(const DesignModel& model, const std::string& frId,
                      const std::vector<FunctionalRequirement>& childFrs,
                      const std::vector<DesignParameter>& childDps,
                      const DesignMatrix& childMatrix) {
    const FunctionalRequirement* parent = model.find_fr(frId);
    if (!parent) throw ValidationError("unknown functional requirement: " + frId);
    if (model.has_children(frId)) throw ValidationError(frId + " is already decomposed");
    if (childFrs.empty()) throw ValidationError("decomposition of " + frId + " has no children");
    if (childFrs.size() != childDps.size())
        throw ValidationError("decomposition of " + frId + ": FR and DP counts differ");

    const int childLevel = parent->level + 1;
    if (childLevel < model.max_level())
        throw ValidationError(frId + " cannot be decomposed above the deepest existing level");

    std::set<std::string> childIds;
    for (const auto& child : childFrs) {
        if (!id_well_formed(child.id, "FR") || id_parent(child.id) != std::optional(frId))
            throw ValidationError("child id " + child.id + " does not extend " + frId +
                                  " by one segment");
        if (!childIds.insert(child.id).second)
            throw ValidationError("duplicate child id: " + child.id);
    }
    for (size_t i = 0; i < childDps.size(); ++i)
        if (childDps[i].id != fr_to_dp(childFrs[i].id))
            throw ValidationError("child DP " + childDps[i].id + " does not mirror " +
                                  childFrs[i].id);

    if (childMatrix.frIds.size() != childFrs.size())
        throw ValidationError("child matrix for " + frId + " must span exactly the children");
    for (size_t i = 0; i < childFrs.size(); ++i)
        if (childMatrix.frIds[i] != childFrs[i].id)
            throw ValidationError("child matrix rows must follow the child FR order");
    validate_matrix_shape(childMatrix);
    if (auto violations = validate_symmetry(childMatrix); !violations.empty())
        throw ValidationError("child matrix is asymmetric between " + violations[0].frId +
                              " and " + violations[0].dpId);

    DesignModel out = model;
    for (auto fr : childFrs) {
        fr.level = childLevel;
        fr.parent = frId;
        out.frs.push_back(std::move(fr));
    }
    for (auto dp : childDps) {
        dp.level = childLevel;
        dp.parent = fr_to_dp(frId);
        out.dps.push_back(std::move(dp));
    }

    // Rebuild the fringe matrix at the child level: the decomposed FR's
    // row/column is replaced by the child block, remaining leaves keep theirs.
    std::vector<std::string> newIds;
    const DesignMatrix* existing = model.matrix_at(childLevel);
    if (existing) {
        for (const auto& id : existing->frIds) {
            if (id == frId)
                for (const auto& child : childFrs) newIds.push_back(child.id);
            else
                newIds.push_back(id);
        }
    } else {
        newIds = visible_fr_ids(out, childLevel);
        std::sort(newIds.begin(), newIds.end(), id_less);
    }

    auto child_index = [&](const std::string& id) -> int {
        for (size_t i = 0; i < childMatrix.frIds.size(); ++i)
            if (childMatrix.frIds[i] == id) return static_cast<int>(i);
        return -1;
    };
    auto old_index = [&](const std::string& id) -> int {
        if (!existing) return -1;
        for (size_t i = 0; i < existing->frIds.size(); ++i)
            if (existing->frIds[i] == id) return static_cast<int>(i);
        return -1;
    };

    DesignMatrix next;
    next.level = childLevel;
    next.frIds = newIds;
    for (const auto& id : newIds) next.dpIds.push_back(fr_to_dp(id));
    next.cells.assign(newIds.size(), std::vector<bool>(newIds.size(), false));
    for (size_t i = 0; i < newIds.size(); ++i) {
        for (size_t j = 0; j < newIds.size(); ++j) {
            const int ci = child_index(newIds[i]);
            const int cj = child_index(newIds[j]);
            if (ci >= 0 && cj >= 0)
                next.cells[i][j] = childMatrix.cells[ci][cj];
            else if (ci < 0 && cj < 0) {
                const int oi = old_index(newIds[i]);
                const int oj = old_index(newIds[j]);
                next.cells[i][j] = (oi >= 0 && oj >= 0) ? existing->cells[oi][oj] : (i == j);
            }
            // child-to-leaf couplings start clear; the designer adds them
            // explicitly when mapping the level down
        }
    }

    bool replaced = false;
    for (auto& m : out.matrices) {
        if (m.level == childLevel) {
            m = next;
            replaced = true;
        }
    }
    if (!replaced) out.matrices.push_back(std::move(next));

    validate_model(out);
    return out;
}

} // namespace forge::design
