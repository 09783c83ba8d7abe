#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace forge::design {

// --- hierarchical ids ("FR1", "FR7.1.1", "DP2.1") ---------------------------

// Depth of an id: number of dot-separated segments.
int id_level(const std::string& id);

// Id with the last segment removed; empty optional at level 1.
std::optional<std::string> id_parent(const std::string& id);

// True iff id is prefix followed by dot-separated positive integers.
bool id_well_formed(const std::string& id, const std::string& prefix);

// Orders ids by numeric segment comparison (FR3.5.1 < FR3.6 < FR10).
bool id_less(const std::string& a, const std::string& b);

// --- domain types ------------------------------------------------------------

struct ProcessVariable {
    enum class Kind { Switch, Range };

    Kind kind = Kind::Switch;
    std::array<std::string, 2> states{"Off", "On"}; // switch only
    // Range bounds are kept verbatim; the source designs use symbolic bounds
    // ("max_a") whose concrete values live in the simulator config.
    std::string low;
    std::string high;
    std::string unit;

    bool operator==(const ProcessVariable&) const = default;
};

struct FunctionalRequirement {
    std::string id;
    std::string description;
    int level = 1;
    std::optional<std::string> parent;

    bool operator==(const FunctionalRequirement&) const = default;
};

struct DesignParameter {
    std::string id;
    std::vector<std::string> components;
    ProcessVariable pv;
    int level = 1;
    std::optional<std::string> parent;

    bool operator==(const DesignParameter&) const = default;
};

struct SymmetryViolation {
    std::string frId;
    std::string dpId;

    bool operator==(const SymmetryViolation&) const = default;
};

// Square boolean coupling matrix for one decomposition level. Row/column k
// belong to the same requirement (FR k's own DP is column k), so the diagonal
// is always set.
struct DesignMatrix {
    int level = 1;
    std::vector<std::string> frIds;
    std::vector<std::string> dpIds;
    std::vector<std::vector<bool>> cells;

    size_t size() const { return frIds.size(); }
    bool at(size_t i, size_t j) const { return cells[i][j]; }

    bool operator==(const DesignMatrix&) const = default;
};

enum class SymmetryPolicy { Strict, Warn };

struct DesignModel {
    std::string name;
    SymmetryPolicy symmetryPolicy = SymmetryPolicy::Strict;
    std::vector<FunctionalRequirement> frs;
    std::vector<DesignParameter> dps;
    std::vector<DesignMatrix> matrices; // one per level, 1..max_level
    // Asymmetric couplings tolerated under SymmetryPolicy::Warn, recorded at
    // load/decompose time.
    std::vector<SymmetryViolation> symmetryWarnings;

    const FunctionalRequirement* find_fr(const std::string& id) const;
    const DesignParameter* find_dp(const std::string& id) const;
    const DesignMatrix* matrix_at(int level) const;
    int max_level() const;
    bool has_children(const std::string& frId) const;
    // Leaf design parameters: no decomposition below them, at any level.
    std::vector<const DesignParameter*> leaf_dps() const;

    bool operator==(const DesignModel& other) const {
        return name == other.name && symmetryPolicy == other.symmetryPolicy &&
               frs == other.frs && dps == other.dps && matrices == other.matrices;
    }
};

struct Dependency {
    std::string dpId;
    std::vector<std::string> components;

    bool operator==(const Dependency&) const = default;
};

// --- operations --------------------------------------------------------------

DesignModel parse_design(const std::string& jsonText, const std::string& origin);
DesignModel load_design(const std::filesystem::path& path);
std::string serialize_design(const DesignModel& model);
void save_design(const DesignModel& model, const std::filesystem::path& path);

// True iff all off-diagonal cells are clear (fully uncoupled design).
bool validate_uncoupled(const DesignMatrix& matrix);

// One violation per unordered pair whose two cells disagree.
std::vector<SymmetryViolation> validate_symmetry(const DesignMatrix& matrix);

// Ids of leaf DPs that still group more than one plant component.
std::vector<std::string> validate_point_to_point(const DesignModel& model);

// The FR's own DP plus every coupled DP in its level's matrix row, in column
// order. Grouped DPs keep their full component list.
std::vector<Dependency> dependency_set(const DesignModel& model, const std::string& frId);

// dependency_set flattened to unique component tags, order preserved.
std::vector<std::string> dependency_components(const DesignModel& model, const std::string& frId);

// Extends a leaf FR with one more decomposition level. Child ids must extend
// the parent id by a single segment; childMatrix spans exactly the children
// and must be symmetric. Returns a new model (inputs are untouched).
DesignModel decompose(const DesignModel& model, const std::string& frId,
                      const std::vector<FunctionalRequirement>& childFrs,
                      const std::vector<DesignParameter>& childDps,
                      const DesignMatrix& childMatrix);

} // namespace forge::design
