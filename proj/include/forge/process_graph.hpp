#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forge/invariant.hpp"

namespace forge::graph {

enum class Polarity { Normal, Anomalous };

struct StateNode {
    std::string component;
    std::string state;

    std::string id() const { return component + "=" + state; }
    bool operator==(const StateNode&) const = default;
};

struct ConditionEdge {
    std::string from; // node ids
    std::string to;
    std::string condition;

    bool operator==(const ConditionEdge&) const = default;
};

struct ComponentDecl {
    std::string tag;
    std::vector<std::string> states;

    bool operator==(const ComponentDecl&) const = default;
};

struct Transition {
    std::string fromComponent;
    std::string fromState;
    std::string condition;
    std::string toComponent;
    std::string toState;
};

// DAG over component states: one node per declared (component, state) pair,
// edges carry the threshold condition that drives the state change.
struct ProcessGraph {
    std::string name;
    Polarity polarity = Polarity::Normal;
    std::vector<ComponentDecl> components; // declaration order, drives table layout
    std::vector<StateNode> nodes;
    std::vector<ConditionEdge> edges;

    const StateNode* find_node(const std::string& id) const;
    std::vector<std::string> entry_ids() const; // no incoming edges
    std::vector<std::string> exit_ids() const;  // no outgoing edges

    bool operator==(const ProcessGraph&) const = default;
};

ProcessGraph build_graph(std::string name, std::vector<ComponentDecl> components,
                         const std::vector<Transition>& transitions,
                         Polarity polarity = Polarity::Normal);

// All simple entry-to-exit paths as node-id sequences, lexicographic order.
std::vector<std::vector<std::string>> enumerate_paths(const ProcessGraph& g);

// Anomalous counterpart: a direct edge for every entry/exit pairing that no
// normal path realizes. Nodes not touched by any such pairing are dropped.
ProcessGraph complement(const ProcessGraph& normal);

// Collapses graph paths into a binary truth table (ladder states LL and L map
// to Low, H and HH to High). Normal-polarity paths label their row Normal,
// anomalous paths Anomaly; rows no path reaches stay Unlabeled.
invariant::InvariantTable to_table(const std::vector<const ProcessGraph*>& graphs);
invariant::InvariantTable to_table(const ProcessGraph& normal, const ProcessGraph& anomalous);

std::string export_dot_string(const ProcessGraph& g);
void export_dot(const ProcessGraph& g, const std::filesystem::path& path);

ProcessGraph parse_graph_spec(const std::string& jsonText, const std::string& origin);
ProcessGraph load_graph_spec(const std::filesystem::path& path);

} // namespace forge::graph
