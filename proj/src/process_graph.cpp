#include "forge/process_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/util.hpp"

using nlohmann::json;

namespace forge::graph {

const StateNode* ProcessGraph::find_node(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id() == id) return &n;
    return nullptr;
}

std::vector<std::string> ProcessGraph::entry_ids() const {
    std::set<std::string> hasIncoming;
    for (const auto& e : edges) hasIncoming.insert(e.to);
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (!hasIncoming.count(n.id())) out.push_back(n.id());
    return out;
}

std::vector<std::string> ProcessGraph::exit_ids() const {
    std::set<std::string> hasOutgoing;
    for (const auto& e : edges) hasOutgoing.insert(e.from);
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (!hasOutgoing.count(n.id())) out.push_back(n.id());
    return out;
}

static void check_acyclic(const ProcessGraph& g) {
    std::map<std::string, std::vector<std::string>> adj;
    std::map<std::string, int> indegree;
    for (const auto& n : g.nodes) indegree[n.id()] = 0;
    for (const auto& e : g.edges) {
        adj[e.from].push_back(e.to);
        ++indegree[e.to];
    }
    std::vector<std::string> queue;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) queue.push_back(id);
    size_t visited = 0;
    while (!queue.empty()) {
        const std::string id = queue.back();
        queue.pop_back();
        ++visited;
        for (const auto& next : adj[id])
            if (--indegree[next] == 0) queue.push_back(next);
    }
    if (visited != g.nodes.size())
        throw ValidationError("process graph '" + g.name + "' contains a cycle");
}

ProcessGraph build_graph(std::string name, std::vector<ComponentDecl> components,
                         const std::vector<Transition>& transitions, Polarity polarity) {
    ProcessGraph g;
    g.name = std::move(name);
    g.polarity = polarity;
    g.components = std::move(components);

    std::set<std::string> nodeIds;
    for (const auto& c : g.components) {
        if (c.states.empty()) throw ValidationError(c.tag + " declares no states");
        for (const auto& s : c.states) {
            StateNode n{c.tag, s};
            if (!nodeIds.insert(n.id()).second)
                throw ValidationError("duplicate state " + n.id());
            g.nodes.push_back(std::move(n));
        }
    }

    for (const auto& t : transitions) {
        const std::string from = t.fromComponent + "=" + t.fromState;
        const std::string to = t.toComponent + "=" + t.toState;
        if (!nodeIds.count(from)) throw ValidationError("unknown state " + from);
        if (!nodeIds.count(to)) throw ValidationError("unknown state " + to);
        if (from == to) throw ValidationError("self-loop on " + from);
        g.edges.push_back({from, to, t.condition});
    }

    check_acyclic(g);
    return g;
}

std::vector<std::vector<std::string>> enumerate_paths(const ProcessGraph& g) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : g.edges) adj[e.from].push_back(e.to);
    for (auto& [id, next] : adj) std::sort(next.begin(), next.end());

    std::set<std::string> exits;
    for (const auto& id : g.exit_ids()) exits.insert(id);

    std::vector<std::vector<std::string>> paths;
    std::vector<std::string> current;

    // Graphs here are tiny (component states, not telemetry), plain DFS is fine.
    auto dfs = [&](auto&& self, const std::string& id) -> void {
        current.push_back(id);
        if (exits.count(id)) paths.push_back(current);
        auto it = adj.find(id);
        if (it != adj.end())
            for (const auto& next : it->second) self(self, next);
        current.pop_back();
    };

    auto entries = g.entry_ids();
    std::sort(entries.begin(), entries.end());
    for (const auto& entry : entries) dfs(dfs, entry);
    std::sort(paths.begin(), paths.end());
    return paths;
}

ProcessGraph complement(const ProcessGraph& normal) {
    // Pairing universe: states that trigger a response (outgoing edges) versus
    // states that are responses (incoming edges). Isolated states pair with
    // nothing. The two layers are disjoint, so the complement stays acyclic.
    std::set<std::string> hasOutgoing, hasIncoming;
    for (const auto& e : normal.edges) {
        hasOutgoing.insert(e.from);
        hasIncoming.insert(e.to);
    }
    std::vector<std::string> entries, exits;
    for (const auto& n : normal.nodes) {
        const std::string id = n.id();
        if (hasOutgoing.count(id) && !hasIncoming.count(id)) entries.push_back(id);
        if (hasIncoming.count(id) && !hasOutgoing.count(id)) exits.push_back(id);
    }

    std::set<std::pair<std::string, std::string>> covered;
    for (const auto& path : enumerate_paths(normal))
        if (!path.empty()) covered.insert({path.front(), path.back()});

    // Condition describing when the entry state holds: reuse the normal
    // graph's outgoing edge condition, since the anomalous case is the same
    // trigger with the wrong response.
    auto entry_condition = [&](const std::string& entryId) -> std::string {
        std::vector<std::string> conditions;
        for (const auto& e : normal.edges)
            if (e.from == entryId && !e.condition.empty()) conditions.push_back(e.condition);
        std::sort(conditions.begin(), conditions.end());
        conditions.erase(std::unique(conditions.begin(), conditions.end()), conditions.end());
        if (conditions.size() == 1) return conditions[0];
        return entryId;
    };

    ProcessGraph out;
    out.name = normal.name.empty() ? "anomalous" : normal.name + "-anomalous";
    out.polarity = Polarity::Anomalous;

    std::set<std::string> usedNodes;
    std::vector<ConditionEdge> edges;
    for (const auto& entry : entries) {
        for (const auto& exit : exits) {
            if (covered.count({entry, exit})) continue;
            edges.push_back({entry, exit, entry_condition(entry)});
            usedNodes.insert(entry);
            usedNodes.insert(exit);
        }
    }

    for (const auto& c : normal.components) {
        ComponentDecl decl;
        decl.tag = c.tag;
        for (const auto& s : c.states) {
            StateNode n{c.tag, s};
            if (usedNodes.count(n.id())) {
                decl.states.push_back(s);
                out.nodes.push_back(n);
            }
        }
        if (!decl.states.empty()) out.components.push_back(std::move(decl));
    }
    out.edges = std::move(edges);
    check_acyclic(out);
    return out;
}

// LL/L collapse to Low, H/HH to High; switch states pass through.
static std::string binary_abstract(const std::string& state) {
    if (state == "LL" || state == "L" || state == "LowLow" || state == "Low") return "Low";
    if (state == "H" || state == "HH" || state == "High" || state == "HighHigh") return "High";
    return state;
}

static bool is_ladder_state(const std::string& state) {
    return state == "LL" || state == "L" || state == "H" || state == "HH" ||
           state == "LowLow" || state == "Low" || state == "High" || state == "HighHigh";
}

invariant::InvariantTable to_table(const std::vector<const ProcessGraph*>& graphs) {
    if (graphs.empty()) throw ValidationError("to_table needs at least one graph");

    // Variable layout from the first graph's declaration order; later graphs
    // may only add states of the same components.
    std::vector<invariant::StateVariable> variables;
    std::set<std::string> known;
    for (const ProcessGraph* g : graphs) {
        for (const auto& c : g->components) {
            if (known.count(c.tag)) continue;
            known.insert(c.tag);
            invariant::StateVariable var;
            var.component = c.tag;
            bool ladder = std::all_of(c.states.begin(), c.states.end(), is_ladder_state);
            if (ladder) {
                var.states = {"Low", "High"};
            } else {
                std::vector<std::string> distinct;
                for (const auto& s : c.states) {
                    const std::string b = binary_abstract(s);
                    if (std::find(distinct.begin(), distinct.end(), b) == distinct.end())
                        distinct.push_back(b);
                }
                if (distinct.size() != 2)
                    throw ValidationError(c.tag + " does not reduce to two binary states");
                var.states = {distinct[0], distinct[1]};
            }
            variables.push_back(std::move(var));
        }
    }

    auto table = invariant::InvariantTable::enumerate(variables);

    for (const ProcessGraph* g : graphs) {
        const auto label = g->polarity == Polarity::Normal ? invariant::Assessment::Normal
                                                           : invariant::Assessment::Anomaly;
        for (const auto& path : enumerate_paths(*g)) {
            std::map<std::string, std::string> assignment;
            for (const auto& nodeId : path) {
                const StateNode* n = g->find_node(nodeId);
                const std::string state = binary_abstract(n->state);
                auto it = assignment.find(n->component);
                if (it != assignment.end() && it->second != state)
                    throw ValidationError("path assigns " + n->component + " both " + it->second +
                                          " and " + state);
                assignment[n->component] = state;
            }
            invariant::StateExpression expr;
            bool complete = true;
            for (const auto& v : table.variables()) {
                auto it = assignment.find(v.component);
                if (it == assignment.end()) {
                    complete = false;
                    break;
                }
                expr.assignments.emplace_back(v.component, it->second);
            }
            if (!complete) {
                // Isolated states show up as trivial one-node paths; they
                // carry no traversal and label nothing.
                if (path.size() > 1)
                    throw ValidationError("path through " + path.front() +
                                          " does not assign every component");
                continue;
            }
            const size_t row = table.index_of(expr);
            const auto existing = table.assessment_at(row);
            if (existing != invariant::Assessment::Unlabeled && existing != label)
                throw ValidationError("ambiguous abstraction: '" + expr.to_string() +
                                      "' appears in both polarities");
            table = table.labeled(expr, label);
        }
    }
    return table;
}

invariant::InvariantTable to_table(const ProcessGraph& normal, const ProcessGraph& anomalous) {
    return to_table({&normal, &anomalous});
}

std::string export_dot_string(const ProcessGraph& g) {
    std::vector<const StateNode*> sortedNodes;
    for (const auto& n : g.nodes) sortedNodes.push_back(&n);
    std::sort(sortedNodes.begin(), sortedNodes.end(),
              [](const StateNode* a, const StateNode* b) { return a->id() < b->id(); });

    std::vector<const ConditionEdge*> sortedEdges;
    for (const auto& e : g.edges) sortedEdges.push_back(&e);
    std::sort(sortedEdges.begin(), sortedEdges.end(), [](const ConditionEdge* a, const ConditionEdge* b) {
        return std::tie(a->from, a->to, a->condition) < std::tie(b->from, b->to, b->condition);
    });

    const char* style = g.polarity == Polarity::Normal ? "solid" : "dashed";
    std::ostringstream out;
    out << "digraph \"" << (g.name.empty() ? "process" : g.name) << "\" {\n";
    out << "  rankdir=LR;\n";
    for (const auto* n : sortedNodes)
        out << "  \"" << n->id() << "\" [label=\"" << n->component << "\\n" << n->state
            << "\", shape=box];\n";
    for (const auto* e : sortedEdges)
        out << "  \"" << e->from << "\" -> \"" << e->to << "\" [label=\"" << e->condition
            << "\", style=" << style << "];\n";
    out << "}\n";
    return out.str();
}

void export_dot(const ProcessGraph& g, const std::filesystem::path& path) {
    util::write_file(path, export_dot_string(g));
}

ProcessGraph parse_graph_spec(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    try {
        std::vector<ComponentDecl> components;
        for (const auto& jc : doc.at("components")) {
            ComponentDecl c;
            c.tag = jc.at("tag").get<std::string>();
            for (const auto& s : jc.at("states")) c.states.push_back(s.get<std::string>());
            components.push_back(std::move(c));
        }
        std::vector<Transition> transitions;
        for (const auto& jt : doc.value("transitions", json::array())) {
            Transition t;
            t.fromComponent = jt.at("from").at(0).get<std::string>();
            t.fromState = jt.at("from").at(1).get<std::string>();
            t.toComponent = jt.at("to").at(0).get<std::string>();
            t.toState = jt.at("to").at(1).get<std::string>();
            t.condition = jt.value("condition", "");
            transitions.push_back(std::move(t));
        }
        return build_graph(doc.value("name", ""), std::move(components), transitions);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

ProcessGraph load_graph_spec(const std::filesystem::path& path) {
    return parse_graph_spec(util::read_file(path), path.string());
}

} // namespace forge::graph
