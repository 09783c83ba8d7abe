#include "forge/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/util.hpp"

using nlohmann::json;

namespace forge::ml {

// --- training set ------------------------------------------------------------

TrainingSet TrainingSet::from_table(const invariant::InvariantTable& table) {
    TrainingSet ts;
    ts.features = table.variables();
    const size_t n = ts.features.size();
    for (size_t i = 0; i < table.row_count(); ++i) {
        const Assessment a = table.assessment_at(i);
        if (a == Assessment::Unlabeled) continue;
        std::vector<std::uint8_t> states(n);
        for (size_t v = 0; v < n; ++v)
            states[v] = static_cast<std::uint8_t>((i >> (n - 1 - v)) & 1);
        ts.examples.emplace_back(std::move(states), a);
    }
    return ts;
}

bool TrainingSet::has_class(Assessment a) const {
    for (const auto& [states, label] : examples)
        if (label == a) return true;
    return false;
}

// --- decision tree -----------------------------------------------------------

int DecisionTree::depth() const {
    if (empty()) return 0;
    auto walk = [&](auto&& self, int idx) -> int {
        const Node& n = nodes[idx];
        if (n.feature < 0) return 0;
        return 1 + std::max(self(self, n.child[0]), self(self, n.child[1]));
    };
    return walk(walk, root);
}

namespace {

using Example = std::pair<std::vector<std::uint8_t>, Assessment>;

double entropy(const std::vector<const Example*>& rows) {
    size_t counts[2] = {0, 0};
    for (const auto* e : rows) ++counts[e->second == Assessment::Anomaly ? 1 : 0];
    const double total = static_cast<double>(rows.size());
    double h = 0;
    for (size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

Assessment majority(const std::vector<const Example*>& rows) {
    size_t normal = 0, anomaly = 0;
    for (const auto* e : rows) (e->second == Assessment::Anomaly ? anomaly : normal)++;
    // Ties go to Anomaly: a checker that cannot decide should raise the alarm.
    return anomaly >= normal ? Assessment::Anomaly : Assessment::Normal;
}

int build_node(DecisionTree& tree, const std::vector<const Example*>& rows,
               std::vector<bool>& used, size_t featureCount) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    bool pure = true;
    for (const auto* e : rows)
        if (e->second != rows[0]->second) pure = false;
    if (pure) {
        tree.nodes[idx].label = rows[0]->second;
        return idx;
    }

    // Pick the split: max information gain, earliest feature on ties. A gain
    // of zero still splits as long as the feature separates the rows, since
    // parity-shaped tables have no first-level gain at all.
    const double base = entropy(rows);
    int best = -1;
    double bestGain = -1;
    for (size_t f = 0; f < featureCount; ++f) {
        if (used[f]) continue;
        std::vector<const Example*> side[2];
        for (const auto* e : rows) side[e->first[f]].push_back(e);
        if (side[0].empty() || side[1].empty()) continue;
        const double total = static_cast<double>(rows.size());
        const double weighted = entropy(side[0]) * side[0].size() / total +
                                entropy(side[1]) * side[1].size() / total;
        const double gain = base - weighted;
        if (gain > bestGain + 1e-12) {
            bestGain = gain;
            best = static_cast<int>(f);
        }
    }

    if (best < 0) { // exhausted or nothing separates the rows
        tree.nodes[idx].label = majority(rows);
        return idx;
    }

    std::vector<const Example*> side[2];
    for (const auto* e : rows) side[e->first[best]].push_back(e);

    used[best] = true;
    tree.nodes[idx].feature = best;
    tree.nodes[idx].child[0] = build_node(tree, side[0], used, featureCount);
    tree.nodes[idx].child[1] = build_node(tree, side[1], used, featureCount);
    used[best] = false;
    return idx;
}

} // namespace

DecisionTree train_decision_tree(const TrainingSet& data) {
    if (data.examples.empty()) throw ValidationError("cannot train on an empty example set");

    std::vector<const Example*> rows;
    rows.reserve(data.examples.size());
    for (const auto& e : data.examples) rows.push_back(&e);

    DecisionTree tree;
    std::vector<bool> used(data.features.size(), false);
    tree.root = build_node(tree, rows, used, data.features.size());
    return tree;
}

Assessment predict_tree(const DecisionTree& tree, const std::vector<std::uint8_t>& states) {
    int idx = tree.root;
    while (tree.nodes[idx].feature >= 0) {
        const auto& n = tree.nodes[idx];
        idx = n.child[states[n.feature]];
    }
    return tree.nodes[idx].label;
}

// --- naive Bayes ---------------------------------------------------------------

NaiveBayesModel train_naive_bayes(const TrainingSet& data, double alpha) {
    if (data.examples.empty()) throw ValidationError("cannot train on an empty example set");
    if (!(alpha > 0)) throw ValidationError("smoothing parameter must be positive");

    constexpr double kAbsentClassPrior = 1e-9;

    NaiveBayesModel model;
    model.alpha = alpha;

    size_t classCount[2] = {0, 0};
    for (const auto& [states, label] : data.examples)
        ++classCount[label == Assessment::Anomaly ? 1 : 0];
    const double total = static_cast<double>(data.examples.size());

    for (int c = 0; c < 2; ++c) {
        model.priors[c] = classCount[c] > 0 ? classCount[c] / total : kAbsentClassPrior;
    }
    const double priorSum = model.priors[0] + model.priors[1];
    model.priors[0] /= priorSum;
    model.priors[1] /= priorSum;

    model.likelihood.resize(data.features.size());
    for (size_t f = 0; f < data.features.size(); ++f) {
        for (int c = 0; c < 2; ++c) {
            size_t stateCount[2] = {0, 0};
            for (const auto& [states, label] : data.examples)
                if ((label == Assessment::Anomaly ? 1 : 0) == c) ++stateCount[states[f]];
            const double denom = classCount[c] + alpha * 2;
            for (int s = 0; s < 2; ++s)
                model.likelihood[f][c][s] = (stateCount[s] + alpha) / denom;
        }
    }
    return model;
}

Assessment predict_bayes(const NaiveBayesModel& model, const std::vector<std::uint8_t>& states) {
    double logPosterior[2];
    for (int c = 0; c < 2; ++c) {
        logPosterior[c] = std::log(model.priors[c]);
        for (size_t f = 0; f < model.likelihood.size(); ++f)
            logPosterior[c] += std::log(model.likelihood[f][c][states[f]]);
    }
    return logPosterior[1] >= logPosterior[0] ? Assessment::Anomaly : Assessment::Normal;
}

// --- checker --------------------------------------------------------------------

Assessment predict_states(const Checker& checker, const std::vector<std::uint8_t>& states) {
    if (states.size() != checker.features.size())
        throw ValidationError("expression covers " + std::to_string(states.size()) +
                              " features, checker has " + std::to_string(checker.features.size()));
    if (checker.is_tree()) return predict_tree(std::get<DecisionTree>(checker.model), states);
    return predict_bayes(std::get<NaiveBayesModel>(checker.model), states);
}

static std::vector<std::uint8_t> expression_states(const Checker& checker,
                                                   const StateExpression& expr) {
    std::vector<std::uint8_t> states(checker.features.size());
    for (size_t f = 0; f < checker.features.size(); ++f) {
        const auto& feature = checker.features[f];
        bool found = false;
        for (const auto& [component, state] : expr.assignments) {
            if (component != feature.component) continue;
            if (state == feature.states[0])
                states[f] = 0;
            else if (state == feature.states[1])
                states[f] = 1;
            else
                throw ValidationError("'" + state + "' is not a state of " + feature.component);
            found = true;
            break;
        }
        if (!found) throw ValidationError("expression is missing feature " + feature.component);
    }
    return states;
}

Assessment predict(const Checker& checker, const StateExpression& expr) {
    return predict_states(checker, expression_states(checker, expr));
}

Metrics evaluate(const Checker& checker,
                 const std::vector<std::pair<StateExpression, Assessment>>& examples) {
    if (examples.empty()) throw ValidationError("cannot evaluate on an empty example set");
    Metrics m;
    for (const auto& [expr, truth] : examples) {
        const Assessment predicted = predict(checker, expr);
        ++m.total;
        if (predicted == truth) ++m.correct;
        if (truth == Assessment::Anomaly)
            (predicted == Assessment::Anomaly ? m.truePositives : m.falseNegatives)++;
        else
            (predicted == Assessment::Anomaly ? m.falsePositives : m.trueNegatives)++;
    }
    m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
    const size_t normals = m.falsePositives + m.trueNegatives;
    m.falsePositiveRate = normals ? static_cast<double>(m.falsePositives) / normals : 0.0;
    return m;
}

// --- persistence -----------------------------------------------------------------

static json tree_to_json(const DecisionTree& tree, int idx) {
    const auto& n = tree.nodes[idx];
    if (n.feature < 0) return json{{"leaf", invariant::to_string(n.label)}};
    return json{{"split", n.feature},
                {"children", json::array({tree_to_json(tree, n.child[0]),
                                          tree_to_json(tree, n.child[1])})}};
}

static int tree_from_json(const json& j, DecisionTree& tree, size_t featureCount) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf")) {
        tree.nodes[idx].label = invariant::assessment_from_string(j.at("leaf").get<std::string>());
        return idx;
    }
    const int feature = j.at("split").get<int>();
    if (feature < 0 || static_cast<size_t>(feature) >= featureCount)
        throw ParseError("split references feature " + std::to_string(feature) +
                         " outside the feature list");
    tree.nodes[idx].feature = feature;
    const auto& children = j.at("children");
    if (!children.is_array() || children.size() != 2)
        throw ParseError("split must carry one child per state");
    tree.nodes[idx].child[0] = tree_from_json(children[0], tree, featureCount);
    tree.nodes[idx].child[1] = tree_from_json(children[1], tree, featureCount);
    return idx;
}

static json discretizer_to_json(const detect::Discretizer& d) {
    json j;
    j["component"] = d.component;
    switch (d.kind) {
        case detect::Discretizer::Kind::Ladder:
            j["kind"] = "ladder";
            j["ll"] = d.ll;
            j["l"] = d.l;
            j["h"] = d.h;
            j["hh"] = d.hh;
            break;
        case detect::Discretizer::Kind::BinaryLevel:
            j["kind"] = "binaryLevel";
            j["h"] = d.h;
            break;
        case detect::Discretizer::Kind::Switch:
            j["kind"] = "switch";
            j["states"] = {d.switchStates[0], d.switchStates[1]};
            break;
    }
    return j;
}

static detect::Discretizer discretizer_from_json(const json& j) {
    const std::string component = j.at("component").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ladder")
        return detect::make_ladder(component, j.at("ll").get<double>(), j.at("l").get<double>(),
                                   j.at("h").get<double>(), j.at("hh").get<double>());
    if (kind == "binaryLevel") return detect::make_binary_level(component, j.at("h").get<double>());
    if (kind == "switch") {
        const auto& states = j.at("states");
        return detect::make_switch(component, states.at(0).get<std::string>(),
                                   states.at(1).get<std::string>());
    }
    throw ParseError("unknown discretizer kind '" + kind + "'");
}

std::string serialize_checker(const Checker& checker) {
    json doc;
    doc["format"] = 1;
    doc["invariantId"] = checker.invariantId;

    json features = json::array();
    for (const auto& f : checker.features)
        features.push_back({{"component", f.component}, {"states", {f.states[0], f.states[1]}}});
    doc["features"] = std::move(features);

    json model;
    if (checker.is_tree()) {
        const auto& tree = std::get<DecisionTree>(checker.model);
        model["type"] = "dt";
        model["tree"] = tree_to_json(tree, tree.root);
    } else {
        const auto& nb = std::get<NaiveBayesModel>(checker.model);
        model["type"] = "nb";
        model["alpha"] = nb.alpha;
        model["priors"] = {nb.priors[0], nb.priors[1]};
        json lik = json::array();
        for (const auto& f : nb.likelihood)
            lik.push_back({{f[0][0], f[0][1]}, {f[1][0], f[1][1]}});
        model["likelihood"] = std::move(lik);
    }
    doc["model"] = std::move(model);

    json discretizers = json::array();
    for (const auto& d : checker.discretizers) discretizers.push_back(discretizer_to_json(d));
    doc["discretizers"] = std::move(discretizers);
    return doc.dump(2) + "\n";
}

Checker parse_checker(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    try {
        const int format = doc.value("format", 0);
        if (format != 1)
            throw ParseError(origin + ": unsupported checker format " + std::to_string(format));

        Checker checker;
        checker.invariantId = doc.value("invariantId", "");
        for (const auto& jf : doc.at("features")) {
            StateVariable v;
            v.component = jf.at("component").get<std::string>();
            v.states = {jf.at("states").at(0).get<std::string>(),
                        jf.at("states").at(1).get<std::string>()};
            checker.features.push_back(std::move(v));
        }

        const auto& jm = doc.at("model");
        const std::string type = jm.at("type").get<std::string>();
        if (type == "dt") {
            DecisionTree tree;
            tree.root = tree_from_json(jm.at("tree"), tree, checker.features.size());
            checker.model = std::move(tree);
        } else if (type == "nb") {
            NaiveBayesModel nb;
            nb.alpha = jm.at("alpha").get<double>();
            nb.priors = {jm.at("priors").at(0).get<double>(), jm.at("priors").at(1).get<double>()};
            for (const auto& jf : jm.at("likelihood")) {
                std::array<std::array<double, 2>, 2> f{};
                for (int c = 0; c < 2; ++c)
                    for (int s = 0; s < 2; ++s) f[c][s] = jf.at(c).at(s).get<double>();
                nb.likelihood.push_back(f);
            }
            if (nb.likelihood.size() != checker.features.size())
                throw ParseError(origin + ": likelihood table does not match the feature list");
            checker.model = std::move(nb);
        } else {
            throw ParseError(origin + ": unknown model type '" + type + "'");
        }

        for (const auto& jd : doc.value("discretizers", json::array()))
            checker.discretizers.push_back(discretizer_from_json(jd));
        if (!checker.discretizers.empty() &&
            checker.discretizers.size() != checker.features.size())
            throw ParseError(origin + ": discretizer bindings do not match the feature list");
        return checker;
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

void save_checker(const Checker& checker, const std::filesystem::path& path) {
    util::write_file(path, serialize_checker(checker));
}

Checker load_checker(const std::filesystem::path& path) {
    return parse_checker(util::read_file(path), path.string());
}

} // namespace forge::ml
