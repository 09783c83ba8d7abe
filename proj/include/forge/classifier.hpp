#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "forge/discretizer.hpp"
#include "forge/invariant.hpp"

namespace forge::ml {

using invariant::Assessment;
using invariant::StateExpression;
using invariant::StateVariable;

// Labeled truth-table rows ready for training. Examples are stored as state
// indices aligned with `features`; Unlabeled rows are never included.
struct TrainingSet {
    std::vector<StateVariable> features;
    std::vector<std::pair<std::vector<std::uint8_t>, Assessment>> examples;

    static TrainingSet from_table(const invariant::InvariantTable& table);

    bool has_class(Assessment a) const;
};

// Flat-array decision tree; children indexed by the feature's state index.
struct DecisionTree {
    struct Node {
        int feature = -1;                       // -1 for leaves
        Assessment label = Assessment::Anomaly; // leaves only
        std::array<int, 2> child{-1, -1};
    };

    std::vector<Node> nodes;
    int root = -1;

    bool empty() const { return root < 0; }
    int depth() const;

    bool operator==(const DecisionTree&) const = default;
};

// Categorical naive Bayes over binary state features with Laplace smoothing.
struct NaiveBayesModel {
    double alpha = 1.0;
    std::array<double, 2> priors{0, 0}; // [Normal, Anomaly]
    // likelihood[feature][class][state]
    std::vector<std::array<std::array<double, 2>, 2>> likelihood;

    bool operator==(const NaiveBayesModel&) const = default;
};

// ID3: split on maximum information gain, ties broken by feature order. A node
// becomes a leaf when pure, when features are exhausted, or when no remaining
// feature separates the examples (majority label, ties to Anomaly).
DecisionTree train_decision_tree(const TrainingSet& data);

NaiveBayesModel train_naive_bayes(const TrainingSet& data, double alpha = 1.0);

Assessment predict_tree(const DecisionTree& tree, const std::vector<std::uint8_t>& states);
// Posterior ties resolve to Anomaly.
Assessment predict_bayes(const NaiveBayesModel& model, const std::vector<std::uint8_t>& states);

// A trained model bound to its invariant's components and the discretizers
// that turn raw telemetry into their states.
struct Checker {
    std::string invariantId;
    std::vector<StateVariable> features;
    std::variant<DecisionTree, NaiveBayesModel> model;
    std::vector<detect::Discretizer> discretizers; // aligned with features

    bool is_tree() const { return std::holds_alternative<DecisionTree>(model); }
};

Assessment predict(const Checker& checker, const StateExpression& expr);
Assessment predict_states(const Checker& checker, const std::vector<std::uint8_t>& states);

struct Metrics {
    size_t total = 0;
    size_t correct = 0;
    size_t truePositives = 0;  // Anomaly predicted on Anomaly ground truth
    size_t trueNegatives = 0;
    size_t falsePositives = 0; // Anomaly predicted on Normal ground truth
    size_t falseNegatives = 0;
    double accuracy = 0;
    double falsePositiveRate = 0; // FP / (FP + TN), 0 when no Normal examples
};

Metrics evaluate(const Checker& checker,
                 const std::vector<std::pair<StateExpression, Assessment>>& examples);

std::string serialize_checker(const Checker& checker);
Checker parse_checker(const std::string& jsonText, const std::string& origin);
void save_checker(const Checker& checker, const std::filesystem::path& path);
Checker load_checker(const std::filesystem::path& path);

} // namespace forge::ml
