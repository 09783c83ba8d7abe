#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "forge/classifier.hpp"
#include "forge/errors.hpp"
#include "forge/util.hpp"

using namespace forge;
using namespace forge::ml;
using invariant::InvariantTable;

namespace {

StateExpression expr(std::initializer_list<std::pair<std::string, std::string>> a) {
    StateExpression e;
    for (const auto& [c, s] : a) e.assignments.emplace_back(c, s);
    return e;
}

// MV-101/LIT-101 invariant: anomaly exactly when the two binary states agree.
InvariantTable stage1_table() {
    auto t = InvariantTable::enumerate(
        {{"MV-101", {"Closed", "Open"}}, {"LIT-101", {"Low", "High"}}}, "invariant-1", "FR7.1.1");
    t = t.labeled(expr({{"MV-101", "Closed"}, {"LIT-101", "Low"}}),
                  invariant::Assessment::Anomaly);
    t = t.labeled(expr({{"MV-101", "Closed"}, {"LIT-101", "High"}}),
                  invariant::Assessment::Normal);
    t = t.labeled(expr({{"MV-101", "Open"}, {"LIT-101", "Low"}}), invariant::Assessment::Normal);
    t = t.labeled(expr({{"MV-101", "Open"}, {"LIT-101", "High"}}),
                  invariant::Assessment::Anomaly);
    return t;
}

// Four-component invariant over MV-201, P-101, P-102, LIT-301 with the two
// plant-reachable normal rows.
InvariantTable stage2_table() {
    auto t = InvariantTable::enumerate({{"MV-201", {"Closed", "Open"}},
                                        {"P-101", {"Off", "On"}},
                                        {"P-102", {"Off", "On"}},
                                        {"LIT-301", {"Low", "High"}}},
                                       "invariant-2", "FR7.1.2");
    const std::set<size_t> normalRows = {
        t.index_of(expr({{"MV-201", "Open"},
                         {"P-101", "On"},
                         {"P-102", "Off"},
                         {"LIT-301", "Low"}})),
        t.index_of(expr({{"MV-201", "Closed"},
                         {"P-101", "Off"},
                         {"P-102", "Off"},
                         {"LIT-301", "High"}})),
    };
    for (size_t i = 0; i < t.row_count(); ++i)
        t = t.labeled(t.expression_at(i), normalRows.count(i) ? invariant::Assessment::Normal
                                                              : invariant::Assessment::Anomaly);
    return t;
}

Checker make_checker(const InvariantTable& table, bool tree, double alpha = 1.0) {
    const auto ts = TrainingSet::from_table(table);
    Checker c;
    c.invariantId = table.id;
    c.features = table.variables();
    if (tree)
        c.model = train_decision_tree(ts);
    else
        c.model = train_naive_bayes(ts, alpha);
    for (const auto& f : c.features) {
        if (f.states == std::array<std::string, 2>{"Low", "High"})
            c.discretizers.push_back(detect::make_binary_level(f.component, 800));
        else
            c.discretizers.push_back(detect::make_switch(f.component, f.states[0], f.states[1]));
    }
    return c;
}

std::vector<std::pair<StateExpression, Assessment>> table_examples(const InvariantTable& t) {
    std::vector<std::pair<StateExpression, Assessment>> out;
    for (size_t i = 0; i < t.row_count(); ++i)
        if (t.assessment_at(i) != Assessment::Unlabeled)
            out.emplace_back(t.expression_at(i), t.assessment_at(i));
    return out;
}

} // namespace

TEST_CASE("decision tree reproduces the stage-1 table as a depth-2 XNOR") {
    const auto table = stage1_table();
    const auto tree = train_decision_tree(TrainingSet::from_table(table));

    CHECK(tree.depth() == 2);
    const auto checker = make_checker(table, true);
    for (size_t i = 0; i < table.row_count(); ++i)
        CHECK(predict(checker, table.expression_at(i)) == table.assessment_at(i));

    CHECK(predict(checker, expr({{"MV-101", "Open"}, {"LIT-101", "High"}})) ==
          Assessment::Anomaly);
    CHECK(predict(checker, expr({{"MV-101", "Closed"}, {"LIT-101", "High"}})) ==
          Assessment::Normal);
}

TEST_CASE("degenerate training sets") {
    auto allNormal = InvariantTable::enumerate({{"A-1", {"Off", "On"}}});
    for (size_t i = 0; i < 2; ++i)
        allNormal = allNormal.labeled(allNormal.expression_at(i), Assessment::Normal);
    const auto tree = train_decision_tree(TrainingSet::from_table(allNormal));
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].label == Assessment::Normal);

    CHECK_THROWS_AS((void)train_decision_tree(TrainingSet{}), ValidationError);
    CHECK_THROWS_AS((void)train_naive_bayes(TrainingSet{}, 1.0), ValidationError);

    const auto ts = TrainingSet::from_table(allNormal);
    CHECK_THROWS_AS((void)train_naive_bayes(ts, 0.0), ValidationError);
}

TEST_CASE("decision tree reproduces the 16-row invariant exactly") {
    const auto table = stage2_table();
    const auto checker = make_checker(table, true);
    for (size_t i = 0; i < table.row_count(); ++i)
        CHECK(predict(checker, table.expression_at(i)) == table.assessment_at(i));
}

TEST_CASE("property: zero training error on random complete consistent tables") {
    util::Lcg rng(101);
    int trials = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_unit() * 6);
        std::vector<StateVariable> vars;
        for (int v = 0; v < n; ++v) vars.push_back({"C-" + std::to_string(v), {"Off", "On"}});
        auto t = InvariantTable::enumerate(vars);
        for (size_t i = 0; i < t.row_count(); ++i)
            t = t.labeled(t.expression_at(i), rng.next_unit() < 0.5 ? Assessment::Normal
                                                                    : Assessment::Anomaly);
        const auto ts = TrainingSet::from_table(t);
        const auto tree = train_decision_tree(ts);
        CHECK(tree.depth() <= n);
        bool allMatch = true;
        for (const auto& [states, label] : ts.examples)
            if (predict_tree(tree, states) != label) allMatch = false;
        CHECK(allMatch);
        ++trials;
    }
    CHECK(trials == 100);
}

TEST_CASE("no feature repeats along any root-to-leaf path") {
    const auto table = stage2_table();
    const auto tree = train_decision_tree(TrainingSet::from_table(table));

    auto walk = [&](auto&& self, int idx, std::set<int> seen) -> void {
        const auto& n = tree.nodes[idx];
        if (n.feature < 0) return;
        CHECK(!seen.count(n.feature));
        seen.insert(n.feature);
        self(self, n.child[0], seen);
        self(self, n.child[1], seen);
    };
    walk(walk, tree.root, {});
    CHECK(tree.depth() <= static_cast<int>(table.variable_count()));
}

TEST_CASE("naive Bayes on the stage-1 table: uniform likelihoods, fail-safe ties") {
    const auto model = train_naive_bayes(TrainingSet::from_table(stage1_table()), 1.0);

    CHECK(model.priors[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.priors[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (const auto& feature : model.likelihood)
        for (int c = 0; c < 2; ++c)
            for (int s = 0; s < 2; ++s)
                CHECK(feature[c][s] == doctest::Approx(0.5).epsilon(1e-12));

    // Every posterior ties, so the fail-safe rule labels everything Anomaly.
    const auto checker = make_checker(stage1_table(), false);
    const auto table = stage1_table();
    for (size_t i = 0; i < table.row_count(); ++i)
        CHECK(predict(checker, table.expression_at(i)) == Assessment::Anomaly);
}

TEST_CASE("naive Bayes accuracy against the 16-row table is recorded") {
    const auto table = stage2_table();
    const auto checker = make_checker(table, false);
    const auto metrics = evaluate(checker, table_examples(table));
    // Hand-computed: the 7/8 anomaly prior dominates every posterior, so the
    // two normal rows are misclassified and nothing else.
    CHECK(metrics.accuracy == doctest::Approx(14.0 / 16.0).epsilon(1e-12));
    CHECK(metrics.falsePositives == 2);
    CHECK(metrics.falseNegatives == 0);
}

TEST_CASE("naive Bayes invariants: distributions sum to one") {
    util::Lcg rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_unit() * 5);
        std::vector<StateVariable> vars;
        for (int v = 0; v < n; ++v) vars.push_back({"C-" + std::to_string(v), {"Off", "On"}});
        auto t = InvariantTable::enumerate(vars);
        for (size_t i = 0; i < t.row_count(); ++i)
            t = t.labeled(t.expression_at(i), rng.next_unit() < 0.3 ? Assessment::Normal
                                                                    : Assessment::Anomaly);
        const auto ts = TrainingSet::from_table(t);
        if (ts.examples.empty()) continue;
        const auto model = train_naive_bayes(ts, 0.5 + rng.next_unit());
        CHECK(model.priors[0] + model.priors[1] == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& feature : model.likelihood)
            for (int c = 0; c < 2; ++c)
                CHECK(feature[c][0] + feature[c][1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("single-class data keeps a defined posterior for the absent class") {
    auto t = InvariantTable::enumerate({{"A-1", {"Off", "On"}}});
    for (size_t i = 0; i < 2; ++i) t = t.labeled(t.expression_at(i), Assessment::Anomaly);
    const auto model = train_naive_bayes(TrainingSet::from_table(t), 1.0);
    CHECK(model.priors[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model.priors[0] > 0);
    CHECK(model.priors[0] < 1e-8);
    CHECK(predict_bayes(model, {0}) == Assessment::Anomaly);
    CHECK(predict_bayes(model, {1}) == Assessment::Anomaly);
}

TEST_CASE("predict validates its expression") {
    const auto checker = make_checker(stage1_table(), true);
    CHECK_THROWS_AS((void)predict(checker, expr({{"MV-101", "Open"}})), ValidationError);
    CHECK_THROWS_AS((void)predict(checker, expr({{"MV-101", "Open"}, {"P-101", "On"}})),
                    ValidationError);
}

TEST_CASE("evaluate bookkeeping") {
    const auto table = stage1_table();
    const auto checker = make_checker(table, true);
    const auto metrics = evaluate(checker, table_examples(table));
    CHECK(metrics.accuracy == doctest::Approx(1.0));
    CHECK(metrics.total == 4);
    CHECK(metrics.truePositives == 2);
    CHECK(metrics.trueNegatives == 2);
    CHECK(metrics.falsePositives + metrics.falseNegatives == 0);
    CHECK(metrics.truePositives + metrics.trueNegatives + metrics.falsePositives +
              metrics.falseNegatives ==
          metrics.total);

    SUBCASE("empty class subset reports a zero rate") {
        std::vector<std::pair<StateExpression, Assessment>> anomaliesOnly;
        for (const auto& [e, a] : table_examples(table))
            if (a == Assessment::Anomaly) anomaliesOnly.emplace_back(e, a);
        const auto m = evaluate(checker, anomaliesOnly);
        CHECK(m.falsePositiveRate == 0.0);
        CHECK(m.falsePositives + m.trueNegatives == 0);
    }
    SUBCASE("error rate complements accuracy") {
        const auto nb = make_checker(table, false);
        const auto m = evaluate(nb, table_examples(table));
        const double errors =
            static_cast<double>(m.falsePositives + m.falseNegatives) / m.total;
        CHECK(m.accuracy + errors == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("checker save/load round-trip") {
    const auto tmp = std::filesystem::temp_directory_path();

    SUBCASE("decision tree predicts identically after reload") {
        const auto table = stage1_table();
        const auto checker = make_checker(table, true);
        const auto path = tmp / "forge_checker_dt.json";
        save_checker(checker, path);
        const auto loaded = load_checker(path);
        CHECK(loaded.invariantId == checker.invariantId);
        CHECK(loaded.features == checker.features);
        CHECK(loaded.discretizers == checker.discretizers);
        for (size_t i = 0; i < table.row_count(); ++i)
            CHECK(predict(loaded, table.expression_at(i)) ==
                  predict(checker, table.expression_at(i)));
        std::filesystem::remove(path);
    }
    SUBCASE("naive Bayes parameters survive within 1e-12") {
        const auto table = stage2_table();
        const auto checker = make_checker(table, false);
        const auto path = tmp / "forge_checker_nb.json";
        save_checker(checker, path);
        const auto loaded = load_checker(path);
        const auto& a = std::get<NaiveBayesModel>(checker.model);
        const auto& b = std::get<NaiveBayesModel>(loaded.model);
        CHECK(std::abs(a.priors[0] - b.priors[0]) < 1e-12);
        CHECK(std::abs(a.priors[1] - b.priors[1]) < 1e-12);
        REQUIRE(a.likelihood.size() == b.likelihood.size());
        for (size_t f = 0; f < a.likelihood.size(); ++f)
            for (int c = 0; c < 2; ++c)
                for (int s = 0; s < 2; ++s)
                    CHECK(std::abs(a.likelihood[f][c][s] - b.likelihood[f][c][s]) < 1e-12);
        std::filesystem::remove(path);
    }
    SUBCASE("corrupted file raises a parse error") {
        const auto path = tmp / "forge_checker_bad.json";
        util::write_file(path, "{ definitely not a checker");
        CHECK_THROWS_AS((void)load_checker(path), ParseError);
        util::write_file(path, R"({"format": 9, "features": [], "model": {}})");
        CHECK_THROWS_AS((void)load_checker(path), ParseError);
        std::filesystem::remove(path);
    }
}

TEST_CASE("unlabeled rows are excluded from training") {
    auto t = InvariantTable::enumerate({{"A-1", {"Off", "On"}}, {"B-1", {"Off", "On"}}});
    t = t.labeled(t.expression_at(0), Assessment::Normal);
    t = t.labeled(t.expression_at(3), Assessment::Anomaly);
    const auto ts = TrainingSet::from_table(t);
    CHECK(ts.examples.size() == 2);
    const auto tree = train_decision_tree(ts);
    CHECK(predict_tree(tree, {0, 0}) == Assessment::Normal);
    CHECK(predict_tree(tree, {1, 1}) == Assessment::Anomaly);
}
