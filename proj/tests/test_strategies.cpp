#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qf/dataset.hpp"
#include "qf/errors.hpp"
#include "qf/evalx.hpp"
#include "qf/forest.hpp"
#include "qf/rng.hpp"
#include "qf/rules.hpp"
#include "qf/strategies.hpp"

using namespace qf;

namespace {

TreeNode internal(int feature, double threshold, int left, int right) {
    TreeNode nd;
    nd.feature = feature;
    nd.threshold = threshold;
    nd.left = left;
    nd.right = right;
    return nd;
}

TreeNode leaf(Labelset votes) {
    TreeNode nd;
    nd.votes = std::move(votes);
    return nd;
}

Forest vote_pattern_forest(const std::vector<Labelset>& votes, int n_features) {
    Forest forest;
    for (int j = 0; j < n_features; ++j) {
        Feature f;
        f.name = "f" + std::to_string(j);
        forest.space.features.push_back(f);
    }
    for (std::size_t l = 0; l < votes[0].size(); ++l)
        forest.label_names.push_back("label" + std::to_string(l + 1));
    for (std::size_t t = 0; t < votes.size(); ++t) {
        Tree tree;
        tree.nodes.push_back(internal(static_cast<int>(t) % n_features, 0.5, 1, 2));
        tree.nodes.push_back(leaf(votes[t]));
        tree.nodes.push_back(leaf(Labelset(votes[t].size())));
        forest.trees.push_back(tree);
    }
    return forest;
}

// the running example: |T|=9, |L|=5, prediction [0,1,0,1,1], 6 paths carry
// the whole labelset, 7 carry the [0,1,0,1,0] pair
const std::vector<Labelset> kNineTreeVotes = {
    {0, 1, 0, 1, 1}, {0, 1, 0, 1, 1}, {0, 1, 0, 1, 1}, {1, 1, 0, 1, 1},
    {0, 1, 1, 1, 1}, {0, 1, 0, 1, 1}, {0, 1, 0, 1, 0}, {1, 0, 0, 0, 1},
    {0, 0, 1, 1, 0},
};

Eigen::VectorXd nine_tree_instance() { return Eigen::VectorXd::Constant(5, 0.25); }

// train labels where only the {label2, label4} pair is a frequent subset of
// the prediction
Eigen::MatrixXi pair_train_labels() {
    Eigen::MatrixXi labels(10, 5);
    labels.setZero();
    for (int i = 0; i < 7; ++i) {
        labels(i, 1) = 1;
        labels(i, 3) = 1;
    }
    for (int i = 7; i < 10; ++i) {
        labels(i, 0) = 1;
        labels(i, 2) = 1;
        labels(i, 4) = 1;
    }
    return labels;
}

Dataset d4_scaled(std::size_t n, std::uint64_t seed) {
    return minmax_scale(generate_ai4i_like(n, seed));
}

}  // namespace

TEST_CASE("nine-tree example, per-label: one rule per predicted label") {
    Forest forest = vote_pattern_forest(kNineTreeVotes, 5);
    Eigen::VectorXd x = nine_tree_instance();
    StrategyConfig cfg;
    cfg.seed = 3;
    cfg.reduction.seed = 3;

    Explanation expl = explain_per_label(forest, x, cfg);
    CHECK(expl.strategy == StrategyKind::PerLabel);
    REQUIRE(expl.rules.size() == 3);  // labels 2, 4, 5
    CHECK(expl.q.value == 5);
    CHECK_FALSE(expl.fallback_used);

    // rules ordered by label index, each pinning exactly one label
    CHECK(expl.rules[0].consequent == Labelset{0, 1, 0, 0, 0});
    CHECK(expl.rules[1].consequent == Labelset{0, 0, 0, 1, 0});
    CHECK(expl.rules[2].consequent == Labelset{0, 0, 0, 0, 1});
    for (const auto& ps : expl.retained) CHECK(ps.size() == 5);
    for (const auto& trace : expl.traces) CHECK_FALSE(trace.under_quorum);
}

TEST_CASE("nine-tree example, whole labelset: 6 voting paths cut to quorum") {
    Forest forest = vote_pattern_forest(kNineTreeVotes, 5);
    Eigen::VectorXd x = nine_tree_instance();
    StrategyConfig cfg;
    cfg.seed = 3;
    cfg.reduction.seed = 3;

    Explanation expl = explain_all(forest, x, cfg);
    REQUIRE(expl.rules.size() == 1);
    CHECK(expl.rules[0].consequent == Labelset{0, 1, 0, 1, 1});
    CHECK_FALSE(expl.fallback_used);
    REQUIRE(expl.traces.size() == 1);
    REQUIRE_FALSE(expl.traces[0].stages.empty());
    CHECK(expl.traces[0].stages.front().before == 6);
    CHECK(expl.traces[0].stages.back().after == 5);
    CHECK(expl.retained[0].size() == 5);
}

TEST_CASE("nine-tree example, frequent subsets: the pair rule") {
    Forest forest = vote_pattern_forest(kNineTreeVotes, 5);
    Eigen::VectorXd x = nine_tree_instance();
    StrategyConfig cfg;
    cfg.kind = StrategyKind::Subsets;
    cfg.min_support = 0.4;
    cfg.max_subsets = 3;
    cfg.seed = 3;
    cfg.reduction.seed = 3;

    Explanation expl = explain_subsets(forest, x, cfg, pair_train_labels());
    REQUIRE(expl.rules.size() == 1);
    CHECK(expl.rules[0].consequent == Labelset{0, 1, 0, 1, 0});
    CHECK(expl.retained[0].size() == 5);  // 7 voting paths reduced to quorum
    CHECK_FALSE(expl.fallback_used);

    SUBCASE("max_subsets truncates to the top-support subsets") {
        Eigen::MatrixXi labels = pair_train_labels();
        // add rows making {label4, label5} frequent too, but rarer
        Eigen::MatrixXi more(14, 5);
        more.setZero();
        more.topRows(10) = labels;
        for (int i = 10; i < 14; ++i) {
            more(i, 3) = 1;
            more(i, 4) = 1;
        }
        cfg.min_support = 0.2;
        cfg.max_subsets = 1;
        Explanation one = explain_subsets(forest, x, cfg, more);
        REQUIRE(one.rules.size() == 1);
        CHECK(one.rules[0].consequent == Labelset{0, 1, 0, 1, 0});

        cfg.max_subsets = 5;
        Explanation both = explain_subsets(forest, x, cfg, more);
        CHECK(both.rules.size() == 2);
    }
}

TEST_CASE("under-quorum fallback uses every path and stays conclusive") {
    // two labels, each predicted with 6 votes, but only 3 trees carry both
    std::vector<Labelset> votes = {
        {1, 1}, {1, 1}, {1, 1}, {1, 0}, {1, 0}, {0, 1}, {0, 1}, {1, 0}, {0, 1},
    };
    Forest forest = vote_pattern_forest(votes, 3);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.25);
    REQUIRE(predict(forest, x) == Labelset{1, 1});

    StrategyConfig cfg;
    cfg.seed = 5;
    cfg.reduction.seed = 5;
    Explanation expl = explain_all(forest, x, cfg);
    CHECK(expl.fallback_used);
    REQUIRE(expl.rules.size() == 1);
    CHECK(expl.retained[0].size() == 9);  // all |T| paths
    REQUIRE(expl.traces.size() == 1);
    CHECK(expl.traces[0].under_quorum);

    auto report = check_conclusiveness(expl.rules[0], forest, x, 1000, 11);
    CHECK(report.holds);
}

TEST_CASE("per-label never falls back: voting sufficiency is guaranteed") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Dataset ds = d4_scaled(150, 1000 + trial);
        TrainConfig tc;
        tc.n_trees = 9;
        tc.seed = trial;
        Forest forest = train_forest(ds, tc);
        StrategyConfig cfg;
        cfg.seed = trial;
        cfg.reduction.seed = trial;

        Eigen::VectorXd x = ds.row(static_cast<Eigen::Index>(rng.below(150)));
        Labelset pred = predict(forest, x);
        if (!pred.any()) continue;
        Explanation expl = explain_per_label(forest, x, cfg);
        CHECK_FALSE(expl.fallback_used);
        CHECK(expl.rules.size() == static_cast<std::size_t>(pred.count()));
    }
}

TEST_CASE("consequent soundness and conclusiveness on generated data") {
    Dataset ds = d4_scaled(339, 7);
    TrainConfig tc;
    tc.n_trees = 25;
    tc.seed = 9;
    Forest forest = train_forest(ds, tc);

    StrategyConfig cfg;
    cfg.seed = 23;
    cfg.reduction.seed = 23;
    auto itemsets = frequent_label_subsets(ds.labels, cfg.min_support,
                                           cfg.subsets_min_size);

    Rng rng(4);
    int conclusive_checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        Eigen::VectorXd x = ds.row(static_cast<Eigen::Index>(rng.below(339)));
        Labelset pred = predict(forest, x);
        if (!pred.any()) continue;

        for (auto kind : {StrategyKind::PerLabel, StrategyKind::All,
                          StrategyKind::Subsets}) {
            cfg.kind = kind;
            Explanation expl = kind == StrategyKind::Subsets
                                   ? explain_subsets(forest, x, cfg, itemsets)
                                   : explain(forest, x, cfg);
            int total = 0;
            for (const Rule& rule : expl.rules) {
                total += rule.length();
                for (int l : rule.consequent.positives())
                    CHECK(pred[static_cast<std::size_t>(l)] == 1);
                auto report = check_conclusiveness(rule, forest, x, 300,
                                                   cfg.seed + trial);
                CHECK(report.holds);
                ++conclusive_checked;
            }
            CHECK(rule_length(expl) == total);
        }
    }
    CHECK(conclusive_checked > 0);
}

TEST_CASE("explanations on a D4-style instance stay inside their own ranges") {
    Dataset ds = d4_scaled(339, 7);
    TrainConfig tc;
    tc.n_trees = 25;
    tc.seed = 9;
    Forest forest = train_forest(ds, tc);

    // pick the test row with the most predicted labels
    Eigen::Index best = 0;
    int best_count = -1;
    for (Eigen::Index i = 0; i < ds.n_rows(); ++i) {
        int c = predict(forest, ds.row(i)).count();
        if (c > best_count) {
            best_count = c;
            best = i;
        }
    }
    REQUIRE(best_count >= 2);
    Eigen::VectorXd x = ds.row(best);
    Labelset pred = predict(forest, x);

    StrategyConfig cfg;
    cfg.seed = 31;
    cfg.reduction.seed = 31;

    Explanation per_label = explain_per_label(forest, x, cfg);
    CHECK(per_label.rules.size() == static_cast<std::size_t>(best_count));
    for (const Rule& rule : per_label.rules) {
        CHECK(rule.consequent.count() == 1);
        for (const FeatureRange& r : rule.ranges) {
            CHECK(x[r.feature] >= r.low);  // instance inside its own rule
            CHECK(x[r.feature] <= r.high);
        }
    }

    Explanation all = explain_all(forest, x, cfg);
    REQUIRE(all.rules.size() == 1);
    CHECK(all.rules[0].consequent == pred);
    for (const FeatureRange& r : all.rules[0].ranges) {
        CHECK(x[r.feature] >= r.low);
        CHECK(x[r.feature] <= r.high);
    }
}

TEST_CASE("all-zero predictions yield an empty flagged explanation") {
    std::vector<Labelset> votes(9, Labelset{0, 0});
    Forest forest = vote_pattern_forest(votes, 2);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(2, 0.25);

    StrategyConfig cfg;
    for (auto kind : {StrategyKind::PerLabel, StrategyKind::All}) {
        cfg.kind = kind;
        Explanation expl = explain(forest, x, cfg);
        CHECK(expl.no_positive_labels);
        CHECK(expl.rules.empty());
    }
    cfg.kind = StrategyKind::Subsets;
    Eigen::MatrixXi train = Eigen::MatrixXi::Ones(10, 2);
    Explanation expl = explain_subsets(forest, x, cfg, train);
    CHECK(expl.no_positive_labels);
}

TEST_CASE("subsets with nothing activated is flagged, not an error") {
    Forest forest = vote_pattern_forest(kNineTreeVotes, 5);
    Eigen::VectorXd x = nine_tree_instance();
    StrategyConfig cfg;
    cfg.kind = StrategyKind::Subsets;

    // frequent pairs exist but none inside the prediction
    Eigen::MatrixXi train = Eigen::MatrixXi::Zero(10, 5);
    for (int i = 0; i < 10; ++i) {
        train(i, 0) = 1;
        train(i, 2) = 1;
    }
    Explanation expl = explain_subsets(forest, x, cfg, train);
    CHECK(expl.no_activated_subsets);
    CHECK(expl.rules.empty());

    CHECK_THROWS_AS(
        [&] {
            StrategyConfig bad = cfg;
            bad.max_subsets = 0;
            return explain_subsets(forest, x, bad, train);
        }(),
        ArgError);
}
