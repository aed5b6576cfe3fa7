#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qf/dataset.hpp"
#include "qf/labelset.hpp"

namespace qf {

// Internal node: feature >= 0, threshold and both children set; descent goes
// left iff value <= threshold. Leaf: feature == -1 and `votes` holds the
// per-label majority of the training rows that reached it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Labelset votes;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0
};

struct TrainConfig {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unbounded
    std::uint64_t seed = 0;
    int features_per_split = 0;  // 0 = ceil(sqrt(n_features))
};

struct Forest {
    std::vector<Tree> trees;
    std::vector<std::string> label_names;
    FeatureSpace space;
    TrainConfig config;

    int n_trees() const { return static_cast<int>(trees.size()); }
    int n_labels() const { return static_cast<int>(label_names.size()); }
};

/// Train a multi-output random forest: one bootstrap sample per tree, CART
/// splits minimizing mean Gini impurity across labels, ceil(sqrt(F)) random
/// candidate features per split. Fully deterministic for a fixed seed
/// (per-tree RNG streams derived from it), so parallel and sequential
/// training would agree.
Forest train_forest(const Dataset& ds, const TrainConfig& cfg);

/// Leaf vote vector reached by threshold descent.
Labelset tree_predict(const Tree& tree, const Eigen::VectorXd& x);

/// Node id of the leaf reached by threshold descent.
int tree_leaf(const Tree& tree, const Eigen::VectorXd& x);

/// Number of trees voting positive, per label.
Eigen::VectorXi vote_counts(const Forest& forest, const Eigen::VectorXd& x);

/// Per-label hard-majority prediction: label l is positive iff at least
/// quorum(|T|) trees vote 1 for l. With an even tree count, an exact half
/// split falls below quorum and predicts 0.
Labelset predict(const Forest& forest, const Eigen::VectorXd& x);

} // namespace qf
